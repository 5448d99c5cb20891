#pragma once

#include <map>
#include <string_view>

#include "lorasim/params.hpp"

namespace lorasim {

struct RadioConfig {
    int sf = 7;
    double bw_hz = 125000.0;
    int n_preamble = 8;
    int n_payload = 36;  // payload symbols
};

// Constants of the active-mode energy model. e_* are per-attempt energies in mJ,
// p_* are draws in mW (mW * s = mJ).
struct EnergyModel {
    double e_wu = 56.1;
    double e_proc = 85.8;
    double e_r = 66.0;
    double p_mcu = 29.7;
    std::map<int, double> p_toa_by_level;  // dBm -> mW

    // Throws ConfigError when a constant is non-positive.
    void validate() const;
    // Throws ConfigError naming the first level absent from p_toa_by_level.
    void require_levels(std::span<const TxPower> powers) const;
};

EnergyModel default_energy_model();

struct Airtime {
    double t_symbol = 0.0;
    double t_preamble = 0.0;
    double t_payload = 0.0;
    double t_toa = 0.0;
};

struct AttemptEnergy {
    double t_symbol = 0.0;
    double t_preamble = 0.0;
    double t_payload = 0.0;
    double t_toa = 0.0;
    double e_toa = 0.0;     // mJ
    double e_active = 0.0;  // mJ
};

enum class RewardMode { normalized, raw };

std::string_view to_string(RewardMode mode);
RewardMode reward_mode_from_string(std::string_view name);

/// Seconds per chirp symbol, 2^sf / bw.
double symbol_time(const RadioConfig& cfg);

/// Preamble (4.25 + N_P symbols), payload and total time on air, in seconds.
Airtime time_on_air(const RadioConfig& cfg);

/// Energy of one transmitted attempt at `level_dbm`.
/// Throws ConfigError if the level has no P_ToA entry.
AttemptEnergy attempt_energy(const RadioConfig& cfg, const EnergyModel& model, int level_dbm);

/// Energy charged when carrier sense aborts the attempt: wake-up, processing and
/// receive window, but nothing on air.
AttemptEnergy aborted_attempt_energy(const EnergyModel& model);

/// Reward paid for an acknowledged attempt.
///   normalized: e_toa_min / e.e_toa, in (0, 1] when e_toa_min is the E_ToA of the
///               lowest configured level for the same payload
///   raw:        1 / e.e_toa, per mJ
double reward_basis(const AttemptEnergy& e, RewardMode mode, double e_toa_min);

}  // namespace lorasim
