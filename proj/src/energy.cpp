#include "lorasim/energy.hpp"

#include <cmath>
#include <string>

#include "lorasim/error.hpp"

namespace lorasim {

void EnergyModel::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string("energy constant ") + name + " must be > 0");
    };
    positive(e_wu, "e_wu");
    positive(e_proc, "e_proc");
    positive(e_r, "e_r");
    positive(p_mcu, "p_mcu");
    if (p_toa_by_level.empty()) throw ConfigError("energy table p_toa_mw is empty");
    for (const auto& [level, mw] : p_toa_by_level) {
        if (!(mw > 0.0)) {
            throw ConfigError("p_toa_mw for " + std::to_string(level) + " dBm must be > 0");
        }
    }
}

void EnergyModel::require_levels(std::span<const TxPower> powers) const {
    for (const auto& p : powers) {
        if (!p_toa_by_level.contains(p.level_dbm)) {
            throw ConfigError("energy table p_toa_mw has no entry for " +
                              std::to_string(p.level_dbm) + " dBm");
        }
    }
}

EnergyModel default_energy_model() {
    EnergyModel m;
    for (const auto& p : default_powers()) m.p_toa_by_level[p.level_dbm] = p.draw_mw;
    return m;
}

std::string_view to_string(RewardMode mode) {
    return mode == RewardMode::normalized ? "normalized" : "raw";
}

RewardMode reward_mode_from_string(std::string_view name) {
    if (name == "normalized") return RewardMode::normalized;
    if (name == "raw") return RewardMode::raw;
    throw ConfigError("unknown reward_mode '" + std::string(name) + "'");
}

double symbol_time(const RadioConfig& cfg) {
    if (!(cfg.bw_hz > 0.0)) throw ContractError("bandwidth must be > 0");
    return std::ldexp(1.0, cfg.sf) / cfg.bw_hz;
}

Airtime time_on_air(const RadioConfig& cfg) {
    if (cfg.n_preamble < 0 || cfg.n_payload < 0) {
        throw ContractError("symbol counts must be non-negative");
    }
    Airtime a;
    a.t_symbol = symbol_time(cfg);
    a.t_preamble = (4.25 + cfg.n_preamble) * a.t_symbol;
    a.t_payload = a.t_symbol * cfg.n_payload;
    a.t_toa = a.t_preamble + a.t_payload;
    return a;
}

AttemptEnergy attempt_energy(const RadioConfig& cfg, const EnergyModel& model, int level_dbm) {
    const auto it = model.p_toa_by_level.find(level_dbm);
    if (it == model.p_toa_by_level.end()) {
        throw ConfigError("energy table p_toa_mw has no entry for " + std::to_string(level_dbm) +
                          " dBm");
    }
    const Airtime air = time_on_air(cfg);
    AttemptEnergy e;
    e.t_symbol = air.t_symbol;
    e.t_preamble = air.t_preamble;
    e.t_payload = air.t_payload;
    e.t_toa = air.t_toa;
    e.e_toa = (model.p_mcu + it->second) * air.t_toa;
    e.e_active = model.e_wu + model.e_proc + e.e_toa + model.e_r;
    return e;
}

AttemptEnergy aborted_attempt_energy(const EnergyModel& model) {
    AttemptEnergy e;
    e.e_active = model.e_wu + model.e_proc + model.e_r;
    return e;
}

double reward_basis(const AttemptEnergy& e, RewardMode mode, double e_toa_min) {
    if (!(e.e_toa > 0.0)) throw ContractError("reward requires e_toa > 0");
    if (mode == RewardMode::raw) return 1.0 / e.e_toa;
    return e_toa_min / e.e_toa;
}

}  // namespace lorasim
