#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorasim/record.hpp"

namespace lorasim {

struct Scope {
    enum class Kind { global, device, arm };
    Kind kind = Kind::global;
    std::size_t index = 0;

    static Scope global() { return {}; }
    static Scope device(std::size_t i) { return {Kind::device, i}; }
    static Scope arm(std::size_t i) { return {Kind::arm, i}; }

    bool contains(const RunRecord& r) const;
};

/// Successes / attempts over the scope; nullopt when the scope has no attempts.
std::optional<double> success_rate(std::span<const RunRecord> records, Scope scope = {});

/// Cumulative successes per mJ of active-mode energy; nullopt when the scope has no
/// attempts. Throws ContractError if attempts exist but consumed no energy.
std::optional<double> energy_efficiency(std::span<const RunRecord> records, Scope scope = {});

/// Share of acknowledged attempts sent at each power level. Empty without successes.
std::map<int, double> tp_selection_ratio(std::span<const RunRecord> records);

struct ArmMetrics {
    std::uint64_t selections = 0;  // N
    std::uint64_t successes = 0;   // R
    double success_rate = 0.0;     // X = R / N
    double energy_efficiency = 0.0;  // X / mean E_Active on this arm
};

struct MetricsSummary {
    std::string config_hash;
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    std::optional<double> success_rate;
    // Mean over devices of each device's successes / energy.
    std::optional<double> energy_efficiency;
    // Network total successes / total energy.
    std::optional<double> energy_efficiency_total;
    std::map<int, double> tp_ratio;
    std::map<std::size_t, ArmMetrics> per_arm;
};

MetricsSummary summarize(std::span<const RunRecord> records, std::string config_hash = {});

/// Arithmetic mean of every scalar and map entry across runs (missing map keys count
/// as 0; undefined scalars are skipped). Throws ConfigError on mixed config hashes or
/// an empty list.
MetricsSummary aggregate_runs(std::span<const MetricsSummary> summaries);

}  // namespace lorasim
