#include "lorasim/metrics.hpp"

#include <set>

#include "lorasim/error.hpp"

namespace lorasim {

bool Scope::contains(const RunRecord& r) const {
    switch (kind) {
        case Kind::global: return true;
        case Kind::device: return r.device == index;
        case Kind::arm: return r.arm_index == index;
    }
    return false;
}

namespace {

struct Tally {
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    double energy = 0.0;
};

Tally tally(std::span<const RunRecord> records, Scope scope) {
    Tally t;
    for (const auto& r : records) {
        if (!scope.contains(r)) continue;
        ++t.attempts;
        if (r.acked) ++t.successes;
        t.energy += r.e_active;
    }
    return t;
}

std::optional<double> efficiency(const Tally& t) {
    if (t.attempts == 0) return std::nullopt;
    if (!(t.energy > 0.0)) throw ContractError("energy efficiency over zero energy");
    return static_cast<double>(t.successes) / t.energy;
}

}  // namespace

std::optional<double> success_rate(std::span<const RunRecord> records, Scope scope) {
    const Tally t = tally(records, scope);
    if (t.attempts == 0) return std::nullopt;
    return static_cast<double>(t.successes) / static_cast<double>(t.attempts);
}

std::optional<double> energy_efficiency(std::span<const RunRecord> records, Scope scope) {
    return efficiency(tally(records, scope));
}

std::map<int, double> tp_selection_ratio(std::span<const RunRecord> records) {
    std::map<int, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& r : records) {
        if (!r.acked) continue;
        ++counts[r.power_dbm];
        ++total;
    }
    std::map<int, double> out;
    for (const auto& [level, n] : counts) {
        out[level] = static_cast<double>(n) / static_cast<double>(total);
    }
    return out;
}

MetricsSummary summarize(std::span<const RunRecord> records, std::string config_hash) {
    MetricsSummary s;
    s.config_hash = std::move(config_hash);
    const Tally all = tally(records, Scope::global());
    s.attempts = all.attempts;
    s.successes = all.successes;
    s.success_rate = success_rate(records);
    s.energy_efficiency_total = efficiency(all);
    s.tp_ratio = tp_selection_ratio(records);

    std::map<std::size_t, Tally> by_device;
    std::map<std::size_t, Tally> by_arm;
    for (const auto& r : records) {
        for (auto* t : {&by_device[r.device], &by_arm[r.arm_index]}) {
            ++t->attempts;
            if (r.acked) ++t->successes;
            t->energy += r.e_active;
        }
    }
    if (!by_device.empty()) {
        double sum = 0.0;
        for (const auto& [dev, t] : by_device) sum += *efficiency(t);
        s.energy_efficiency = sum / static_cast<double>(by_device.size());
    }
    for (const auto& [arm, t] : by_arm) {
        ArmMetrics m;
        m.selections = t.attempts;
        m.successes = t.successes;
        m.success_rate = static_cast<double>(t.successes) / static_cast<double>(t.attempts);
        m.energy_efficiency = m.success_rate / (t.energy / static_cast<double>(t.attempts));
        s.per_arm[arm] = m;
    }
    return s;
}

namespace {

std::optional<double> mean_of(std::span<const MetricsSummary> runs,
                              std::optional<double> MetricsSummary::*field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : runs) {
        if (const auto& v = r.*field) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace

MetricsSummary aggregate_runs(std::span<const MetricsSummary> summaries) {
    if (summaries.empty()) throw ConfigError("aggregate_runs needs at least one summary");
    for (const auto& s : summaries) {
        if (s.config_hash != summaries.front().config_hash) {
            throw ConfigError("refusing to aggregate runs from different configs (" +
                              summaries.front().config_hash + " vs " + s.config_hash + ")");
        }
    }
    const double n = static_cast<double>(summaries.size());
    MetricsSummary out;
    out.config_hash = summaries.front().config_hash;
    out.success_rate = mean_of(summaries, &MetricsSummary::success_rate);
    out.energy_efficiency = mean_of(summaries, &MetricsSummary::energy_efficiency);
    out.energy_efficiency_total = mean_of(summaries, &MetricsSummary::energy_efficiency_total);

    std::uint64_t attempts = 0, successes = 0;
    std::set<int> levels;
    std::set<std::size_t> arms;
    for (const auto& s : summaries) {
        attempts += s.attempts;
        successes += s.successes;
        for (const auto& [level, f] : s.tp_ratio) levels.insert(level);
        for (const auto& [arm, m] : s.per_arm) arms.insert(arm);
    }
    // Counts are averaged too, rounded to the nearest integer.
    out.attempts = static_cast<std::uint64_t>(static_cast<double>(attempts) / n + 0.5);
    out.successes = static_cast<std::uint64_t>(static_cast<double>(successes) / n + 0.5);

    for (int level : levels) {
        double sum = 0.0;
        for (const auto& s : summaries) {
            if (auto it = s.tp_ratio.find(level); it != s.tp_ratio.end()) sum += it->second;
        }
        out.tp_ratio[level] = sum / n;
    }
    for (std::size_t arm : arms) {
        double sel = 0, suc = 0, x = 0, ee = 0;
        for (const auto& s : summaries) {
            if (auto it = s.per_arm.find(arm); it != s.per_arm.end()) {
                sel += static_cast<double>(it->second.selections);
                suc += static_cast<double>(it->second.successes);
                x += it->second.success_rate;
                ee += it->second.energy_efficiency;
            }
        }
        ArmMetrics m;
        m.selections = static_cast<std::uint64_t>(sel / n + 0.5);
        m.successes = static_cast<std::uint64_t>(suc / n + 0.5);
        m.success_rate = x / n;
        m.energy_efficiency = ee / n;
        out.per_arm[arm] = m;
    }
    return out;
}

}  // namespace lorasim
