#include "lorasim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lorasim/error.hpp"

namespace lorasim {

double ArmState::variance() const {
    if (pulls == 0) return 0.0;
    const double n = static_cast<double>(pulls);
    const double m = reward_sum / n;
    return std::max(0.0, reward_sq_sum / n - m * m);
}

double ucb_variance(double sigma2, double pulls, double plays) {
    if (!(pulls > 0.0)) throw UndefinedArmError("UCB variance of an unplayed arm");
    if (!(plays >= 1.0)) throw ContractError("UCB variance needs at least one play");
    return sigma2 + std::sqrt(2.0 * std::log(plays) / pulls);
}

double ucb_variance(const ArmState& arm, std::uint64_t plays) {
    return ucb_variance(arm.variance(), static_cast<double>(arm.pulls), static_cast<double>(plays));
}

double ucb_score(double reward_sum, double sigma2, double pulls, double plays) {
    const double v = ucb_variance(sigma2, pulls, plays);
    const double bonus = std::sqrt(std::log(plays) / pulls * std::min(0.25, v));
    return reward_sum / pulls + bonus;
}

double ucb_score(const ArmState& arm, std::uint64_t plays) {
    return ucb_score(arm.reward_sum, arm.variance(), static_cast<double>(arm.pulls),
                     static_cast<double>(plays));
}

namespace {

PolicyDecision argmax_with_ties(std::span<const double> values, Rng& rng) {
    const double best = *std::max_element(values.begin(), values.end());
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == best) tied.push_back(i);
    }
    PolicyDecision d;
    d.tie_count = static_cast<std::uint32_t>(tied.size());
    if (tied.size() > 1) d.tie_pick = static_cast<std::uint32_t>(rng.uniform_index(tied.size()));
    d.arm_index = tied[d.tie_pick];
    return d;
}

}  // namespace

PolicyDecision select_ucb(std::span<const ArmState> arms, std::uint64_t plays, Rng& rng) {
    if (arms.empty()) throw ContractError("select_ucb: empty arm list");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (arms[i].pulls == 0) return {i, Phase::initialization, 1, 0};
    }
    std::vector<double> scores(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) scores[i] = ucb_score(arms[i], plays);
    return argmax_with_ties(scores, rng);
}

PolicyDecision select_epsilon_greedy(std::span<const ArmState> arms, double epsilon, Rng& rng) {
    if (arms.empty()) throw ContractError("select_epsilon_greedy: empty arm list");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ContractError("epsilon must lie in [0, 1]");
    if (rng.uniform01() < epsilon) {
        return {static_cast<std::size_t>(rng.uniform_index(arms.size())), Phase::learned, 1, 0};
    }
    std::vector<double> means(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) means[i] = arms[i].mean();
    return argmax_with_ties(means, rng);
}

ArmState update(ArmState arm, const Feedback& fb) {
    if (fb.reward < 0.0 || std::isnan(fb.reward)) {
        throw ContractError("feedback reward must be non-negative");
    }
    if (!fb.acked && fb.reward != 0.0) throw ContractError("unacknowledged attempt with reward");
    arm.pulls += 1;
    arm.reward_sum += fb.reward;
    arm.reward_sq_sum += fb.reward * fb.reward;
    if (fb.acked) arm.successes += 1;
    return arm;
}

PolicyDecision select_fixed(std::size_t device_index, std::span<const Channel> receivable,
                            const ArmSpace& space) {
    if (receivable.empty()) throw ConfigError("fixed allocation needs a receivable channel");
    std::vector<Channel> sorted(receivable.begin(), receivable.end());
    std::sort(sorted.begin(), sorted.end(), [](const Channel& a, const Channel& b) {
        return a.center_frequency_hz < b.center_frequency_hz;
    });
    const Channel& ch = sorted[device_index % sorted.size()];
    const auto arm = space.find(ch.center_frequency_hz, space.min_power().level_dbm);
    if (!arm) throw ConfigError("fixed allocation channel is not in the arm space");
    return {*arm, Phase::learned, 1, 0};
}

std::size_t adr_lite_next(std::size_t prev_index, bool acked, std::size_t list_len) {
    if (list_len == 0 || prev_index >= list_len) {
        throw ContractError("adr_lite_next: index outside the parameter list");
    }
    if (acked) return prev_index / 2;
    return (list_len - 1 + prev_index + 1) / 2;
}

std::vector<ParamCombo> adr_lite_list(const ArmSpace& space, std::span<const Hertz> channel_order) {
    std::vector<Hertz> order(channel_order.begin(), channel_order.end());
    if (order.empty()) {
        std::vector<Channel> defaults = default_channels();
        std::sort(defaults.begin(), defaults.end(), [](const Channel& a, const Channel& b) {
            return a.center_frequency_hz < b.center_frequency_hz;
        });
        const auto chans = space.channels();
        if (!std::equal(chans.begin(), chans.end(), defaults.begin(), defaults.end())) {
            throw ConfigError("ADR-Lite needs an explicit adr_channel_order for non-default channels");
        }
        order = {mhz_to_hz(920.6), mhz_to_hz(922.2), mhz_to_hz(921.0), mhz_to_hz(921.4),
                 mhz_to_hz(921.8)};
    }
    if (order.size() != space.channels().size()) {
        throw ConfigError("adr_channel_order must list every selectable channel exactly once");
    }
    std::vector<ParamCombo> list;
    list.reserve(space.size());
    for (const auto& p : space.powers()) {
        for (Hertz f : order) {
            const auto arm = space.find(f, p.level_dbm);
            if (!arm) {
                throw ConfigError("adr_channel_order names unknown channel " + std::to_string(f) +
                                  " Hz");
            }
            list.push_back(space[*arm]);
        }
    }
    std::vector<std::size_t> seen;
    for (const auto& c : list) seen.push_back(c.arm_index);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
        throw ConfigError("adr_channel_order lists a channel twice");
    }
    return list;
}

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::proposed_ucb_tuned: return "proposed_ucb_tuned";
        case PolicyKind::epsilon_greedy: return "epsilon_greedy";
        case PolicyKind::adr_lite: return "adr_lite";
        case PolicyKind::fixed: return "fixed";
    }
    return "unknown";
}

PolicyKind policy_from_string(std::string_view name) {
    for (auto k : kAllPolicies) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown policy '" + std::string(name) + "'");
}

void Policy::observe(const Feedback& fb) {
    if (fb.arm_index >= arms_.size()) throw ContractError("feedback for unknown arm");
    arms_[fb.arm_index] = update(arms_[fb.arm_index], fb);
    ++plays_;
    on_feedback(fb);
}

namespace {

class UcbTunedPolicy final : public Policy {
public:
    using Policy::Policy;
    PolicyKind kind() const override { return PolicyKind::proposed_ucb_tuned; }
    PolicyDecision select(Rng& rng) override { return select_ucb(arms(), plays(), rng); }
};

class EpsilonGreedyPolicy final : public Policy {
public:
    EpsilonGreedyPolicy(std::size_t arm_count, double epsilon)
        : Policy(arm_count), epsilon_(epsilon) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    }
    PolicyKind kind() const override { return PolicyKind::epsilon_greedy; }
    PolicyDecision select(Rng& rng) override {
        return select_epsilon_greedy(arms(), epsilon_, rng);
    }

private:
    double epsilon_;
};

class FixedPolicy final : public Policy {
public:
    FixedPolicy(const ArmSpace& space, std::size_t device_index)
        : Policy(space.size()),
          decision_(select_fixed(device_index, space.receivable_channels(), space)) {}
    PolicyKind kind() const override { return PolicyKind::fixed; }
    PolicyDecision select(Rng&) override { return decision_; }

private:
    PolicyDecision decision_;
};

class AdrLitePolicy final : public Policy {
public:
    AdrLitePolicy(const ArmSpace& space, std::span<const Hertz> channel_order)
        : Policy(space.size()) {
        for (const auto& c : adr_lite_list(space, channel_order)) list_.push_back(c.arm_index);
        position_ = list_.size() - 1;
    }
    PolicyKind kind() const override { return PolicyKind::adr_lite; }
    PolicyDecision select(Rng&) override { return {list_[position_], Phase::learned, 1, 0}; }

protected:
    void on_feedback(const Feedback& fb) override {
        position_ = adr_lite_next(position_, fb.acked, list_.size());
    }

private:
    std::vector<std::size_t> list_;
    std::size_t position_ = 0;
};

}  // namespace

std::unique_ptr<Policy> make_policy(PolicyKind kind, const ArmSpace& space,
                                    std::size_t device_index, const PolicyParams& params) {
    switch (kind) {
        case PolicyKind::proposed_ucb_tuned: return std::make_unique<UcbTunedPolicy>(space.size());
        case PolicyKind::epsilon_greedy:
            return std::make_unique<EpsilonGreedyPolicy>(space.size(), params.epsilon);
        case PolicyKind::adr_lite:
            return std::make_unique<AdrLitePolicy>(space, params.adr_channel_order);
        case PolicyKind::fixed: return std::make_unique<FixedPolicy>(space, device_index);
    }
    throw ConfigError("unknown policy kind");
}

}  // namespace lorasim
