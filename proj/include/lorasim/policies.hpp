#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lorasim/params.hpp"
#include "lorasim/rng.hpp"

namespace lorasim {

// Running statistics for one (channel, power) arm.
struct ArmState {
    std::uint64_t pulls = 0;
    double reward_sum = 0.0;
    double reward_sq_sum = 0.0;
    std::uint64_t successes = 0;

    double mean() const { return pulls == 0 ? 0.0 : reward_sum / static_cast<double>(pulls); }
    // Population variance of the observed rewards, clamped at 0.
    double variance() const;
};

enum class Phase { initialization, learned };

struct PolicyDecision {
    std::size_t arm_index = 0;
    Phase phase = Phase::learned;
    // Number of arms sharing the maximal score and which of them (in ascending
    // arm order) the tie-break picked. tie_count == 1 means no draw was made.
    std::uint32_t tie_count = 1;
    std::uint32_t tie_pick = 0;
};

struct Feedback {
    std::size_t arm_index = 0;
    bool acked = false;
    double reward = 0.0;  // must be 0 when !acked
    double e_toa = 0.0;
};

// UCB1-tuned variance bound: sigma2 + sqrt(2 ln(plays) / pulls).
// Throws UndefinedArmError for pulls <= 0 and ContractError for plays < 1.
double ucb_variance(double sigma2, double pulls, double plays);
double ucb_variance(const ArmState& arm, std::uint64_t plays);

// Mean reward plus sqrt(ln(plays) / pulls * min(1/4, V)).
double ucb_score(double reward_sum, double sigma2, double pulls, double plays);
double ucb_score(const ArmState& arm, std::uint64_t plays);

/// Lowest-indexed unplayed arm while any remain (initialization pass), otherwise the
/// arm with the largest UCB score; exact ties are broken uniformly with `rng`.
PolicyDecision select_ucb(std::span<const ArmState> arms, std::uint64_t plays, Rng& rng);

/// With probability epsilon a uniform arm, else the arm with the best mean reward
/// (unplayed arms count as 0), ties broken uniformly. Always consumes one uniform01().
PolicyDecision select_epsilon_greedy(std::span<const ArmState> arms, double epsilon, Rng& rng);

/// Folds one observation into the arm. Throws ContractError on a negative reward or
/// a reward attached to a missing ACK.
ArmState update(ArmState arm, const Feedback& fb);

/// Channel receivable[device_index mod |receivable|] at the lowest power.
PolicyDecision select_fixed(std::size_t device_index, std::span<const Channel> receivable,
                            const ArmSpace& space);

// ADR-Lite binary search over its ordered parameter list.
// Success moves to the midpoint of [0, prev] (rounded down), failure to the
// midpoint of [prev, len - 1] (rounded up).
std::size_t adr_lite_next(std::size_t prev_index, bool acked, std::size_t list_len);

/// ADR-Lite parameter list: powers ascending; within one power, channels in
/// `channel_order` (worst first). Without an explicit order only the default channel
/// set is accepted, ordered as 920.6, 922.2, 921.0, 921.4, 921.8 MHz.
std::vector<ParamCombo> adr_lite_list(const ArmSpace& space,
                                      std::span<const Hertz> channel_order = {});

enum class PolicyKind { proposed_ucb_tuned, epsilon_greedy, adr_lite, fixed };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::proposed_ucb_tuned,
                                              PolicyKind::epsilon_greedy, PolicyKind::adr_lite,
                                              PolicyKind::fixed};

std::string_view to_string(PolicyKind kind);
PolicyKind policy_from_string(std::string_view name);

struct PolicyParams {
    double epsilon = 0.1;
    std::vector<Hertz> adr_channel_order;  // empty: default ordering
};

// Per-device selection policy. Every policy keeps per-arm statistics so that
// success counts can be cross-checked against the record log.
class Policy {
public:
    explicit Policy(std::size_t arm_count) : arms_(arm_count) {}
    virtual ~Policy() = default;

    Policy(const Policy&) = delete;
    Policy& operator=(const Policy&) = delete;

    virtual PolicyKind kind() const = 0;
    virtual PolicyDecision select(Rng& rng) = 0;

    void observe(const Feedback& fb);

    std::span<const ArmState> arms() const { return arms_; }
    std::uint64_t plays() const { return plays_; }

protected:
    virtual void on_feedback(const Feedback&) {}

private:
    std::vector<ArmState> arms_;
    std::uint64_t plays_ = 0;
};

std::unique_ptr<Policy> make_policy(PolicyKind kind, const ArmSpace& space,
                                    std::size_t device_index, const PolicyParams& params);

}  // namespace lorasim
