#include "lorasim/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "lorasim/error.hpp"
#include "lorasim/rng.hpp"

namespace lorasim {

void EventQueue::push(Micros time, EventKind kind, std::size_t device) {
    heap_.push({time, kind, device, next_seq_++});
}

SimEvent EventQueue::pop() {
    SimEvent e = heap_.top();
    heap_.pop();
    return e;
}

void ChannelOccupancy::begin(std::size_t channel, Transmission tx) {
    auto& list = in_flight_.at(channel);
    for (auto& other : list) {
        if (overlaps(other, tx)) {
            other.collided = true;
            tx.collided = true;
        }
    }
    list.push_back(tx);
}

Transmission ChannelOccupancy::end(std::size_t channel, std::size_t device) {
    auto& list = in_flight_.at(channel);
    const auto it = std::find_if(list.begin(), list.end(),
                                 [device](const Transmission& t) { return t.device == device; });
    if (it == list.end()) throw ContractError("no in-flight transmission for device");
    Transmission tx = *it;
    list.erase(it);
    return tx;
}

std::size_t ChannelOccupancy::total_in_flight() const {
    std::size_t n = 0;
    for (const auto& l : in_flight_) n += l.size();
    return n;
}

bool carrier_sense(const ChannelOccupancy& occupancy, std::size_t channel, Micros t,
                   Micros cs_duration) {
    if (cs_duration < 0) throw ContractError("carrier sense duration must be >= 0");
    const auto list = occupancy.in_flight(channel);
    return std::any_of(list.begin(), list.end(), [&](const Transmission& tx) {
        return tx.t_start <= t + cs_duration && tx.t_end > t;
    });
}

Cause resolve_reception(const ChannelOccupancy& occupancy, std::size_t channel,
                        const Transmission& tx) {
    if (!occupancy.channel(channel).receivable) return Cause::ChannelNotReceivable;
    if (tx.collided) return Cause::Collision;
    for (const auto& other : occupancy.in_flight(channel)) {
        if (other.device != tx.device && overlaps(other, tx)) return Cause::Collision;
    }
    return Cause::Success;
}

std::vector<Micros> schedule_attempts(Micros offset, Micros interval, std::uint32_t attempts) {
    if (interval <= 0) throw ContractError("transmission interval must be > 0");
    std::vector<Micros> wakes(attempts);
    for (std::uint32_t i = 0; i < attempts; ++i) wakes[i] = offset + interval * i;
    return wakes;
}

int payload_symbols(const SimConfig& cfg, std::size_t device_index) {
    const auto span = static_cast<std::size_t>(cfg.payload_max - cfg.payload_min + 1);
    return cfg.payload_min + static_cast<int>(device_index % span);
}

void validate(const SimConfig& cfg) {
    const ArmSpace space(cfg.channels, cfg.powers);
    if (space.receivable_channels().empty()) throw ConfigError("no receivable channel configured");
    cfg.energy.validate();
    cfg.energy.require_levels(cfg.powers);
    for (const auto& p : cfg.powers) {
        if (cfg.energy.p_toa_by_level.at(p.level_dbm) != p.draw_mw) {
            throw ConfigError("power draw for " + std::to_string(p.level_dbm) +
                              " dBm disagrees with the energy table");
        }
    }
    for (std::size_t i = 1; i < space.powers().size(); ++i) {
        if (!(space.powers()[i].draw_mw > space.powers()[i - 1].draw_mw)) {
            throw ConfigError("transmit power draws must increase strictly with level");
        }
    }
    if (cfg.devices == 0) throw ConfigError("device count must be >= 1");
    if (cfg.attempts == 0) throw ConfigError("attempts per device must be >= 1");
    if (!(cfg.interval_s > 0.0)) throw ConfigError("interval_s must be > 0");
    if (!(cfg.cs_duration_s >= 0.0)) throw ConfigError("cs_duration_s must be >= 0");
    if (cfg.radio.sf < 0 || cfg.radio.sf > 30) throw ConfigError("radio.sf out of range");
    if (!(cfg.radio.bw_hz > 0.0)) throw ConfigError("radio.bw_hz must be > 0");
    if (cfg.radio.n_preamble < 0) throw ConfigError("radio.n_preamble must be >= 0");
    if (cfg.payload_min < 0 || cfg.payload_max < cfg.payload_min) {
        throw ConfigError("payload range must satisfy 0 <= payload_min <= payload_max");
    }
    if (!(cfg.policy_params.epsilon >= 0.0 && cfg.policy_params.epsilon <= 1.0)) {
        throw ConfigError("epsilon must lie in [0, 1]");
    }
    if (!cfg.start_offsets_s.empty()) {
        if (cfg.start_offsets_s.size() != cfg.devices) {
            throw ConfigError("start_offsets_s must give one offset per device");
        }
        for (double o : cfg.start_offsets_s) {
            if (!(o >= 0.0 && o < cfg.interval_s)) throw ConfigError("start offset outside [0, interval)");
        }
    }
    if (cfg.policy == PolicyKind::adr_lite) adr_lite_list(space, cfg.policy_params.adr_channel_order);

    RadioConfig longest = cfg.radio;
    longest.n_payload = cfg.payload_max;
    const Micros busy = seconds_to_micros(cfg.cs_duration_s) +
                        seconds_to_micros(time_on_air(longest).t_toa);
    if (busy >= seconds_to_micros(cfg.interval_s)) {
        throw ConfigError("interval_s must exceed carrier sense time plus the longest airtime");
    }
}

namespace {

struct Device {
    std::unique_ptr<Policy> policy;
    Rng rng;
    int n_payload = 0;
    std::vector<AttemptEnergy> energy_by_power;  // indexed like ArmSpace::powers()
    double e_toa_min = 0.0;
    Micros airtime = 0;
    std::size_t attempts_done = 0;
    // Attempt in progress.
    PolicyDecision decision;
    Micros wake = 0;
    std::optional<Cause> outcome;
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          seed_(seed),
          space_(cfg.channels, cfg.powers),
          occupancy_(space_.channels()),
          interval_(seconds_to_micros(cfg.interval_s)),
          cs_(seconds_to_micros(cfg.cs_duration_s)),
          aborted_(aborted_attempt_energy(cfg.energy)),
          ack_only_reward_(cfg.epsilon_ack_reward && cfg.policy == PolicyKind::epsilon_greedy) {}

    SimResult run() {
        SimResult result;
        devices_.reserve(cfg_.devices);
        for (std::size_t i = 0; i < cfg_.devices; ++i) {
            Device d{make_policy(cfg_.policy, space_, i, cfg_.policy_params),
                     Rng(derive_seed(seed_, {i})), 0, {}, 0.0, 0, 0, {}, 0, std::nullopt};
            d.n_payload = payload_symbols(cfg_, i);
            RadioConfig radio = cfg_.radio;
            radio.n_payload = d.n_payload;
            for (const auto& p : space_.powers()) {
                d.energy_by_power.push_back(attempt_energy(radio, cfg_.energy, p.level_dbm));
            }
            d.e_toa_min = d.energy_by_power.front().e_toa;
            d.airtime = seconds_to_micros(d.energy_by_power.front().t_toa);
            // Drawn even when overridden so the policy's stream does not shift.
            auto offset = static_cast<Micros>(d.rng.uniform_index(
                static_cast<std::uint64_t>(interval_)));
            if (!cfg_.start_offsets_s.empty()) offset = seconds_to_micros(cfg_.start_offsets_s[i]);
            result.start_offsets.push_back(offset);
            queue_.push(offset, EventKind::DeviceWake, i);
            devices_.push_back(std::move(d));
        }

        while (!queue_.empty()) {
            const SimEvent ev = queue_.pop();
            ++stats_.events;
            switch (ev.kind) {
                case EventKind::DeviceWake: on_wake(ev); break;
                case EventKind::TxStart: on_tx_start(ev); break;
                case EventKind::TxEnd: on_tx_end(ev); break;
                case EventKind::AckDeliver: on_ack(ev); break;
            }
            const std::size_t in_flight = occupancy_.total_in_flight();
            if (in_flight != stats_.tx_starts - stats_.tx_ends) {
                throw ContractError("occupancy out of step with TxStart/TxEnd events");
            }
            stats_.max_in_flight = std::max(stats_.max_in_flight, in_flight);
        }

        std::stable_sort(records_.begin(), records_.end(), [](const RunRecord& a, const RunRecord& b) {
            return a.device != b.device ? a.device < b.device : a.attempt < b.attempt;
        });
        result.records = std::move(records_);
        for (const auto& d : devices_) {
            result.final_arms.emplace_back(d.policy->arms().begin(), d.policy->arms().end());
        }
        result.stats = stats_;
        return result;
    }

private:
    std::size_t channel_of(std::size_t arm) const { return arm / space_.powers().size(); }
    std::size_t power_of(std::size_t arm) const { return arm % space_.powers().size(); }

    void on_wake(const SimEvent& ev) {
        Device& d = devices_[ev.device];
        d.decision = d.policy->select(d.rng);
        d.wake = ev.time;
        d.outcome.reset();
        if (d.attempts_done + 1 < cfg_.attempts) {
            queue_.push(ev.time + interval_, EventKind::DeviceWake, ev.device);
        }
        if (carrier_sense(occupancy_, channel_of(d.decision.arm_index), ev.time, cs_)) {
            finish(ev.device, Cause::CarrierBusy);
            return;
        }
        queue_.push(ev.time + cs_, EventKind::TxStart, ev.device);
    }

    void on_tx_start(const SimEvent& ev) {
        Device& d = devices_[ev.device];
        const ParamCombo& arm = space_[d.decision.arm_index];
        occupancy_.begin(channel_of(arm.arm_index),
                         {ev.device, ev.time, ev.time + d.airtime, arm.power.level_dbm, false});
        ++stats_.tx_starts;
        queue_.push(ev.time + d.airtime, EventKind::TxEnd, ev.device);
    }

    void on_tx_end(const SimEvent& ev) {
        Device& d = devices_[ev.device];
        const std::size_t ch = channel_of(d.decision.arm_index);
        const auto flights = occupancy_.in_flight(ch);
        const auto it = std::find_if(flights.begin(), flights.end(), [&](const Transmission& t) {
            return t.device == ev.device;
        });
        if (it == flights.end()) throw ContractError("TxEnd without matching TxStart");
        d.outcome = resolve_reception(occupancy_, ch, *it);
        occupancy_.end(ch, ev.device);
        ++stats_.tx_ends;
        queue_.push(ev.time, EventKind::AckDeliver, ev.device);
    }

    void on_ack(const SimEvent& ev) { finish(ev.device, *devices_[ev.device].outcome); }

    void finish(std::size_t device, Cause cause) {
        Device& d = devices_[device];
        const ParamCombo& arm = space_[d.decision.arm_index];
        const AttemptEnergy& energy =
            cause == Cause::CarrierBusy ? aborted_ : d.energy_by_power[power_of(arm.arm_index)];
        const bool acked = cause == Cause::Success;
        double reward = 0.0;
        if (acked) {
            reward = ack_only_reward_ ? 1.0 : reward_basis(energy, cfg_.reward_mode, d.e_toa_min);
        }
        d.policy->observe({arm.arm_index, acked, reward, energy.e_toa});

        RunRecord r;
        r.run_seed = seed_;
        r.device = device;
        r.attempt = d.attempts_done;
        r.arm_index = arm.arm_index;
        r.channel_hz = arm.channel.center_frequency_hz;
        r.power_dbm = arm.power.level_dbm;
        r.cause = cause;
        r.acked = acked;
        r.reward = reward;
        r.e_toa = energy.e_toa;
        r.e_active = energy.e_active;
        r.wake_time = micros_to_seconds(d.wake);
        r.phase = d.decision.phase;
        r.tie_count = d.decision.tie_count;
        r.tie_pick = d.decision.tie_pick;
        records_.push_back(r);
        ++d.attempts_done;
    }

    const SimConfig& cfg_;
    std::uint64_t seed_;
    ArmSpace space_;
    ChannelOccupancy occupancy_;
    Micros interval_;
    Micros cs_;
    AttemptEnergy aborted_;
    bool ack_only_reward_;
    EventQueue queue_;
    std::vector<Device> devices_;
    std::vector<RunRecord> records_;
    SimStats stats_;
};

}  // namespace

SimResult run_simulation(const SimConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    return Simulation(cfg, seed).run();
}

}  // namespace lorasim
