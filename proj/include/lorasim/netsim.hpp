#pragma once

#include <cstddef>
#include <cstdint>
#include <queue>
#include <span>
#include <vector>

#include "lorasim/energy.hpp"
#include "lorasim/params.hpp"
#include "lorasim/policies.hpp"
#include "lorasim/record.hpp"

namespace lorasim {

// Simulation clock, integer microseconds.
using Micros = std::int64_t;

constexpr Micros seconds_to_micros(double s) { return static_cast<Micros>(s * 1e6 + 0.5); }
constexpr double micros_to_seconds(Micros us) { return static_cast<double>(us) / 1e6; }

enum class EventKind { DeviceWake, TxStart, TxEnd, AckDeliver };

struct SimEvent {
    Micros time = 0;
    EventKind kind = EventKind::DeviceWake;
    std::size_t device = 0;
    std::uint64_t seq = 0;
};

// Min-queue on (time, seq); seq is assigned on push so equal times pop in FIFO order.
class EventQueue {
public:
    void push(Micros time, EventKind kind, std::size_t device);
    SimEvent pop();
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

struct Transmission {
    std::size_t device = 0;
    Micros t_start = 0;
    Micros t_end = 0;  // exclusive
    int power_dbm = 0;
    bool collided = false;
};

// Half-open interval overlap.
constexpr bool overlaps(const Transmission& a, const Transmission& b) {
    return a.t_start < b.t_end && b.t_start < a.t_end;
}

// In-flight transmissions per channel (indexed like ArmSpace::channels()).
class ChannelOccupancy {
public:
    explicit ChannelOccupancy(std::span<const Channel> channels)
        : channels_(channels.begin(), channels.end()), in_flight_(channels.size()) {}

    // Adds `tx`, marking it and every overlapping in-flight transmission as collided.
    void begin(std::size_t channel, Transmission tx);
    // Removes and returns the device's transmission.
    Transmission end(std::size_t channel, std::size_t device);

    std::span<const Transmission> in_flight(std::size_t channel) const {
        return in_flight_.at(channel);
    }
    const Channel& channel(std::size_t index) const { return channels_.at(index); }
    std::size_t channel_count() const { return channels_.size(); }
    std::size_t total_in_flight() const;

private:
    std::vector<Channel> channels_;
    std::vector<std::vector<Transmission>> in_flight_;
};

/// Busy iff an in-flight transmission on the channel overlaps [t, t + cs_duration].
/// A transmission ending exactly at t does not count.
bool carrier_sense(const ChannelOccupancy& occupancy, std::size_t channel, Micros t,
                   Micros cs_duration);

/// Outcome of a finished transmission still present in `occupancy`:
/// ChannelNotReceivable, then Collision if anything else overlapped it, else Success.
Cause resolve_reception(const ChannelOccupancy& occupancy, std::size_t channel,
                        const Transmission& tx);

/// offset + i * interval for i in [0, attempts).
std::vector<Micros> schedule_attempts(Micros offset, Micros interval, std::uint32_t attempts);

struct SimConfig {
    PolicyKind policy = PolicyKind::proposed_ucb_tuned;
    std::size_t devices = 10;
    std::uint32_t attempts = 200;
    double interval_s = 10.0;
    double cs_duration_s = 0.005;
    std::vector<Channel> channels = default_channels();
    std::vector<TxPower> powers = default_powers();
    RadioConfig radio;       // n_payload is replaced per device
    int payload_min = 36;    // device i sends payload_min + i mod (payload_max - payload_min + 1)
    int payload_max = 44;
    EnergyModel energy = default_energy_model();
    RewardMode reward_mode = RewardMode::normalized;
    // epsilon-greedy only: pay 1 per ACK instead of the energy-shaped reward.
    bool epsilon_ack_reward = false;
    PolicyParams policy_params;
    // Per-device start offsets in seconds; empty means drawn from each device's stream.
    std::vector<double> start_offsets_s;
};

/// Throws ConfigError on any inconsistency (missing energy rows, no receivable
/// channel, interval too short for sense + airtime, ...).
void validate(const SimConfig& cfg);

int payload_symbols(const SimConfig& cfg, std::size_t device_index);

struct SimStats {
    std::uint64_t events = 0;
    std::uint64_t tx_starts = 0;
    std::uint64_t tx_ends = 0;
    std::size_t max_in_flight = 0;
};

struct SimResult {
    std::vector<RunRecord> records;         // sorted by (device, attempt)
    std::vector<Micros> start_offsets;      // per device
    std::vector<std::vector<ArmState>> final_arms;  // per device, policy-internal counters
    SimStats stats;
};

/// Runs every device's attempts. Bit-identical output for identical (cfg, seed).
SimResult run_simulation(const SimConfig& cfg, std::uint64_t seed);

}  // namespace lorasim
