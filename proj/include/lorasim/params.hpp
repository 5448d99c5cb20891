#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lorasim {

using Hertz = std::int64_t;

struct Channel {
    Hertz center_frequency_hz = 0;
    bool receivable = false;

    friend bool operator==(const Channel&, const Channel&) = default;
};

struct TxPower {
    int level_dbm = 0;
    double draw_mw = 0.0;  // P_ToA drawn while transmitting at this level

    friend bool operator==(const TxPower&, const TxPower&) = default;
};

// One bandit arm.
struct ParamCombo {
    Channel channel;
    TxPower power;
    std::size_t arm_index = 0;
};

constexpr Hertz mhz_to_hz(double mhz) { return static_cast<Hertz>(mhz * 1e6 + (mhz >= 0 ? 0.5 : -0.5)); }

/// 920.6 .. 922.2 MHz in 400 kHz steps; the gateway listens on the middle three.
std::vector<Channel> default_channels();

/// -3, 1, 5, 9, 13 dBm with placeholder transceiver draws (20, 25, 35, 55, 90 mW).
/// The draw values are not measured data; override them from config for real hardware.
std::vector<TxPower> default_powers();

/// Cartesian product of channels and powers, channel-major with channels sorted by
/// frequency and powers by ascending level. arm_index follows that order.
/// Throws ConfigError on empty inputs or duplicate frequencies / levels.
std::vector<ParamCombo> build_arm_space(std::span<const Channel> channels,
                                        std::span<const TxPower> powers);

// Immutable view over an arm space with lookups in both directions.
class ArmSpace {
public:
    ArmSpace(std::span<const Channel> channels, std::span<const TxPower> powers);

    std::size_t size() const { return combos_.size(); }
    const ParamCombo& operator[](std::size_t arm_index) const { return combos_.at(arm_index); }
    std::span<const ParamCombo> combos() const { return combos_; }

    // Sorted by frequency / ascending level.
    std::span<const Channel> channels() const { return channels_; }
    std::span<const TxPower> powers() const { return powers_; }
    std::vector<Channel> receivable_channels() const;
    const TxPower& min_power() const { return powers_.front(); }

    std::optional<std::size_t> find(Hertz frequency_hz, int level_dbm) const;

private:
    std::vector<Channel> channels_;
    std::vector<TxPower> powers_;
    std::vector<ParamCombo> combos_;
};

}  // namespace lorasim
