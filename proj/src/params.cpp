#include "lorasim/params.hpp"

#include <algorithm>
#include <string>

#include "lorasim/error.hpp"

namespace lorasim {

std::vector<Channel> default_channels() {
    return {
        {mhz_to_hz(920.6), false},
        {mhz_to_hz(921.0), true},
        {mhz_to_hz(921.4), true},
        {mhz_to_hz(921.8), true},
        {mhz_to_hz(922.2), false},
    };
}

std::vector<TxPower> default_powers() {
    return {{-3, 20.0}, {1, 25.0}, {5, 35.0}, {9, 55.0}, {13, 90.0}};
}

namespace {

std::vector<Channel> sorted_channels(std::span<const Channel> channels) {
    if (channels.empty()) throw ConfigError("channel list is empty");
    std::vector<Channel> out(channels.begin(), channels.end());
    std::sort(out.begin(), out.end(), [](const Channel& a, const Channel& b) {
        return a.center_frequency_hz < b.center_frequency_hz;
    });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].center_frequency_hz == out[i - 1].center_frequency_hz) {
            throw ConfigError("duplicate channel frequency " +
                              std::to_string(out[i].center_frequency_hz) + " Hz");
        }
    }
    return out;
}

std::vector<TxPower> sorted_powers(std::span<const TxPower> powers) {
    if (powers.empty()) throw ConfigError("transmit power list is empty");
    std::vector<TxPower> out(powers.begin(), powers.end());
    std::sort(out.begin(), out.end(),
              [](const TxPower& a, const TxPower& b) { return a.level_dbm < b.level_dbm; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].level_dbm == out[i - 1].level_dbm) {
            throw ConfigError("duplicate transmit power level " + std::to_string(out[i].level_dbm) +
                              " dBm");
        }
    }
    return out;
}

std::vector<ParamCombo> product(const std::vector<Channel>& channels,
                                const std::vector<TxPower>& powers) {
    std::vector<ParamCombo> combos;
    combos.reserve(channels.size() * powers.size());
    for (const auto& ch : channels) {
        for (const auto& p : powers) {
            combos.push_back({ch, p, combos.size()});
        }
    }
    return combos;
}

}  // namespace

std::vector<ParamCombo> build_arm_space(std::span<const Channel> channels,
                                        std::span<const TxPower> powers) {
    return product(sorted_channels(channels), sorted_powers(powers));
}

ArmSpace::ArmSpace(std::span<const Channel> channels, std::span<const TxPower> powers)
    : channels_(sorted_channels(channels)),
      powers_(sorted_powers(powers)),
      combos_(product(channels_, powers_)) {}

std::vector<Channel> ArmSpace::receivable_channels() const {
    std::vector<Channel> out;
    std::copy_if(channels_.begin(), channels_.end(), std::back_inserter(out),
                 [](const Channel& c) { return c.receivable; });
    return out;
}

std::optional<std::size_t> ArmSpace::find(Hertz frequency_hz, int level_dbm) const {
    for (const auto& c : combos_) {
        if (c.channel.center_frequency_hz == frequency_hz && c.power.level_dbm == level_dbm) {
            return c.arm_index;
        }
    }
    return std::nullopt;
}

}  // namespace lorasim
