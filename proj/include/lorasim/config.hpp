#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lorasim/energy.hpp"
#include "lorasim/netsim.hpp"
#include "lorasim/params.hpp"
#include "lorasim/policies.hpp"

namespace lorasim {

// Everything a sweep needs. Defaults reproduce the reference experiment settings.
struct ExperimentConfig {
    std::vector<PolicyKind> policies{std::begin(kAllPolicies), std::end(kAllPolicies)};
    std::vector<std::size_t> device_counts{10, 15, 20, 25, 30};
    std::size_t runs_per_point = 5;
    std::uint32_t attempts = 200;  // "T" in the config file
    double interval_s = 10.0;
    double cs_duration_s = 0.005;
    std::vector<Channel> channels = default_channels();
    std::vector<TxPower> powers = default_powers();
    EnergyModel energy = default_energy_model();
    RadioConfig radio;
    int payload_min = 36;
    int payload_max = 44;
    double epsilon = 0.1;
    RewardMode reward_mode = RewardMode::normalized;
    bool epsilon_ack_reward = false;  // "epsilon_reward": "energy" | "ack"
    std::vector<Hertz> adr_channel_order;  // empty: built-in order for the default channels
    std::uint64_t base_seed = 1;
    unsigned parallelism = 0;  // 0: hardware concurrency

    SimConfig sim_config(PolicyKind policy, std::size_t devices) const;
};

/// Parses and validates a JSON config document; omitted fields take defaults.
/// Throws ConfigError with the line or field at fault.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets a top-level field ("T=100", "epsilon=0.2", "device_counts=[10]") on a raw config document.
void apply_override(nlohmann::json& doc, std::string_view assignment);
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Cross-field checks; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// Normalized document: every field present, stable key order.
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

/// FNV-1a 64 over the normalized document (parallelism excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace lorasim
