#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lorasim/config.hpp"
#include "lorasim/metrics.hpp"

namespace lorasim {

inline constexpr const char* kToolVersion = "lorasim 0.1.0";

// Unrecoverable failure while running a sweep or emitting tables.
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-run seed: base_seed folded with the policy's stable id, the device count
/// and the run ordinal, so extending any sweep axis leaves existing runs untouched.
std::uint64_t run_seed(std::uint64_t base_seed, PolicyKind policy, std::size_t devices,
                       std::size_t run);

/// Hash identifying one sweep point; per-run summaries carry it.
std::string point_hash(const std::string& config_hash, PolicyKind policy, std::size_t devices);

struct RunEntry {
    PolicyKind policy = PolicyKind::proposed_ucb_tuned;
    std::size_t devices = 0;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    std::string records;       // relative to the manifest directory
    std::string summary;       // relative to the manifest directory
    std::string records_hash;  // FNV-1a 64 of the record file bytes
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string config_hash;
    std::uint64_t base_seed = 0;
    ExperimentConfig config;
    std::vector<RunEntry> runs;
    std::vector<std::string> tables;
    std::filesystem::path root;  // directory holding manifest.json, not serialized
};

nlohmann::ordered_json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j, std::filesystem::path root);
RunManifest read_manifest(const std::filesystem::path& manifest_path);
/// FNV-1a 64 of the serialized manifest.
std::string manifest_hash(const RunManifest& m);

nlohmann::ordered_json to_json(const MetricsSummary& s);
MetricsSummary summary_from_json(const nlohmann::json& j);

/// Runs every (policy, N, run) point into `out_dir` (records/, summaries/, tables/,
/// config.json, manifest.json) on up to `parallelism` threads (0: hardware).
/// Failed I/O removes what this call wrote; a failing run is named in the error.
RunManifest run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                      unsigned parallelism = 0);

struct PointTable {
    PolicyKind policy = PolicyKind::proposed_ucb_tuned;
    std::size_t devices = 0;
    MetricsSummary mean;
    std::vector<MetricsSummary> runs;
};

/// Reads every run summary named by the manifest and aggregates per point, in
/// manifest order. Throws RuntimeError naming the first missing run.
std::vector<PointTable> load_points(const RunManifest& m);

/// Writes success_rate.csv, energy_efficiency.csv, energy_efficiency_total.csv,
/// tp_ratio.csv and the *_wide.csv variants under <root>/tables. Returns the
/// written paths relative to the manifest directory.
std::vector<std::string> emit_tables(const RunManifest& m);

// Minimal CSV reader for the emitted tables (no quoting is ever emitted).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

}  // namespace lorasim
