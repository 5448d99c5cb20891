// lorasim: run sweeps, regenerate tables, validate configs.
//
//   lorasim run <config.json> [--out DIR] [--seed U64] [--parallel K] [--set key=value]...
//   lorasim tables <manifest.json>
//   lorasim validate <config.json>
//
// LORASIM_OUT_DIR and LORASIM_PARALLEL supply defaults for --out and --parallel.
// Exit codes: 0 success, 2 config error, 3 runtime error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lorasim/config.hpp"
#include "lorasim/error.hpp"
#include "lorasim/sweep.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

nlohmann::json read_config_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lorasim::ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    // Parse once through the validating loader for line-numbered errors.
    (void)lorasim::parse_config(text);
    return text.find_first_not_of(" \t\r\n") == std::string::npos ? nlohmann::json::object()
                                                                   : nlohmann::json::parse(text);
}

const char* env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed LoRa channel / transmit-power selection simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = env_or("LORASIM_OUT_DIR", "results");
    std::string manifest_path;
    std::uint64_t seed = 0;
    unsigned parallel = static_cast<unsigned>(std::strtoul(env_or("LORASIM_PARALLEL", "0"), nullptr, 10));
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "run a sweep and write records, summaries and tables");
    run->add_option("config", config_path, "config JSON")->required();
    run->add_option("--out", out_dir, "output directory (env LORASIM_OUT_DIR)");
    auto* seed_opt = run->add_option("--seed", seed, "override base_seed");
    run->add_option("--parallel", parallel, "worker threads, 0 = all cores (env LORASIM_PARALLEL)");
    run->add_option("--set", overrides, "override a top-level field, key=value (e.g. device_counts=[10])");

    auto* tables = app.add_subcommand("tables", "regenerate CSV tables from a manifest");
    tables->add_option("manifest", manifest_path, "manifest.json")->required();

    auto* check = app.add_subcommand("validate", "validate a config file");
    check->add_option("config", config_path, "config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (*check) {
            const auto cfg = lorasim::load_config(config_path);
            std::cout << "ok " << lorasim::config_hash(cfg) << "\n";
            return 0;
        }
        if (*run) {
            auto doc = read_config_document(config_path);
            for (const auto& o : overrides) lorasim::apply_override(doc, o);
            if (*seed_opt) doc["base_seed"] = seed;
            const auto cfg = lorasim::config_from_json(doc);
            const unsigned threads = parallel != 0 ? parallel : cfg.parallelism;
            const auto manifest = lorasim::run_sweep(cfg, out_dir, threads);
            std::cout << "runs " << manifest.runs.size() << "\n"
                      << "manifest " << (manifest.root / "manifest.json").string() << "\n"
                      << "manifest_hash " << lorasim::manifest_hash(manifest) << "\n";
            return 0;
        }
        if (*tables) {
            const auto manifest = lorasim::read_manifest(manifest_path);
            for (const auto& t : lorasim::emit_tables(manifest)) {
                std::cout << (manifest.root / t).string() << "\n";
            }
            return 0;
        }
    } catch (const lorasim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
