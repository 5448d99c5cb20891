#include "lorasim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lorasim/error.hpp"
#include "lorasim/netsim.hpp"
#include "lorasim/record.hpp"

namespace fs = std::filesystem;

namespace lorasim {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t run_seed(std::uint64_t base_seed, PolicyKind policy, std::size_t devices,
                       std::size_t run) {
    return derive_seed(base_seed, {static_cast<std::uint64_t>(policy) + 1,
                                   static_cast<std::uint64_t>(devices),
                                   static_cast<std::uint64_t>(run)});
}

std::string point_hash(const std::string& config_hash, PolicyKind policy, std::size_t devices) {
    return hex64(fnv1a64(config_hash + "|" + std::string(to_string(policy)) + "|" +
                         std::to_string(devices)));
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v) : "null";
}

namespace {

ordered_json optional_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw RuntimeError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write " + p.string());
    out << bytes;
    out.close();
    if (!out) throw RuntimeError("write failed for " + p.string());
}

std::string run_stem(const RunEntry& e) {
    return std::string(to_string(e.policy)) + "_N" + std::to_string(e.devices) + "_run" +
           std::to_string(e.run);
}

}  // namespace

ordered_json to_json(const MetricsSummary& s) {
    ordered_json j;
    j["config_hash"] = s.config_hash;
    j["attempts"] = s.attempts;
    j["successes"] = s.successes;
    j["success_rate"] = optional_json(s.success_rate);
    j["energy_efficiency"] = optional_json(s.energy_efficiency);
    j["energy_efficiency_total"] = optional_json(s.energy_efficiency_total);
    ordered_json tp = ordered_json::object();
    for (const auto& [level, f] : s.tp_ratio) tp[std::to_string(level)] = f;
    j["tp_ratio"] = tp;
    ordered_json arms = ordered_json::array();
    for (const auto& [arm, m] : s.per_arm) {
        arms.push_back({{"arm_index", arm},
                        {"selections", m.selections},
                        {"successes", m.successes},
                        {"success_rate", m.success_rate},
                        {"energy_efficiency", m.energy_efficiency}});
    }
    j["per_arm"] = arms;
    return j;
}

MetricsSummary summary_from_json(const json& j) {
    MetricsSummary s;
    s.config_hash = j.at("config_hash").get<std::string>();
    s.attempts = j.at("attempts").get<std::uint64_t>();
    s.successes = j.at("successes").get<std::uint64_t>();
    s.success_rate = optional_from(j, "success_rate");
    s.energy_efficiency = optional_from(j, "energy_efficiency");
    s.energy_efficiency_total = optional_from(j, "energy_efficiency_total");
    for (const auto& [k, v] : j.at("tp_ratio").items()) s.tp_ratio[std::stoi(k)] = v.get<double>();
    for (const auto& a : j.at("per_arm")) {
        ArmMetrics m;
        m.selections = a.at("selections").get<std::uint64_t>();
        m.successes = a.at("successes").get<std::uint64_t>();
        m.success_rate = a.at("success_rate").get<double>();
        m.energy_efficiency = a.at("energy_efficiency").get<double>();
        s.per_arm[a.at("arm_index").get<std::size_t>()] = m;
    }
    return s;
}

ordered_json to_json(const RunManifest& m) {
    ordered_json j;
    j["tool_version"] = m.tool_version;
    j["config_hash"] = m.config_hash;
    j["base_seed"] = m.base_seed;
    auto cfg = to_json(m.config);
    cfg.erase("parallelism");
    j["config"] = cfg;
    j["runs"] = ordered_json::array();
    for (const auto& r : m.runs) {
        j["runs"].push_back({{"policy", std::string(to_string(r.policy))},
                             {"devices", r.devices},
                             {"run", r.run},
                             {"seed", r.seed},
                             {"records", r.records},
                             {"summary", r.summary},
                             {"records_hash", r.records_hash}});
    }
    j["tables"] = m.tables;
    return j;
}

RunManifest manifest_from_json(const json& j, fs::path root) {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.config = config_from_json(j.at("config"));
    for (const auto& r : j.at("runs")) {
        RunEntry e;
        e.policy = policy_from_string(r.at("policy").get<std::string>());
        e.devices = r.at("devices").get<std::size_t>();
        e.run = r.at("run").get<std::size_t>();
        e.seed = r.at("seed").get<std::uint64_t>();
        e.records = r.at("records").get<std::string>();
        e.summary = r.at("summary").get<std::string>();
        e.records_hash = r.at("records_hash").get<std::string>();
        m.runs.push_back(std::move(e));
    }
    m.tables = j.at("tables").get<std::vector<std::string>>();
    m.root = std::move(root);
    return m;
}

RunManifest read_manifest(const fs::path& manifest_path) {
    json j;
    try {
        j = json::parse(slurp(manifest_path));
    } catch (const json::exception& e) {
        throw RuntimeError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    return manifest_from_json(j, manifest_path.parent_path());
}

std::string manifest_hash(const RunManifest& m) { return hex64(fnv1a64(to_json(m).dump())); }

RunManifest run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir, unsigned parallelism) {
    validate(cfg);
    RunManifest m;
    m.config_hash = config_hash(cfg);
    m.base_seed = cfg.base_seed;
    m.config = cfg;
    m.root = out_dir;
    for (auto policy : cfg.policies) {
        for (auto n : cfg.device_counts) {
            for (std::size_t r = 0; r < cfg.runs_per_point; ++r) {
                RunEntry e{policy, n, r, run_seed(cfg.base_seed, policy, n, r), {}, {}, {}};
                e.records = "records/" + run_stem(e) + ".ndjson";
                e.summary = "summaries/" + run_stem(e) + ".json";
                m.runs.push_back(std::move(e));
            }
        }
    }

    std::vector<fs::path> created;
    std::mutex created_mutex;
    auto note = [&](const fs::path& p) {
        std::lock_guard lock(created_mutex);
        created.push_back(p);
    };
    auto cleanup = [&] {
        std::error_code ec;
        for (auto it = created.rbegin(); it != created.rend(); ++it) fs::remove(*it, ec);
    };

    try {
        for (const char* sub : {"", "records", "summaries", "tables"}) {
            const fs::path dir = out_dir / sub;
            if (!fs::exists(dir)) {
                fs::create_directories(dir);
                note(dir);
            }
        }
    } catch (const fs::filesystem_error& e) {
        cleanup();
        throw RuntimeError(std::string("cannot create output directory: ") + e.what());
    }

    unsigned threads = parallelism != 0 ? parallelism : std::thread::hardware_concurrency();
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(m.runs.size()));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= m.runs.size() || failed.load()) return;
            RunEntry& e = m.runs[i];
            try {
                const SimResult res = run_simulation(cfg.sim_config(e.policy, e.devices), e.seed);
                std::ostringstream log;
                write_ndjson(log, res.records);
                const std::string bytes = log.str();
                e.records_hash = hex64(fnv1a64(bytes));
                note(out_dir / e.records);
                write_file(out_dir / e.records, bytes);
                const MetricsSummary s =
                    summarize(res.records, point_hash(m.config_hash, e.policy, e.devices));
                note(out_dir / e.summary);
                write_file(out_dir / e.summary, to_json(s).dump(2) + "\n");
            } catch (const std::exception& ex) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::make_exception_ptr(RuntimeError(
                        "run failed (policy " + std::string(to_string(e.policy)) + ", N=" +
                        std::to_string(e.devices) + ", seed " + std::to_string(e.seed) +
                        "): " + ex.what()));
                }
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) {
        cleanup();
        std::rethrow_exception(first_error);
    }

    try {
        auto cfg_json = to_json(cfg);
        cfg_json.erase("parallelism");
        note(out_dir / "config.json");
        write_file(out_dir / "config.json", cfg_json.dump(2) + "\n");
        const auto tables = emit_tables(m);
        for (const auto& t : tables) note(out_dir / t);
        m.tables = tables;
        note(out_dir / "manifest.json");
        write_file(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
    } catch (...) {
        cleanup();
        throw;
    }
    return m;
}

std::vector<PointTable> load_points(const RunManifest& m) {
    std::vector<PointTable> points;
    for (const auto& e : m.runs) {
        const fs::path p = m.root / e.summary;
        if (!fs::exists(p)) {
            throw RuntimeError("missing summary for run " + run_stem(e) + " (" + p.string() + ")");
        }
        MetricsSummary s;
        try {
            s = summary_from_json(json::parse(slurp(p)));
        } catch (const json::exception& ex) {
            throw RuntimeError("malformed summary for run " + run_stem(e) + ": " + ex.what());
        }
        auto it = std::find_if(points.begin(), points.end(), [&](const PointTable& pt) {
            return pt.policy == e.policy && pt.devices == e.devices;
        });
        if (it == points.end()) {
            points.push_back({e.policy, e.devices, {}, {}});
            it = std::prev(points.end());
        }
        it->runs.push_back(std::move(s));
    }
    for (auto& pt : points) pt.mean = aggregate_runs(pt.runs);
    return points;
}

namespace {

std::string scalar_table(const std::vector<PointTable>& points,
                         std::optional<double> MetricsSummary::*field) {
    std::size_t max_runs = 0;
    for (const auto& p : points) max_runs = std::max(max_runs, p.runs.size());
    std::string out = "policy,N,mean";
    for (std::size_t r = 0; r < max_runs; ++r) out += ",run" + std::to_string(r);
    out += "\n";
    for (const auto& p : points) {
        out += std::string(to_string(p.policy)) + "," + std::to_string(p.devices) + "," +
               format_optional(p.mean.*field);
        for (std::size_t r = 0; r < max_runs; ++r) {
            out += ",";
            if (r < p.runs.size()) out += format_optional(p.runs[r].*field);
        }
        out += "\n";
    }
    return out;
}

std::string scalar_wide(const std::vector<PointTable>& points,
                        std::optional<double> MetricsSummary::*field) {
    std::vector<PolicyKind> policies;
    std::vector<std::size_t> ns;
    for (const auto& p : points) {
        if (std::find(policies.begin(), policies.end(), p.policy) == policies.end()) {
            policies.push_back(p.policy);
        }
        if (std::find(ns.begin(), ns.end(), p.devices) == ns.end()) ns.push_back(p.devices);
    }
    std::string out = "N";
    for (auto pol : policies) out += "," + std::string(to_string(pol));
    out += "\n";
    for (auto n : ns) {
        out += std::to_string(n);
        for (auto pol : policies) {
            out += ",";
            for (const auto& p : points) {
                if (p.policy == pol && p.devices == n) out += format_optional(p.mean.*field);
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace

std::vector<std::string> emit_tables(const RunManifest& m) {
    const auto points = load_points(m);
    const fs::path dir = m.root / "tables";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw RuntimeError("cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("success_rate.csv", scalar_table(points, &MetricsSummary::success_rate));
    files.emplace_back("energy_efficiency.csv",
                       scalar_table(points, &MetricsSummary::energy_efficiency));
    files.emplace_back("energy_efficiency_total.csv",
                       scalar_table(points, &MetricsSummary::energy_efficiency_total));

    std::string tp = "policy,N,power_dbm,fraction\n";
    std::set<int> levels;
    for (const auto& p : points) {
        for (const auto& [level, f] : p.mean.tp_ratio) {
            tp += std::string(to_string(p.policy)) + "," + std::to_string(p.devices) + "," +
                  std::to_string(level) + "," + format_number(f) + "\n";
            levels.insert(level);
        }
    }
    files.emplace_back("tp_ratio.csv", tp);

    files.emplace_back("success_rate_wide.csv", scalar_wide(points, &MetricsSummary::success_rate));
    files.emplace_back("energy_efficiency_wide.csv",
                       scalar_wide(points, &MetricsSummary::energy_efficiency));
    std::string tp_wide = "policy,N";
    for (int level : levels) tp_wide += "," + std::to_string(level);
    tp_wide += "\n";
    for (const auto& p : points) {
        tp_wide += std::string(to_string(p.policy)) + "," + std::to_string(p.devices);
        for (int level : levels) {
            const auto it = p.mean.tp_ratio.find(level);
            tp_wide += "," + format_number(it == p.mean.tp_ratio.end() ? 0.0 : it->second);
        }
        tp_wide += "\n";
    }
    files.emplace_back("tp_ratio_wide.csv", tp_wide);

    std::vector<std::string> written;
    for (const auto& [name, bytes] : files) {
        write_file(dir / name, bytes);
        written.push_back("tables/" + name);
    }
    return written;
}

CsvTable read_csv(const fs::path& path) {
    std::istringstream in(slurp(path));
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

}  // namespace lorasim
