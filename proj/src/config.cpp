#include "lorasim/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lorasim/error.hpp"

namespace lorasim {

using nlohmann::json;

SimConfig ExperimentConfig::sim_config(PolicyKind policy, std::size_t devices) const {
    SimConfig s;
    s.policy = policy;
    s.devices = devices;
    s.attempts = attempts;
    s.interval_s = interval_s;
    s.cs_duration_s = cs_duration_s;
    s.channels = channels;
    s.powers = powers;
    s.radio = radio;
    s.payload_min = payload_min;
    s.payload_max = payload_max;
    s.energy = energy;
    s.reward_mode = reward_mode;
    s.epsilon_ack_reward = epsilon_ack_reward;
    s.policy_params.epsilon = epsilon;
    s.policy_params.adr_channel_order = adr_channel_order;
    return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "policies",   "device_counts", "runs_per_point", "T",           "interval_s",
    "cs_duration_s", "channels",   "powers_dbm",     "energy",      "radio",
    "epsilon",    "reward_mode",   "epsilon_reward",   "adr_channel_order_mhz", "base_seed", "parallelism"};

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + where + key + "': " + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
    for (const auto& [k, v] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            throw ConfigError("unknown field '" + where + k + "'");
        }
    }
}

double to_mhz(Hertz hz) { return static_cast<double>(hz) / 1e6; }

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : doc.items()) {
        if (!kTopLevelKeys.contains(k)) throw ConfigError("unknown field '" + k + "'");
    }
    ExperimentConfig c;
    if (doc.contains("policies")) {
        c.policies.clear();
        for (const auto& p : field<std::vector<std::string>>(doc, "policies", "")) {
            c.policies.push_back(policy_from_string(p));
        }
    }
    if (doc.contains("device_counts")) {
        c.device_counts = field<std::vector<std::size_t>>(doc, "device_counts", "");
    }
    if (doc.contains("runs_per_point")) c.runs_per_point = field<std::size_t>(doc, "runs_per_point", "");
    if (doc.contains("T")) c.attempts = field<std::uint32_t>(doc, "T", "");
    if (doc.contains("interval_s")) c.interval_s = field<double>(doc, "interval_s", "");
    if (doc.contains("cs_duration_s")) c.cs_duration_s = field<double>(doc, "cs_duration_s", "");
    if (doc.contains("epsilon")) c.epsilon = field<double>(doc, "epsilon", "");
    if (doc.contains("reward_mode")) {
        c.reward_mode = reward_mode_from_string(field<std::string>(doc, "reward_mode", ""));
    }
    if (doc.contains("epsilon_reward")) {
        const auto mode = field<std::string>(doc, "epsilon_reward", "");
        if (mode != "energy" && mode != "ack") {
            throw ConfigError("field 'epsilon_reward' must be \"energy\" or \"ack\"");
        }
        c.epsilon_ack_reward = mode == "ack";
    }
    if (doc.contains("base_seed")) c.base_seed = field<std::uint64_t>(doc, "base_seed", "");
    if (doc.contains("parallelism")) c.parallelism = field<unsigned>(doc, "parallelism", "");

    if (doc.contains("channels")) {
        const json& arr = doc.at("channels");
        if (!arr.is_array()) throw ConfigError("field 'channels' must be an array");
        c.channels.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "channels[" + std::to_string(i) + "].";
            reject_unknown(arr[i], {"frequency_mhz", "receivable"}, where);
            c.channels.push_back({mhz_to_hz(field<double>(arr[i], "frequency_mhz", where)),
                                  field<bool>(arr[i], "receivable", where)});
        }
    }
    if (doc.contains("powers_dbm")) {
        c.powers.clear();
        for (int level : field<std::vector<int>>(doc, "powers_dbm", "")) c.powers.push_back({level, 0.0});
    }
    if (doc.contains("energy")) {
        const json& e = doc.at("energy");
        reject_unknown(e, {"e_wu_mj", "e_proc_mj", "e_r_mj", "p_mcu_mw", "p_toa_mw"}, "energy.");
        if (e.contains("e_wu_mj")) c.energy.e_wu = field<double>(e, "e_wu_mj", "energy.");
        if (e.contains("e_proc_mj")) c.energy.e_proc = field<double>(e, "e_proc_mj", "energy.");
        if (e.contains("e_r_mj")) c.energy.e_r = field<double>(e, "e_r_mj", "energy.");
        if (e.contains("p_mcu_mw")) c.energy.p_mcu = field<double>(e, "p_mcu_mw", "energy.");
        if (e.contains("p_toa_mw")) {
            const json& table = e.at("p_toa_mw");
            if (!table.is_object()) throw ConfigError("field 'energy.p_toa_mw' must be an object");
            c.energy.p_toa_by_level.clear();
            for (const auto& [k, v] : table.items()) {
                int level = 0;
                std::size_t used = 0;
                try {
                    level = std::stoi(k, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != k.size()) {
                    throw ConfigError("field 'energy.p_toa_mw': key '" + k + "' is not a dBm level");
                }
                c.energy.p_toa_by_level[level] = field<double>(table, k.c_str(), "energy.p_toa_mw.");
            }
        }
    }
    if (doc.contains("radio")) {
        const json& r = doc.at("radio");
        reject_unknown(r, {"sf", "bw_hz", "n_preamble", "payload_min", "payload_max"}, "radio.");
        if (r.contains("sf")) c.radio.sf = field<int>(r, "sf", "radio.");
        if (r.contains("bw_hz")) c.radio.bw_hz = field<double>(r, "bw_hz", "radio.");
        if (r.contains("n_preamble")) c.radio.n_preamble = field<int>(r, "n_preamble", "radio.");
        if (r.contains("payload_min")) c.payload_min = field<int>(r, "payload_min", "radio.");
        if (r.contains("payload_max")) c.payload_max = field<int>(r, "payload_max", "radio.");
    }
    if (doc.contains("adr_channel_order_mhz")) {
        for (double mhz : field<std::vector<double>>(doc, "adr_channel_order_mhz", "")) {
            c.adr_channel_order.push_back(mhz_to_hz(mhz));
        }
    }
    c.radio.n_payload = c.payload_min;

    // Power draws come from the energy table; missing rows are reported by validate().
    for (auto& p : c.powers) {
        if (auto it = c.energy.p_toa_by_level.find(p.level_dbm); it != c.energy.p_toa_by_level.end()) {
            p.draw_mw = it->second;
        }
    }
    validate(c);
    return c;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.policies.empty()) throw ConfigError("policies must not be empty");
    if (cfg.device_counts.empty()) throw ConfigError("device_counts must not be empty");
    if (cfg.runs_per_point == 0) throw ConfigError("runs_per_point must be >= 1");
    {
        std::set<PolicyKind> seen(cfg.policies.begin(), cfg.policies.end());
        if (seen.size() != cfg.policies.size()) throw ConfigError("policies lists a policy twice");
        std::set<std::size_t> ns(cfg.device_counts.begin(), cfg.device_counts.end());
        if (ns.size() != cfg.device_counts.size()) throw ConfigError("device_counts has duplicates");
    }
    // Channel and power checks, energy table coverage, timing; once per policy since
    // ADR-Lite adds its own ordering requirement.
    for (auto policy : cfg.policies) {
        for (auto n : cfg.device_counts) lorasim::validate(cfg.sim_config(policy, n));
    }
}

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = text.find_first_not_of(" \t\r\n") == std::string_view::npos ? json::object()
                                                                             : json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
        throw ConfigError("parse error at line " + std::to_string(line) + ": " + e.what());
    }
    return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override must look like key=value, got '" + std::string(assignment) + "'");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string value(assignment.substr(eq + 1));
    if (!kTopLevelKeys.contains(key)) throw ConfigError("unknown field '" + key + "'");
    if (key == "energy" || key == "radio" || key == "channels") {
        throw ConfigError("field '" + key + "' is a section; edit the config file instead");
    }
    // Scalars, or flat lists such as device_counts=[10].
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    if (parsed.is_object()) throw ConfigError("field '" + key + "' override must not be an object");
    if (parsed.is_array()) {
        for (const auto& v : parsed) {
            if (v.is_structured()) throw ConfigError("field '" + key + "' override must be a flat list");
        }
    }
    doc[key] = parsed;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["policies"] = nlohmann::ordered_json::array();
    for (auto p : cfg.policies) j["policies"].push_back(std::string(to_string(p)));
    j["device_counts"] = cfg.device_counts;
    j["runs_per_point"] = cfg.runs_per_point;
    j["T"] = cfg.attempts;
    j["interval_s"] = cfg.interval_s;
    j["cs_duration_s"] = cfg.cs_duration_s;
    j["channels"] = nlohmann::ordered_json::array();
    for (const auto& ch : cfg.channels) {
        j["channels"].push_back({{"frequency_mhz", to_mhz(ch.center_frequency_hz)},
                                 {"receivable", ch.receivable}});
    }
    j["powers_dbm"] = nlohmann::ordered_json::array();
    for (const auto& p : cfg.powers) j["powers_dbm"].push_back(p.level_dbm);
    nlohmann::ordered_json table;
    for (const auto& [level, mw] : cfg.energy.p_toa_by_level) table[std::to_string(level)] = mw;
    j["energy"] = {{"e_wu_mj", cfg.energy.e_wu},
                   {"e_proc_mj", cfg.energy.e_proc},
                   {"e_r_mj", cfg.energy.e_r},
                   {"p_mcu_mw", cfg.energy.p_mcu},
                   {"p_toa_mw", table}};
    j["radio"] = {{"sf", cfg.radio.sf},
                  {"bw_hz", cfg.radio.bw_hz},
                  {"n_preamble", cfg.radio.n_preamble},
                  {"payload_min", cfg.payload_min},
                  {"payload_max", cfg.payload_max}};
    j["epsilon"] = cfg.epsilon;
    j["reward_mode"] = std::string(to_string(cfg.reward_mode));
    j["epsilon_reward"] = cfg.epsilon_ack_reward ? "ack" : "energy";
    j["adr_channel_order_mhz"] = nlohmann::ordered_json::array();
    for (Hertz f : cfg.adr_channel_order) j["adr_channel_order_mhz"].push_back(to_mhz(f));
    j["base_seed"] = cfg.base_seed;
    j["parallelism"] = cfg.parallelism;
    return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
    auto j = to_json(cfg);
    j.erase("parallelism");
    return hex64(fnv1a64(j.dump()));
}

}  // namespace lorasim
