#include "lorasim/record.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "lorasim/error.hpp"

namespace lorasim {

std::string_view to_string(Cause cause) {
    switch (cause) {
        case Cause::Success: return "Success";
        case Cause::ChannelNotReceivable: return "ChannelNotReceivable";
        case Cause::CarrierBusy: return "CarrierBusy";
        case Cause::Collision: return "Collision";
    }
    return "Unknown";
}

Cause cause_from_string(std::string_view name) {
    for (auto c : {Cause::Success, Cause::ChannelNotReceivable, Cause::CarrierBusy,
                   Cause::Collision}) {
        if (to_string(c) == name) return c;
    }
    throw std::runtime_error("unknown cause '" + std::string(name) + "'");
}

std::string to_ndjson_line(const RunRecord& r) {
    nlohmann::ordered_json j;
    j["run_seed"] = r.run_seed;
    j["device"] = r.device;
    j["attempt"] = r.attempt;
    j["arm_index"] = r.arm_index;
    j["channel_hz"] = r.channel_hz;
    j["power_dbm"] = r.power_dbm;
    j["cause"] = to_string(r.cause);
    j["acked"] = r.acked;
    j["reward"] = r.reward;
    j["e_toa"] = r.e_toa;
    j["e_active"] = r.e_active;
    j["wake_time"] = r.wake_time;
    j["phase"] = r.phase == Phase::initialization ? "initialization" : "learned";
    j["tie_count"] = r.tie_count;
    j["tie_pick"] = r.tie_pick;
    return j.dump();
}

RunRecord record_from_ndjson_line(std::string_view line) {
    const auto j = nlohmann::json::parse(line);
    RunRecord r;
    r.run_seed = j.at("run_seed").get<std::uint64_t>();
    r.device = j.at("device").get<std::size_t>();
    r.attempt = j.at("attempt").get<std::size_t>();
    r.arm_index = j.at("arm_index").get<std::size_t>();
    r.channel_hz = j.at("channel_hz").get<Hertz>();
    r.power_dbm = j.at("power_dbm").get<int>();
    r.cause = cause_from_string(j.at("cause").get<std::string>());
    r.acked = j.at("acked").get<bool>();
    r.reward = j.at("reward").get<double>();
    r.e_toa = j.at("e_toa").get<double>();
    r.e_active = j.at("e_active").get<double>();
    r.wake_time = j.at("wake_time").get<double>();
    r.phase = j.value("phase", "learned") == "initialization" ? Phase::initialization
                                                              : Phase::learned;
    r.tie_count = j.value("tie_count", 1u);
    r.tie_pick = j.value("tie_pick", 0u);
    return r;
}

void write_ndjson(std::ostream& os, const std::vector<RunRecord>& records) {
    for (const auto& r : records) os << to_ndjson_line(r) << '\n';
}

std::vector<RunRecord> read_ndjson(std::istream& is) {
    std::vector<RunRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_ndjson_line(line));
    }
    return out;
}

}  // namespace lorasim
