#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lorasim/params.hpp"
#include "lorasim/policies.hpp"

namespace lorasim {

enum class Cause { Success, ChannelNotReceivable, CarrierBusy, Collision };

std::string_view to_string(Cause cause);
Cause cause_from_string(std::string_view name);

// One row per attempted uplink. acked implies cause == Success; reward is 0 unless acked.
struct RunRecord {
    std::uint64_t run_seed = 0;
    std::size_t device = 0;
    std::size_t attempt = 0;
    std::size_t arm_index = 0;
    Hertz channel_hz = 0;
    int power_dbm = 0;
    Cause cause = Cause::Success;
    bool acked = false;
    double reward = 0.0;
    double e_toa = 0.0;     // mJ, 0 when carrier sense aborted the attempt
    double e_active = 0.0;  // mJ
    double wake_time = 0.0; // s
    // Decision audit trail.
    Phase phase = Phase::learned;
    std::uint32_t tie_count = 1;
    std::uint32_t tie_pick = 0;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Newline-delimited JSON, one record per line.
std::string to_ndjson_line(const RunRecord& r);
RunRecord record_from_ndjson_line(std::string_view line);
void write_ndjson(std::ostream& os, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_ndjson(std::istream& is);

}  // namespace lorasim
