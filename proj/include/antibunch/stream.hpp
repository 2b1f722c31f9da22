#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "antibunch/types.hpp"

namespace antibunch {

// One photon detection: channel id plus time in integer picoseconds.
struct TimestampRecord {
    std::uint8_t channel = 0;
    std::int64_t t_ps = 0;

    friend bool operator==(const TimestampRecord&, const TimestampRecord&) = default;
};

struct StreamMeta {
    std::int64_t duration_ps = 0;
    std::uint64_t seed = 0;
};

// Time-ordered multi-channel detection stream.
struct TimestampStream {
    std::vector<TimestampRecord> records;  // non-decreasing in t_ps
    StreamMeta meta;

    bool sorted() const {
        return std::is_sorted(records.begin(), records.end(),
                              [](const TimestampRecord& a, const TimestampRecord& b) {
                                  return a.t_ps < b.t_ps;
                              });
    }

    std::map<std::uint8_t, std::uint64_t> counts_per_channel() const {
        std::map<std::uint8_t, std::uint64_t> c;
        for (const auto& r : records) ++c[r.channel];
        return c;
    }

    std::vector<std::int64_t> channel_times(std::uint8_t ch) const {
        std::vector<std::int64_t> t;
        for (const auto& r : records)
            if (r.channel == ch) t.push_back(r.t_ps);
        return t;
    }

    void sort_by_time() {
        std::stable_sort(records.begin(), records.end(),
                         [](const TimestampRecord& a, const TimestampRecord& b) {
                             return a.t_ps < b.t_ps;
                         });
    }
};

}  // namespace antibunch
