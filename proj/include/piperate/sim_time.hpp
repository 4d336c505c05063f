#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace piperate {

// Simulation time in integer microseconds. Keeping the clock integral makes
// event ordering and the timeline arithmetic exact; fractional seconds only
// appear at the formatting boundary.
using SimTime = std::int64_t;

constexpr SimTime kMicrosPerSecond = 1'000'000;

inline SimTime from_seconds(double s) {
    return static_cast<SimTime>(std::llround(s * 1e6));
}

inline double to_seconds(SimTime t) {
    return static_cast<double>(t) * 1e-6;
}

// Renders a microsecond timestamp as decimal seconds with exactly six
// fractional digits; lossless for SimTime values.
inline std::string format_seconds(SimTime t) {
    char buf[32];
    const char* sign = t < 0 ? "-" : "";
    SimTime a = t < 0 ? -t : t;
    std::snprintf(buf, sizeof(buf), "%s%lld.%06lld", sign,
                  static_cast<long long>(a / kMicrosPerSecond),
                  static_cast<long long>(a % kMicrosPerSecond));
    return buf;
}

}  // namespace piperate
