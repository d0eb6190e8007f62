#ifndef TSCHED_TYPES_HPP
#define TSCHED_TYPES_HPP

#include <cstdint>
#include <limits>
#include <string>

namespace tsched {

/// Virtual time in milliseconds since the simulation epoch.
using TimeMs = std::int64_t;

/// Bandwidth in kilobits per second.
using Kbps = std::int64_t;

/// Data amounts in kilobits.
using Kilobits = std::int64_t;

using Priority = std::int64_t;

/// Sentinel end time of the unbounded tail interval of a profile.
inline constexpr TimeMs kTimeInfinity = std::numeric_limits<TimeMs>::max();

/// Priority used by overrun extensions; outranks every user priority.
inline constexpr Priority kMaxPriority = std::numeric_limits<Priority>::max();

/// Upper bound accepted for user priorities, so kMaxPriority stays unique.
inline constexpr Priority kMaxUserPriority = 1000000000;

constexpr std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return (num + den - 1) / den;
}

/// Exact rational in (0,1], used for throughput fault injection.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 1;

  friend bool operator==(const Ratio&, const Ratio&) = default;
};

std::string format_time_ms(TimeMs t);  // "inf" or decimal milliseconds
std::string format_clock(TimeMs t);    // H:MM:SS.mmm rendering

}  // namespace tsched

#endif
