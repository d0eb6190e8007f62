#include "tsched/types.hpp"

#include <cstdio>

namespace tsched {

std::string format_time_ms(TimeMs t) {
  if (t == kTimeInfinity) return "inf";
  return std::to_string(t);
}

std::string format_clock(TimeMs t) {
  if (t == kTimeInfinity) return "inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%lld:%02lld:%02lld.%03lld", static_cast<long long>(t / 3600000),
                static_cast<long long>(t / 60000 % 60), static_cast<long long>(t / 1000 % 60),
                static_cast<long long>(t % 1000));
  return buf;
}

}  // namespace tsched
