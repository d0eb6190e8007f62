// Independent reference implementations the tests check the real code
// against. Everything here is deliberately brute force: per-millisecond
// timelines, exhaustive scans, full enumerations.
#ifndef TSCHED_TESTS_ORACLES_HPP
#define TSCHED_TESTS_ORACLES_HPP

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "tsched/profile.hpp"
#include "tsched/request.hpp"
#include "tsched/topology.hpp"
#include "tsched/types.hpp"

namespace tsched::oracle {

/// Dense per-millisecond availability, rebuilt from raw reservation
/// segments. Index t holds the availability of instant t; every instant at
/// or past `horizon` is fully available.
struct Timeline {
  Kbps capacity = 0;
  std::vector<Kbps> available;  // size = horizon

  static Timeline build(Kbps capacity, const std::vector<ReservationSegment>& segments,
                        TimeMs horizon) {
    Timeline tl;
    tl.capacity = capacity;
    std::vector<Kbps> delta(static_cast<std::size_t>(horizon) + 1, 0);
    for (const ReservationSegment& seg : segments) {
      if (seg.begin >= horizon) continue;
      delta[static_cast<std::size_t>(seg.begin)] += seg.bandwidth;
      delta[static_cast<std::size_t>(std::min(seg.end, horizon))] -= seg.bandwidth;
    }
    tl.available.resize(static_cast<std::size_t>(horizon));
    Kbps used = 0;
    for (TimeMs t = 0; t < horizon; ++t) {
      used += delta[static_cast<std::size_t>(t)];
      tl.available[static_cast<std::size_t>(t)] = capacity - used;
    }
    return tl;
  }

  Kbps at(TimeMs t) const {
    if (t < 0) return 0;
    if (t >= static_cast<TimeMs>(available.size())) return capacity;
    return available[static_cast<std::size_t>(t)];
  }

  Kbps min_over(TimeMs begin, TimeMs end) const {
    Kbps low = capacity;
    for (TimeMs t = begin; t < end; ++t) low = std::min(low, at(t));
    return low;
  }

  bool fits(TimeMs start, TimeMs duration, Kbps bw) const {
    return min_over(start, start + duration) >= bw;
  }
};

/// Millisecond-exhaustive first fit: smallest start >= earliest whose whole
/// window carries bw. scan_limit must lie in the fully-free tail.
inline std::optional<TimeMs> first_fit_scan(const Timeline& tl, TimeMs earliest, TimeMs duration,
                                            Kbps bw, TimeMs scan_limit) {
  if (bw > tl.capacity) return std::nullopt;
  for (TimeMs s = earliest; s <= scan_limit; ++s) {
    if (tl.fits(s, duration, bw)) return s;
  }
  return std::nullopt;
}

/// Millisecond-exhaustive last fit with the tail fallback the profile
/// documents: largest feasible start with the window inside [0, tail_begin],
/// else max(not_before, tail_begin).
inline TimeMs last_fit_scan(const Timeline& tl, TimeMs duration, Kbps bw, TimeMs not_before,
                            TimeMs tail_begin) {
  for (TimeMs s = tail_begin - duration; s >= not_before; --s) {
    if (tl.fits(s, duration, bw)) return s;
  }
  return std::max(not_before, tail_begin);
}

/// Pointwise minimum across several timelines.
inline Timeline merge_min(const std::vector<Timeline>& lines, TimeMs horizon) {
  Timeline out;
  out.capacity = lines.front().capacity;
  for (const Timeline& tl : lines) out.capacity = std::min(out.capacity, tl.capacity);
  out.available.resize(static_cast<std::size_t>(horizon));
  for (TimeMs t = 0; t < horizon; ++t) {
    Kbps low = out.capacity;
    for (const Timeline& tl : lines) low = std::min(low, tl.at(t));
    out.available[static_cast<std::size_t>(t)] = std::min(low, out.capacity);
  }
  return out;
}

/// All simple paths between two nodes, every ordering considered. Used to
/// cross-check enumerate_paths on small graphs.
inline void all_simple_paths_rec(const Topology& topo, const std::string& at,
                                 const std::string& dest, std::vector<Link>& chain,
                                 std::vector<std::string>& visited, std::vector<Path>& out) {
  if (at == dest) {
    out.push_back(Path{chain});
    return;
  }
  for (const Link& link : topo.links()) {
    if (link.source != at) continue;
    if (std::find(visited.begin(), visited.end(), link.dest) != visited.end()) continue;
    visited.push_back(link.dest);
    chain.push_back(link);
    all_simple_paths_rec(topo, link.dest, dest, chain, visited, out);
    chain.pop_back();
    visited.pop_back();
  }
}

inline std::vector<Path> all_simple_paths(const Topology& topo, const std::string& source,
                                          const std::string& dest) {
  std::vector<Path> out;
  std::vector<Link> chain;
  std::vector<std::string> visited{source};
  all_simple_paths_rec(topo, source, dest, chain, visited, out);
  return out;
}

struct HalvingTrial {
  Kbps bandwidth = 0;
  bool feasible = false;
  TimeMs start = 0;
  TimeMs end = 0;
};

/// Reference constraint-policy placement on a timeline, mirroring the four
/// documented policies with millisecond scans instead of interval walks.
inline std::optional<std::pair<TimeMs, TimeMs>> place_scan(const Timeline& tl, TimeMs now,
                                                           const TimeConstraint& constraint,
                                                           TimeMs duration, Kbps bw,
                                                           TimeMs tail_begin) {
  const TimeMs scan_limit = std::max(now, tail_begin);
  switch (constraint.kind) {
    case ConstraintKind::kAsap: {
      auto s = first_fit_scan(tl, now, duration, bw, scan_limit);
      if (!s) return std::nullopt;
      return std::make_pair(*s, *s + duration);
    }
    case ConstraintKind::kNotAfter: {
      if (constraint.bound >= now && tl.fits(constraint.bound, duration, bw))
        return std::make_pair(constraint.bound, constraint.bound + duration);
      auto s = first_fit_scan(tl, now, duration, bw, scan_limit);
      if (s && *s <= constraint.bound) return std::make_pair(*s, *s + duration);
      return std::nullopt;
    }
    case ConstraintKind::kNotBefore: {
      const TimeMs bound = std::max(constraint.bound, now);
      if (tl.fits(bound, duration, bw)) return std::make_pair(bound, bound + duration);
      TimeMs s = last_fit_scan(tl, duration, bw, bound, tail_begin);
      return std::make_pair(s, s + duration);
    }
    case ConstraintKind::kNone: {
      TimeMs s = last_fit_scan(tl, duration, bw, now, tail_begin);
      return std::make_pair(s, s + duration);
    }
  }
  return std::nullopt;
}

/// The full halving sequence from the bottleneck down to the floor, each
/// step placed with the scan policies; the earliest end wins and ties keep
/// the higher bandwidth.
inline std::vector<HalvingTrial> halving_sequence(const Timeline& tl, TimeMs now,
                                                  const TimeConstraint& constraint, Kilobits size,
                                                  Kbps bottleneck, Kbps floor, TimeMs tail_begin) {
  std::vector<HalvingTrial> trials;
  for (Kbps bw = bottleneck; bw >= floor && bw > 0; bw /= 2) {
    HalvingTrial trial;
    trial.bandwidth = bw;
    const TimeMs duration = transfer_duration(size, bw);
    if (auto placed = place_scan(tl, now, constraint, duration, bw, tail_begin)) {
      trial.feasible = true;
      trial.start = placed->first;
      trial.end = placed->second;
    }
    trials.push_back(trial);
  }
  return trials;
}

inline std::optional<std::size_t> best_trial(const std::vector<HalvingTrial>& trials) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!trials[i].feasible) continue;
    if (!best || trials[i].end < trials[*best].end) best = i;
  }
  return best;
}

/// Deterministic cross-library RNG helper.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_;
  }

  std::int64_t pick(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace tsched::oracle

#endif
