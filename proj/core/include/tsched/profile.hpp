#ifndef TSCHED_PROFILE_HPP
#define TSCHED_PROFILE_HPP

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tsched/types.hpp"

namespace tsched {

/// One constant-bandwidth piece of a profile. Pieces are contiguous and the
/// last one is always [begin, inf) at the profile's base capacity.
struct Interval {
  TimeMs begin = 0;
  TimeMs end = kTimeInfinity;
  Kbps available = 0;
  /// Requests covering this piece. Kept for path profiles only; link
  /// profiles carry interval bandwidths without request bookkeeping.
  std::set<std::string> requests;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// One reserved slice of a request on a profile: constant bandwidth over a
/// half-open window.
struct ReservationSegment {
  TimeMs begin = 0;
  TimeMs end = 0;
  Kbps bandwidth = 0;

  friend bool operator==(const ReservationSegment&, const ReservationSegment&) = default;
};

/// Piecewise-constant available bandwidth over virtual time for one link or
/// one path. Availability at any instant is base capacity minus the sum of
/// reservations covering it; it can never go negative, which is exactly the
/// admission check.
class BandwidthProfile {
 public:
  enum class Kind { kLink, kPath };

  BandwidthProfile(Kbps capacity_kbps, Kind kind);

  Kbps base_capacity() const { return base_capacity_; }
  Kind kind() const { return kind_; }
  const std::vector<Interval>& intervals() const { return intervals_; }

  /// Lowers availability by bw over [begin, end) and records the segment
  /// under request_id. Splits intervals at the window edges; split points
  /// persist until a release coalesces them. Throws InsufficientBandwidth
  /// when the window cannot carry bw.
  void reserve(TimeMs begin, TimeMs end, Kbps bw_kbps, const std::string& request_id);

  /// Removes every segment held by request_id, restores availability and
  /// coalesces equal neighbours. Returns the released segments so callers
  /// can re-reserve a modified shape. Throws UnknownRequest.
  std::vector<ReservationSegment> release(const std::string& request_id);

  /// Releases only the [at, ...) part of the request's segments, keeping the
  /// already-elapsed part recorded. No-op when nothing extends past `at`.
  void truncate(const std::string& request_id, TimeMs at);

  /// Minimum availability over [begin, end).
  Kbps min_available(TimeMs begin, TimeMs end) const;

  /// Smallest start >= earliest where [start, start+duration) carries bw.
  /// Only interval boundaries need checking for a step function. Empty only
  /// when bw exceeds the base capacity; the unbounded tail admits the rest.
  std::optional<TimeMs> first_fit(TimeMs earliest, TimeMs duration, Kbps bw_kbps) const;

  /// Largest start >= not_before with the whole window carrying bw and
  /// ending no later than the unbounded tail's begin. When no such finite
  /// placement exists the fallback is max(not_before, tail begin): right
  /// after all existing work.
  TimeMs last_fit(TimeMs duration, Kbps bw_kbps, TimeMs not_before) const;

  bool has_reservation(const std::string& request_id) const;
  const std::vector<ReservationSegment>* segments_of(const std::string& request_id) const;
  const std::map<std::string, std::vector<ReservationSegment>>& reservations() const {
    return reservations_;
  }

  Kbps available_at(TimeMs t) const;
  TimeMs tail_begin() const { return intervals_.back().begin; }

  /// Copy with adjacent equal intervals merged; reserve-side split points do
  /// not affect equality.
  BandwidthProfile normalized() const;

  /// Semantic equality: same capacity, kind, reservations and pointwise
  /// availability (compared on the coalesced form).
  friend bool operator==(const BandwidthProfile& a, const BandwidthProfile& b);
  friend BandwidthProfile path_availability(std::span<const BandwidthProfile* const> links);

 private:
  std::size_t split_at(TimeMs t);
  void apply(TimeMs begin, TimeMs end, Kbps delta, const std::string& request_id, bool attach);
  void coalesce();

  Kbps base_capacity_;
  Kind kind_;
  std::vector<Interval> intervals_;
  std::map<std::string, std::vector<ReservationSegment>> reservations_;
};

/// Pointwise minimum of the given link profiles: the availability a path
/// built from those links offers. Breakpoints are the union of the inputs'
/// breakpoints; the result is an ephemeral PATH-kind profile.
BandwidthProfile path_availability(std::span<const BandwidthProfile* const> links);

}  // namespace tsched

#endif
