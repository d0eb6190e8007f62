#include "tsched/profile.hpp"

#include <algorithm>
#include <cassert>

#include "tsched/error.hpp"

namespace tsched {

BandwidthProfile::BandwidthProfile(Kbps capacity_kbps, Kind kind)
    : base_capacity_(capacity_kbps), kind_(kind) {
  if (capacity_kbps <= 0)
    throw Error(ErrorCode::kInvalidCapacity, "profile capacity must be positive");
  intervals_.push_back(Interval{0, kTimeInfinity, capacity_kbps, {}});
}

std::size_t BandwidthProfile::split_at(TimeMs t) {
  assert(t >= 0 && t < kTimeInfinity);
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](TimeMs v, const Interval& iv) { return v < iv.end; });
  assert(it != intervals_.end());
  if (it->begin == t) return static_cast<std::size_t>(it - intervals_.begin());
  Interval tail = *it;
  tail.begin = t;
  it->end = t;
  return static_cast<std::size_t>(intervals_.insert(it + 1, tail) - intervals_.begin());
}

void BandwidthProfile::apply(TimeMs begin, TimeMs end, Kbps delta, const std::string& request_id,
                             bool attach) {
  std::size_t first = split_at(begin);
  std::size_t past = split_at(end);
  for (std::size_t i = first; i < past; ++i) {
    intervals_[i].available += delta;
    assert(intervals_[i].available >= 0 && intervals_[i].available <= base_capacity_);
    if (kind_ == Kind::kPath) {
      if (attach) {
        intervals_[i].requests.insert(request_id);
      } else {
        intervals_[i].requests.erase(request_id);
      }
    }
  }
}

void BandwidthProfile::reserve(TimeMs begin, TimeMs end, Kbps bw_kbps,
                               const std::string& request_id) {
  if (begin < 0 || begin >= end || end >= kTimeInfinity)
    throw Error(ErrorCode::kPreconditionViolated, "reservation window must be finite and non-empty");
  if (bw_kbps < 0)
    throw Error(ErrorCode::kPreconditionViolated, "reservation bandwidth must be non-negative");
  if (min_available(begin, end) < bw_kbps)
    throw Error(ErrorCode::kInsufficientBandwidth,
                "request '" + request_id + "' needs " + std::to_string(bw_kbps) + " kbps");
  apply(begin, end, -bw_kbps, request_id, true);
  reservations_[request_id].push_back(ReservationSegment{begin, end, bw_kbps});
}

std::vector<ReservationSegment> BandwidthProfile::release(const std::string& request_id) {
  auto it = reservations_.find(request_id);
  if (it == reservations_.end())
    throw Error(ErrorCode::kUnknownRequest, "no reservation for '" + request_id + "'");
  std::vector<ReservationSegment> segments = std::move(it->second);
  reservations_.erase(it);
  for (const ReservationSegment& seg : segments) {
    apply(seg.begin, seg.end, seg.bandwidth, request_id, false);
  }
  coalesce();
  return segments;
}

void BandwidthProfile::truncate(const std::string& request_id, TimeMs at) {
  auto it = reservations_.find(request_id);
  if (it == reservations_.end())
    throw Error(ErrorCode::kUnknownRequest, "no reservation for '" + request_id + "'");
  std::vector<ReservationSegment> kept;
  for (const ReservationSegment& seg : it->second) {
    if (seg.end <= at) {
      kept.push_back(seg);
      continue;
    }
    TimeMs cut = std::max(seg.begin, at);
    apply(cut, seg.end, seg.bandwidth, request_id, false);
    if (cut > seg.begin) kept.push_back(ReservationSegment{seg.begin, cut, seg.bandwidth});
  }
  if (kept.empty()) {
    reservations_.erase(it);
  } else {
    it->second = std::move(kept);
  }
  coalesce();
}

void BandwidthProfile::coalesce() {
  std::vector<Interval> merged;
  merged.reserve(intervals_.size());
  for (const Interval& iv : intervals_) {
    if (!merged.empty() && merged.back().available == iv.available &&
        merged.back().requests == iv.requests) {
      merged.back().end = iv.end;
    } else {
      merged.push_back(iv);
    }
  }
  intervals_ = std::move(merged);
}

Kbps BandwidthProfile::min_available(TimeMs begin, TimeMs end) const {
  if (begin >= end)
    throw Error(ErrorCode::kPreconditionViolated, "min_available needs begin < end");
  Kbps low = base_capacity_;
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), begin,
                             [](TimeMs v, const Interval& iv) { return v < iv.end; });
  for (; it != intervals_.end() && it->begin < end; ++it) low = std::min(low, it->available);
  return low;
}

Kbps BandwidthProfile::available_at(TimeMs t) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](TimeMs v, const Interval& iv) { return v < iv.end; });
  assert(it != intervals_.end());
  return it->available;
}

std::optional<TimeMs> BandwidthProfile::first_fit(TimeMs earliest, TimeMs duration,
                                                  Kbps bw_kbps) const {
  if (duration <= 0 || bw_kbps <= 0)
    throw Error(ErrorCode::kPreconditionViolated, "first_fit needs positive duration and bandwidth");
  if (bw_kbps > base_capacity_) return std::nullopt;
  if (min_available(earliest, earliest + duration) >= bw_kbps) return earliest;
  for (const Interval& iv : intervals_) {
    if (iv.begin <= earliest) continue;
    if (min_available(iv.begin, iv.begin + duration) >= bw_kbps) return iv.begin;
  }
  // Unreachable: the window starting at the unbounded tail always fits.
  return intervals_.back().begin;
}

TimeMs BandwidthProfile::last_fit(TimeMs duration, Kbps bw_kbps, TimeMs not_before) const {
  if (duration <= 0 || bw_kbps <= 0)
    throw Error(ErrorCode::kPreconditionViolated, "last_fit needs positive duration and bandwidth");
  if (bw_kbps > base_capacity_)
    throw Error(ErrorCode::kPreconditionViolated, "last_fit bandwidth exceeds base capacity");
  if (not_before < 0) not_before = 0;
  const TimeMs tail = tail_begin();
  // A maximal feasible start is always flush against some interval begin
  // (the window's end touching where availability drops) or against the
  // tail bound itself; both forms are begin - duration for some breakpoint.
  std::optional<TimeMs> best;
  for (const Interval& iv : intervals_) {
    TimeMs start = iv.begin - duration;
    if (start < not_before || start + duration > tail) continue;
    if (min_available(start, start + duration) < bw_kbps) continue;
    if (!best || start > *best) best = start;
  }
  if (best) return *best;
  return std::max(not_before, tail);
}

bool BandwidthProfile::has_reservation(const std::string& request_id) const {
  return reservations_.count(request_id) > 0;
}

const std::vector<ReservationSegment>* BandwidthProfile::segments_of(
    const std::string& request_id) const {
  auto it = reservations_.find(request_id);
  return it == reservations_.end() ? nullptr : &it->second;
}

BandwidthProfile BandwidthProfile::normalized() const {
  BandwidthProfile copy = *this;
  copy.coalesce();
  return copy;
}

bool operator==(const BandwidthProfile& a, const BandwidthProfile& b) {
  if (a.base_capacity_ != b.base_capacity_ || a.kind_ != b.kind_) return false;
  if (a.reservations_ != b.reservations_) return false;
  BandwidthProfile na = a.normalized();
  BandwidthProfile nb = b.normalized();
  return na.intervals_ == nb.intervals_;
}

BandwidthProfile path_availability(std::span<const BandwidthProfile* const> links) {
  if (links.empty())
    throw Error(ErrorCode::kPreconditionViolated, "path_availability needs at least one profile");
  Kbps base = kTimeInfinity;
  std::set<TimeMs> breakpoints;
  for (const BandwidthProfile* link : links) {
    base = std::min(base, link->base_capacity());
    for (const Interval& iv : link->intervals()) breakpoints.insert(iv.begin);
  }
  BandwidthProfile merged(base, BandwidthProfile::Kind::kPath);
  TimeMs prev = 0;
  for (TimeMs bp : breakpoints) {
    if (bp == 0) continue;
    Kbps low = kTimeInfinity;
    for (const BandwidthProfile* link : links) low = std::min(low, link->available_at(prev));
    low = std::min(low, base);
    if (low < base) merged.reserve(prev, bp, base - low, "");
    prev = bp;
  }
  // Tail availability is each link's base capacity, so min(base) is already
  // in place; drop the synthetic reservation bookkeeping used for shaping.
  merged.reservations_.clear();
  for (Interval& iv : merged.intervals_) iv.requests.clear();
  merged.coalesce();
  return merged;
}

}  // namespace tsched
