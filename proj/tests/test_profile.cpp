#include <doctest.h>

#include <vector>

#include "support/oracles.hpp"
#include "tsched/error.hpp"
#include "tsched/profile.hpp"

using namespace tsched;

namespace {

BandwidthProfile link50() { return BandwidthProfile(50000, BandwidthProfile::Kind::kLink); }

std::vector<ReservationSegment> collect_segments(const BandwidthProfile& profile) {
  std::vector<ReservationSegment> out;
  for (const auto& [id, segments] : profile.reservations()) {
    out.insert(out.end(), segments.begin(), segments.end());
  }
  return out;
}

}  // namespace

TEST_CASE("new profiles are one unbounded interval at capacity") {
  BandwidthProfile p = link50();
  REQUIRE(p.intervals().size() == 1);
  CHECK(p.intervals()[0].begin == 0);
  CHECK(p.intervals()[0].end == kTimeInfinity);
  CHECK(p.intervals()[0].available == 50000);

  BandwidthProfile p2(100000, BandwidthProfile::Kind::kLink);
  CHECK(p2.intervals()[0].available == 100000);

  CHECK_THROWS_AS(BandwidthProfile(0, BandwidthProfile::Kind::kLink), Error);
  CHECK_THROWS_AS(BandwidthProfile(-1, BandwidthProfile::Kind::kPath), Error);
}

TEST_CASE("reserve splits and subtracts") {
  BandwidthProfile p = link50();
  p.reserve(0, 10000, 50000, "r1");
  REQUIRE(p.intervals().size() == 2);
  CHECK(p.intervals()[0].available == 0);
  CHECK(p.intervals()[0].end == 10000);
  CHECK(p.intervals()[1].available == 50000);
  CHECK(p.intervals()[1].end == kTimeInfinity);

  CHECK_THROWS_AS(p.reserve(5000, 6000, 1, "r2"), Error);   // window full
  CHECK_THROWS_AS(p.reserve(10, 5, 1000, "r3"), Error);     // begin >= end
  CHECK_THROWS_AS(p.reserve(0, kTimeInfinity, 1, "r4"), Error);  // unbounded end
}

TEST_CASE("zero-bandwidth reservations only split") {
  BandwidthProfile p = link50();
  p.reserve(1000, 2000, 0, "marker");
  REQUIRE(p.intervals().size() == 3);
  for (const Interval& iv : p.intervals()) CHECK(iv.available == 50000);
  CHECK(p.has_reservation("marker"));
}

TEST_CASE("min_available over overlapping reservations matches the paper window") {
  BandwidthProfile p = link50();
  CHECK(p.min_available(0, 1000000) == 50000);  // fresh profile, any window

  p.reserve(100000, 200000, 30000, "r1");
  CHECK(p.min_available(150000, 160000) == 20000);
  CHECK(p.min_available(0, 100000) == 50000);
  CHECK(p.min_available(99999, 100001) == 20000);

  // Saturating window: a full-width request leaves zero inside it.
  BandwidthProfile q = link50();
  q.reserve(0, 60000, 50000, "t1");
  CHECK(q.min_available(10000, 20000) == 0);
}

TEST_CASE("release restores and coalesces back to the original") {
  BandwidthProfile p = link50();
  BandwidthProfile original = p;
  p.reserve(5000, 15000, 20000, "r1");
  CHECK_FALSE(p == original);
  p.release("r1");
  CHECK(p == original);
  CHECK(p.normalized().intervals().size() == 1);

  CHECK_THROWS_AS(p.release("ghost"), Error);
}

TEST_CASE("release with a surviving overlap matches a rebuilt profile") {
  BandwidthProfile p = link50();
  p.reserve(0, 10000, 10000, "a");
  p.reserve(5000, 15000, 20000, "b");
  p.release("a");

  BandwidthProfile rebuilt = link50();
  rebuilt.reserve(5000, 15000, 20000, "b");
  CHECK(p == rebuilt);
}

TEST_CASE("truncate frees the remainder of a window") {
  BandwidthProfile p = link50();
  p.reserve(0, 20000, 30000, "r1");
  p.truncate("r1", 15000);
  CHECK(p.min_available(0, 15000) == 20000);
  CHECK(p.min_available(15000, 20000) == 50000);
  REQUIRE(p.segments_of("r1") != nullptr);
  REQUIRE(p.segments_of("r1")->size() == 1);
  CHECK((*p.segments_of("r1"))[0].end == 15000);

  // Truncation at or past the end is a no-op.
  BandwidthProfile q = link50();
  q.reserve(0, 20000, 30000, "r1");
  BandwidthProfile before = q;
  q.truncate("r1", 20000);
  CHECK(q == before);
}

TEST_CASE("first_fit walks interval boundaries") {
  BandwidthProfile p = link50();
  CHECK(p.first_fit(0, 10000, 50000) == 0);  // empty profile

  // [0,100000) holds 20000 free, then full capacity.
  p.reserve(0, 100000, 30000, "base");
  CHECK(p.first_fit(0, 10000, 25000) == 100000);
  CHECK(p.first_fit(0, 10000, 20000) == 0);
  CHECK(p.first_fit(40000, 10000, 20000) == 40000);
  CHECK_FALSE(p.first_fit(0, 10000, 50001).has_value());  // beyond capacity
}

TEST_CASE("last_fit places flush against the drop, with tail fallback") {
  BandwidthProfile p = link50();
  p.reserve(100000, 200000, 40000, "mid");  // 10000 free inside
  // From the worked fixture: bw 20000 for 50000 ms lands at 50000.
  CHECK(p.last_fit(50000, 20000, 0) == 50000);
  // Past the congested region nothing finite fits: fallback to the tail.
  CHECK(p.last_fit(50000, 20000, 150000) == 200000);

  BandwidthProfile fresh = link50();
  CHECK(fresh.last_fit(10000, 20000, 0) == 0);  // only the tail exists
  CHECK(fresh.last_fit(10000, 20000, 7777) == 7777);
}

TEST_CASE("path_availability is the pointwise minimum") {
  BandwidthProfile a(100000, BandwidthProfile::Kind::kLink);
  BandwidthProfile b(50000, BandwidthProfile::Kind::kLink);

  std::vector<const BandwidthProfile*> single = {&a};
  BandwidthProfile same = path_availability(single);
  CHECK(same.base_capacity() == 100000);
  CHECK(same.min_available(0, 500000) == 100000);

  std::vector<const BandwidthProfile*> both = {&a, &b};
  BandwidthProfile merged = path_availability(both);
  CHECK(merged.base_capacity() == 50000);
  REQUIRE(merged.intervals().size() == 1);
  CHECK(merged.intervals()[0].available == 50000);

  a.reserve(0, 50000, 60000, "r1");
  BandwidthProfile shaped = path_availability(both);
  REQUIRE(shaped.intervals().size() == 2);
  CHECK(shaped.intervals()[0].end == 50000);
  CHECK(shaped.intervals()[0].available == 40000);
  CHECK(shaped.intervals()[1].available == 50000);

  std::vector<const BandwidthProfile*> reversed = {&b, &a};
  CHECK(path_availability(reversed) == shaped);
}

TEST_CASE("randomized reserve/release matches the millisecond oracle") {
  oracle::Rng rng(11);
  for (int round = 0; round < 30; ++round) {
    const Kbps capacity = rng.pick(2, 10) * 10000;
    BandwidthProfile p(capacity, BandwidthProfile::Kind::kLink);
    std::vector<ReservationSegment> live;
    std::vector<std::string> ids;

    int added = 0;
    for (int step = 0; step < 25; ++step) {
      const bool release_one = !ids.empty() && rng.pick(0, 3) == 0;
      if (release_one) {
        std::size_t pick = static_cast<std::size_t>(rng.pick(0, static_cast<std::int64_t>(ids.size()) - 1));
        p.release(ids[pick]);
        ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(pick));
        live = collect_segments(p);
        continue;
      }
      TimeMs begin = rng.pick(0, 40000);
      TimeMs end = begin + rng.pick(1, 15000);
      Kbps room = p.min_available(begin, end);
      if (room <= 0) continue;
      Kbps bw = rng.pick(1, room);
      std::string id = "x" + std::to_string(++added);
      p.reserve(begin, end, bw, id);
      ids.push_back(id);
      live = collect_segments(p);
    }

    oracle::Timeline tl = oracle::Timeline::build(capacity, live, 60000);
    for (TimeMs t = 0; t < 60000; t += 500) {
      CHECK(p.min_available(t, t + 1) == tl.at(t));
    }
    for (int probe = 0; probe < 20; ++probe) {
      TimeMs b = rng.pick(0, 59000);
      TimeMs e = b + rng.pick(1, 1000);
      CHECK(p.min_available(b, e) == tl.min_over(b, e));
    }

    // The final interval is always the unbounded full-capacity tail.
    CHECK(p.intervals().back().end == kTimeInfinity);
    CHECK(p.intervals().back().available == capacity);
  }
}

TEST_CASE("randomized first_fit and last_fit match exhaustive scans") {
  oracle::Rng rng(23);
  for (int round = 0; round < 60; ++round) {
    const Kbps capacity = rng.pick(2, 10) * 10000;
    BandwidthProfile p(capacity, BandwidthProfile::Kind::kLink);
    int k = static_cast<int>(rng.pick(0, 10));
    for (int i = 0; i < k; ++i) {
      TimeMs begin = rng.pick(0, 40000);
      TimeMs end = begin + rng.pick(1, 12000);
      Kbps room = p.min_available(begin, end);
      if (room <= 0) continue;
      p.reserve(begin, end, rng.pick(1, room), "r" + std::to_string(i));
    }
    oracle::Timeline tl = oracle::Timeline::build(capacity, collect_segments(p), 60000);
    const TimeMs tail = p.tail_begin();

    for (int probe = 0; probe < 12; ++probe) {
      TimeMs duration = rng.pick(1, 15000);
      Kbps bw = rng.pick(1, capacity);
      TimeMs earliest = rng.pick(0, 50000);
      auto expected = oracle::first_fit_scan(tl, earliest, duration, bw, std::max(earliest, tail));
      auto got = p.first_fit(earliest, duration, bw);
      REQUIRE(expected.has_value());
      REQUIRE(got.has_value());
      CHECK(*got == *expected);

      TimeMs not_before = rng.pick(0, 50000);
      CHECK(p.last_fit(duration, bw, not_before) ==
            oracle::last_fit_scan(tl, duration, bw, not_before, tail));
    }
  }
}

TEST_CASE("path merge matches the pointwise-minimum oracle") {
  oracle::Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    std::vector<BandwidthProfile> links;
    std::vector<oracle::Timeline> lines;
    const int n = static_cast<int>(rng.pick(1, 4));
    for (int i = 0; i < n; ++i) {
      Kbps capacity = rng.pick(2, 10) * 10000;
      BandwidthProfile p(capacity, BandwidthProfile::Kind::kLink);
      for (int j = 0; j < 5; ++j) {
        TimeMs begin = rng.pick(0, 30000);
        TimeMs end = begin + rng.pick(1, 10000);
        Kbps room = p.min_available(begin, end);
        if (room <= 0) continue;
        p.reserve(begin, end, rng.pick(1, room), "s" + std::to_string(j));
      }
      lines.push_back(oracle::Timeline::build(capacity, collect_segments(p), 50000));
      links.push_back(std::move(p));
    }
    std::vector<const BandwidthProfile*> refs;
    for (const auto& p : links) refs.push_back(&p);
    BandwidthProfile merged = path_availability(refs);
    oracle::Timeline expected = oracle::merge_min(lines, 50000);
    for (TimeMs t = 0; t < 50000; t += 250) {
      CHECK(merged.min_available(t, t + 1) == expected.at(t));
    }
  }
}
