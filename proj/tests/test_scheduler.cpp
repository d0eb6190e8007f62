#include <doctest.h>

#include "support/oracles.hpp"
#include "tsched/error.hpp"
#include "tsched/scheduler.hpp"

using namespace tsched;

namespace {

Topology testbed() {
  Topology topo;
  topo.add_node("gs");
  topo.add_node("tschedUPB1");
  topo.add_node("tschedUPB2");
  topo.add_link("link2", "gs", "tschedUPB2", 100000);
  topo.add_link("link1", "tschedUPB1", "tschedUPB2", 50000);
  return topo;
}

RequestSpec transfer(const std::string& id, Kilobits size, Priority priority,
                     TimeConstraint constraint = TimeConstraint::asap()) {
  RequestSpec spec;
  spec.id = id;
  spec.user = "alex";
  spec.kind = RequestKind::kTransfer;
  spec.source = "tschedUPB1";
  spec.dest = "tschedUPB2";
  spec.size = size;
  spec.priority = priority;
  spec.constraint = constraint;
  return spec;
}

RequestSpec reservation(const std::string& id, TimeMs start, TimeMs duration, Kbps bandwidth,
                        Priority priority) {
  RequestSpec spec;
  spec.id = id;
  spec.user = "alex";
  spec.kind = RequestKind::kReservation;
  spec.source = "tschedUPB1";
  spec.dest = "tschedUPB2";
  spec.bandwidth = bandwidth;
  spec.start = start;
  spec.duration = duration;
  spec.priority = priority;
  spec.constraint = TimeConstraint::not_after(start);
  return spec;
}

}  // namespace

TEST_CASE("first auto transfer on a free path gets the full bottleneck") {
  Topology topo = testbed();
  Scheduler sched(topo);
  auto offers = sched.submit(transfer("alex-145", 5000000, 1));
  REQUIRE(offers.size() == 1);
  CHECK(offers[0].request.path.id() == "link1");
  CHECK(offers[0].request.allocated_bandwidth == 50000);
  CHECK(offers[0].request.start == 0);
  CHECK(offers[0].request.duration == 100000);
  CHECK(offers[0].conforming);
}

TEST_CASE("submit preconditions") {
  Topology topo = testbed();
  Scheduler sched(topo);
  RequestSpec bad = transfer("x", 1000, 1);
  bad.dest = bad.source;
  CHECK_THROWS_AS(sched.submit(bad), Error);

  // Directed topology: gs is unreachable from tschedUPB1's side.
  RequestSpec unreachable = transfer("y", 1000, 1);
  unreachable.source = "tschedUPB1";
  unreachable.dest = "gs";
  CHECK_THROWS_AS(sched.submit(unreachable), Error);
}

TEST_CASE("accept promotes the offer and releases siblings") {
  Topology topo;
  for (const char* n : {"A", "B", "D"}) topo.add_node(n);
  topo.add_link("ab", "A", "B", 50000);
  topo.add_link("bd", "B", "D", 50000);
  topo.add_link("ad", "A", "D", 40000);

  Scheduler sched(topo);
  RequestSpec spec = transfer("t1", 1000000, 1);
  spec.source = "A";
  spec.dest = "D";
  auto offers = sched.submit(spec);
  REQUIRE(offers.size() == 2);
  // Both offers hold capacity while the user decides.
  CHECK(sched.link_profile("ab").min_available(0, 20000) == 0);
  CHECK(sched.link_profile("ad").min_available(0, 25000) == 0);

  // Best offer first: the 50000 route ends at 20000, the 40000 one at 25000.
  CHECK(offers[0].request.path.id() == "ab+bd");
  CHECK(offers[0].request.end() == 20000);
  CHECK(offers[1].request.path.id() == "ad");
  CHECK(offers[1].request.end() == 25000);

  const Request& accepted = sched.accept(offers[0].id);
  CHECK(accepted.status == RequestStatus::kScheduled);
  CHECK(accepted.start == 0);
  CHECK(accepted.allocated_bandwidth == 50000);

  // The declined route is fully restored.
  BandwidthProfile fresh(40000, BandwidthProfile::Kind::kLink);
  CHECK(sched.link_profile("ad") == fresh);
  CHECK_THROWS_AS(sched.accept(offers[0].id), Error);
  CHECK_THROWS_AS(sched.accept(offers[1].id), Error);
}

TEST_CASE("offers expire once virtual time moves on") {
  Topology topo = testbed();
  Scheduler sched(topo);
  auto offers = sched.submit(transfer("t1", 1000000, 1));
  REQUIRE(offers.size() == 1);
  sched.set_now(1);
  sched.expire_offers();
  CHECK(sched.offers().empty());
  CHECK_THROWS_AS(sched.accept(offers[0].id), Error);
  BandwidthProfile fresh(50000, BandwidthProfile::Kind::kLink);
  CHECK(sched.link_profile("link1") == fresh);
}

TEST_CASE("constraint policies place as specified") {
  Topology topo = testbed();
  Scheduler sched(topo);
  Path path = topo.enumerate_paths("tschedUPB1", "tschedUPB2", 1)[0];

  SUBCASE("not_after on an empty path lands exactly on the bound") {
    auto p = sched.plan_fixed(transfer("q", 1000000, 1, TimeConstraint::not_after(7000)), path,
                              20000);
    REQUIRE(p.has_value());
    CHECK(p->start == 7000);
    CHECK(p->duration == 50000);
  }

  SUBCASE("not_after fails when the window is saturated until after the bound") {
    auto res = sched.submit(reservation("blocker", 0, 120000, 50000, 9));
    sched.accept(res[0].id);
    auto p = sched.plan_fixed(transfer("q", 1000000, 1, TimeConstraint::not_after(60000)), path,
                              30000);
    CHECK_FALSE(p.has_value());
  }

  SUBCASE("none picks the latest finite placement") {
    auto res = sched.submit(reservation("blocker", 20000, 10000, 50000, 9));
    sched.accept(res[0].id);
    // 10000 ms at 20000 kbps must end flush against the blocked region.
    auto p = sched.plan_fixed(transfer("q", 200000, 1, TimeConstraint::none()), path, 20000);
    REQUIRE(p.has_value());
    CHECK(p->start == 10000);

    oracle::Timeline tl =
        oracle::Timeline::build(50000, {ReservationSegment{20000, 30000, 50000}}, 60000);
    CHECK(p->start == oracle::last_fit_scan(tl, 10000, 20000, 0, 30000));
  }

  SUBCASE("not_before keeps the bound when free, else moves later") {
    auto p = sched.plan_fixed(transfer("q", 200000, 1, TimeConstraint::not_before(5000)), path,
                              20000);
    REQUIRE(p.has_value());
    CHECK(p->start == 5000);

    auto res = sched.submit(reservation("blocker", 5000, 10000, 50000, 9));
    sched.accept(res[0].id);
    auto moved = sched.plan_fixed(transfer("q", 200000, 1, TimeConstraint::not_before(5000)),
                                  path, 20000);
    REQUIRE(moved.has_value());
    CHECK(moved->start == 15000);
  }
}

TEST_CASE("auto bandwidth search: frozen halving outcomes") {
  Topology topo = testbed();

  SUBCASE("empty path keeps the bottleneck") {
    Scheduler sched(topo);
    Path path = topo.enumerate_paths("tschedUPB1", "tschedUPB2", 1)[0];
    auto search = sched.plan_auto(transfer("q", 5000000, 1), path);
    REQUIRE(search.best.has_value());
    CHECK(search.trials[*search.best].bandwidth == 50000);
    CHECK(search.trials[*search.best].start == 0);
    CHECK(search.trials[*search.best].end == 100000);
    // Halving doubles the duration at the same start, so the ends worsen.
    CHECK(search.trials[0].end < search.trials[1].end);
  }

  SUBCASE("large transfer: waiting for full bandwidth wins") {
    Scheduler sched(topo);
    Path path = topo.enumerate_paths("tschedUPB1", "tschedUPB2", 1)[0];
    // 30000 reserved on [0,100000): 20000 kbps stay free.
    auto res = sched.submit(reservation("busy", 0, 100000, 30000, 9));
    sched.accept(res[0].id);

    auto search = sched.plan_auto(transfer("q", 2000000, 1), path);
    REQUIRE(search.best.has_value());
    const auto& best = search.trials[*search.best];
    CHECK(best.bandwidth == 50000);
    CHECK(best.start == 100000);
    CHECK(best.end == 140000);
    CHECK(search.trials[1].bandwidth == 25000);
    CHECK(search.trials[1].end == 180000);
  }

  SUBCASE("small transfer: squeezing under the reservation wins") {
    Scheduler sched(topo);
    Path path = topo.enumerate_paths("tschedUPB1", "tschedUPB2", 1)[0];
    auto res = sched.submit(reservation("busy", 0, 100000, 30000, 9));
    sched.accept(res[0].id);

    auto search = sched.plan_auto(transfer("q", 100000, 1), path);
    REQUIRE(search.best.has_value());
    const auto& best = search.trials[*search.best];
    CHECK(best.bandwidth == 12500);
    CHECK(best.start == 0);
    CHECK(best.end == 8000);
    CHECK(search.trials[0].end == 102000);  // 50000 kbps had to wait
    CHECK(search.trials[1].end == 104000);  // 25000 kbps as well
  }
}

TEST_CASE("reservations: exact window, alternatives, bottleneck limit") {
  Topology topo = testbed();

  SUBCASE("uncontended reservation lands exactly as requested") {
    Scheduler sched(topo);
    auto offers = sched.submit(reservation("r1", 1000, 60000, 30000, 1));
    REQUIRE(offers.size() == 1);
    CHECK(offers[0].conforming);
    CHECK(offers[0].request.start == 1000);
    CHECK(offers[0].request.duration == 60000);
    CHECK(offers[0].request.allocated_bandwidth == 30000);
  }

  SUBCASE("above the bottleneck nothing can be promised") {
    Scheduler sched(topo);
    CHECK_THROWS_AS(sched.submit(reservation("r1", 0, 1000, 60000, 1)), Error);
  }

  SUBCASE("blocked window with no victims yields a non-conforming alternative") {
    Scheduler sched(topo);
    RequestSpec fixed = transfer("pinned", 2000000, 5, TimeConstraint::not_after(0));
    fixed.bandwidth = 50000;  // user bandwidth: immune to the cascade
    sched.accept(sched.submit(fixed)[0].id);

    auto offers = sched.submit(reservation("r1", 10000, 5000, 30000, 1));
    REQUIRE(offers.size() == 1);
    CHECK_FALSE(offers[0].conforming);
    CHECK(offers[0].request.start == 40000);  // first window after the pinned transfer
    CHECK(offers[0].request.duration == 5000);
    // The accepted alternative re-anchors its agreement to the new start.
    const Request& r = sched.accept(offers[0].id);
    CHECK(r.satisfies_constraint());
  }
}

TEST_CASE("user parameters survive into offers and the schedule") {
  Topology topo = testbed();
  Scheduler sched(topo);
  RequestSpec spec = transfer("fixed-bw", 1000000, 3, TimeConstraint::not_before(2500));
  spec.bandwidth = 12500;
  auto offers = sched.submit(spec);
  REQUIRE(offers.size() == 1);
  CHECK(offers[0].request.allocated_bandwidth == 12500);
  CHECK(offers[0].request.start == 2500);
  const Request& r = sched.accept(offers[0].id);
  CHECK(r.user_bandwidth == 12500);
  CHECK(r.allocated_bandwidth == 12500);
  CHECK(r.duration == 80000);
}

TEST_CASE("identical submission sequences produce identical schedules") {
  Topology topo = testbed();
  auto run = [&topo]() {
    Scheduler sched(topo);
    sched.accept(sched.submit(transfer("a", 2000000, 2))[0].id);
    sched.accept(sched.submit(reservation("b", 5000, 20000, 20000, 4))[0].id);
    sched.accept(sched.submit(transfer("c", 500000, 1, TimeConstraint::none()))[0].id);
    return sched.state_digest();
  };
  CHECK(run() == run());
}
