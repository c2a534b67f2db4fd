#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "modesim/network.hpp"
#include "test_util.hpp"

using namespace modesim;

TEST_CASE("reference ring has 40 nodes, 40 edges, all degrees 2") {
  const NetworkTimeline tl = testutil::reference_ring();
  const Segment& seg = tl.segment(0);
  CHECK(seg.active.size() == 40);
  CHECK(seg.edges.size() == 40);
  CHECK(seg.leader == 1);
  for (int i = 1; i <= 40; ++i) CHECK(seg.degree(i) == 2);
  CHECK(seg.component.size() == 40);
  CHECK(tl.n_bar() == 50);
}

TEST_CASE("smallest ring is a triangle") {
  const NetworkTimeline tl = build_ring(3, {"a", "a", "a"});
  const Segment& seg = tl.segment(0);
  CHECK(seg.edges.size() == 3);
  for (int i = 1; i <= 3; ++i) CHECK(seg.degree(i) == 2);
  CHECK_THROWS_AS(build_ring(2, {"a", "a"}), ConfigError);
}

TEST_CASE("4-ring Laplacian spectrum is {0, 2, 2, 4}") {
  const NetworkTimeline tl = build_ring(4, {"a", "b", "a", "b"});
  const Matrix lap = laplacian(tl.segment(0), tl.segment(0).component);
  Eigen::SelfAdjointEigenSolver<Matrix> eigs(lap);
  const Vector ev = eigs.eigenvalues();
  CHECK(ev(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ev(1) == doctest::Approx(2.0));
  CHECK(ev(2) == doctest::Approx(2.0));
  CHECK(ev(3) == doctest::Approx(4.0));
}

TEST_CASE("removing both edges of a node orphans it") {
  NetworkTimeline tl = build_ring(5, {"a", "b", "c", "d", "e"});
  ScenarioEvent ev1;
  ev1.time = 1.0;
  ev1.kind = EventKind::EdgeRemove;
  ev1.edge = {2, 3};
  tl = tl.apply_event(ev1);
  ScenarioEvent ev2 = ev1;
  ev2.time = 2.0;
  ev2.edge = {3, 4};
  tl = tl.apply_event(ev2);
  const Segment& seg = tl.segment(2);
  CHECK(seg.degree(3) == 0);
  CHECK(seg.component.size() == 4);
  CHECK_FALSE(seg.in_component(3));
  CHECK(seg.active.count(3) == 1);  // still present, just orphaned
}

TEST_CASE("node-join outside the admissible box is rejected") {
  const NetworkTimeline tl = build_ring(3, {"a", "b", "c"}, {}, 5);
  ScenarioEvent ev;
  ev.time = 1.0;
  ev.kind = EventKind::NodeJoin;
  ev.node = 4;
  ev.neighbors = {1};
  ev.attribute = "a";
  ev.init = 99.0;
  ev.init_box = Interval{-0.5, 5.5};
  CHECK_THROWS_AS(tl.apply_event(ev), AdmissibilityError);
  ev.init = 2.0;
  const NetworkTimeline tl2 = tl.apply_event(ev);
  CHECK(tl2.segment(1).component.size() == 4);
  CHECK(tl2.attrs().label_at(4, 1.0) == "a");

  ScenarioEvent no_init = ev;
  no_init.time = 2.0;
  no_init.node = 5;
  no_init.init.reset();
  CHECK_THROWS_AS(tl2.apply_event(no_init), AdmissibilityError);
}

TEST_CASE("splitting a ring keeps the leader's side") {
  // removing edges (2,3) and (5,6) of a 6-ring splits it; nodes 3..5 are on
  // the far side of the leader and leave the component of interest
  NetworkTimeline tl = build_ring(6, {"a", "a", "b", "b", "b", "a"});
  ScenarioEvent ev;
  ev.kind = EventKind::EdgeRemove;
  ev.time = 1.0;
  ev.edge = {2, 3};
  tl = tl.apply_event(ev);
  ev.time = 2.0;
  ev.edge = {5, 6};
  tl = tl.apply_event(ev);
  const Segment& seg = tl.segment(2);
  CHECK(seg.component == std::vector<int>{1, 2, 6});
  CHECK_FALSE(seg.in_component(4));
}

TEST_CASE("edges touching inactive nodes are inadmissible") {
  NetworkTimeline tl = build_ring(4, {"a", "a", "b", "b"}, {}, 6);
  ScenarioEvent ev;
  ev.kind = EventKind::EdgeAdd;
  ev.time = 0.5;
  ev.edge = {1, 6};  // 6 never joined
  CHECK_THROWS_AS(tl.apply_event(ev), AdmissibilityError);
  ev.edge = {1, 3};
  const NetworkTimeline tl2 = tl.apply_event(ev);
  CHECK(tl2.segment(1).has_edge(1, 3));
  CHECK_THROWS_AS(tl2.apply_event(ev), AdmissibilityError);  // same time again
}

TEST_CASE("leader departure follows the configured policy") {
  ScenarioEvent ev;
  ev.kind = EventKind::NodeLeave;
  ev.time = 1.0;
  ev.node = 1;
  const NetworkTimeline fixed = build_ring(4, {"a", "a", "b", "b"});
  CHECK_THROWS_AS(fixed.apply_event(ev), AdmissibilityError);
  const NetworkTimeline roaming = fixed.with_policy(LeaderPolicy::LowestActiveId);
  const NetworkTimeline after = roaming.apply_event(ev);
  CHECK(after.segment(1).leader == 2);
  CHECK(after.segment(1).component == std::vector<int>{2, 3, 4});
}

TEST_CASE("dwell check flags close event pairs") {
  NetworkTimeline tl = build_ring(4, {"a", "a", "b", "b"});
  CHECK(check_dwell(tl, 1.56).all_pass);  // vacuous

  ScenarioEvent ev;
  ev.kind = EventKind::AttributeChange;
  ev.node = 2;
  ev.attribute = "b";
  ev.time = 1e-9;
  NetworkTimeline base = tl.apply_event(ev);

  ScenarioEvent late = ev;
  late.attribute = "a";
  late.time = 2.0;
  CHECK(base.apply_event(late).events().size() == 2);
  CHECK(check_dwell(base.apply_event(late), 1.56).all_pass);

  ScenarioEvent early = late;
  early.time = 0.5;
  const DwellReport report = check_dwell(base.apply_event(early), 1.56);
  CHECK_FALSE(report.all_pass);
  REQUIRE(report.gaps.size() == 1);
  CHECK_FALSE(report.gaps[0].pass);
}

TEST_CASE("attribute table is a bijection and attributes stay in the universe") {
  const NetworkTimeline tl = testutil::reference_ring();
  const AttributeTable& attrs = tl.attrs();
  attrs.validate();
  for (int i = 1; i <= attrs.size(); ++i) CHECK(attrs.l_of(attrs.label_of(i)) == i);
  CHECK_THROWS_AS(attrs.l_of("not-a-label"), ConfigError);

  long count4 = 0;
  for (int node : tl.segment(0).component) {
    if (tl.attrs().label_at(node, 0.0) == "4") ++count4;
  }
  CHECK(count4 == 16);
}

TEST_CASE("event application is deterministic") {
  const NetworkTimeline base = build_ring(5, {"a", "b", "c", "d", "e"}, {}, 8);
  std::vector<ScenarioEvent> events;
  ScenarioEvent e1;
  e1.kind = EventKind::EdgeAdd;
  e1.time = 1.0;
  e1.edge = {1, 3};
  events.push_back(e1);
  ScenarioEvent e2;
  e2.kind = EventKind::AttributeChange;
  e2.time = 2.0;
  e2.node = 4;
  e2.attribute = "a";
  events.push_back(e2);

  auto run = [&]() {
    NetworkTimeline tl = base;
    for (const auto& ev : events) tl = tl.apply_event(ev);
    return tl;
  };
  const NetworkTimeline a = run();
  const NetworkTimeline b = run();
  REQUIRE(a.n_segments() == b.n_segments());
  for (int s = 0; s < a.n_segments(); ++s) {
    CHECK(a.segment(s).edges == b.segment(s).edges);
    CHECK(a.segment(s).active == b.segment(s).active);
    CHECK(a.segment(s).component == b.segment(s).component);
  }
  // the source timeline is untouched
  CHECK(base.n_segments() == 1);
}

TEST_CASE("every segment component is connected by traversal") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const NetworkTimeline tl = testutil::random_network(seed, 10, 5);
    const Segment& seg = tl.segment(0);
    const auto reachable = connected_component(seg, seg.leader);
    CHECK(reachable == seg.component);
  }
}
