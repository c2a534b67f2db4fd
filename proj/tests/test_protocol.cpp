#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "modesim/bounds.hpp"
#include "modesim/protocol.hpp"
#include "test_util.hpp"

using namespace modesim;

namespace {

ProtocolSystem make(const NetworkTimeline& tl, SystemSpec spec, const GainSet& gains) {
  return build_system(tl.segment(0), tl.attrs(), 0.0, tl.n_bar(), gains, spec);
}

GainSet mild_gains() {
  GainSet g;
  g.h_x = 1.0;
  g.gamma_x = 8.0;
  g.h_y = 1.0;
  g.gamma_y = 8.0;
  g.beta = 0.1;
  g.g = 5.0;
  g.gamma_z = 100.0;
  return g;
}

}  // namespace

TEST_CASE("indicator compares labels and rejects unknown ones") {
  const NetworkTimeline tl = testutil::reference_ring();
  const AttributeTable& attrs = tl.attrs();
  CHECK(indicator(attrs, "4", "4") == 1);
  CHECK(indicator(attrs, "4", "7") == 0);
  CHECK_THROWS_AS(indicator(attrs, "4", "zzz"), ConfigError);

  long total = 0;
  for (int node : tl.segment(0).component) {
    total += indicator(attrs, "4", attrs.label_at(node, 0.0));
  }
  CHECK(total == 16);
}

TEST_CASE("phi_k branch values") {
  // middle branch
  CHECK(phi_k(5.0, 5, 40, 14, 0.02, 10.0) == 0.0);
  // below: beta (z - l) - g k
  CHECK(phi_k(2.0, 5, 40, 14, 0.02, 10.0) == doctest::Approx(-140.06).epsilon(1e-12));
  // above: beta (z - l) + g (N + 1 - k)
  CHECK(phi_k(9.0, 5, 40, 28, 0.02, 10.0) == doctest::Approx(130.08).epsilon(1e-12));

  const NetworkTimeline tl = testutil::reference_ring();
  CHECK(phi_k(2.0, "5", tl.attrs(), 40, 14, 0.02, 10.0) == doctest::Approx(-140.06));
  CHECK_THROWS_AS(phi_k(2.0, "5", tl.attrs(), 40, 0, 0.02, 10.0), ConfigError);
}

TEST_CASE("phi_k is nondecreasing per branch with a g(N+1) jump at l(a)") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(uniform_int(rng, 2, 40));
    const int k = static_cast<int>(uniform_int(rng, 1, n));
    const int l = static_cast<int>(uniform_int(rng, 1, 10));
    const Scalar beta = uniform_real(rng, 0.01, 1.0);
    const Scalar g = uniform_real(rng, 1.0, 20.0);
    const Scalar z1 = uniform_real(rng, -20.0, 60.0);
    const Scalar z2 = uniform_real(rng, -20.0, 60.0);
    const Scalar lo = std::min(z1, z2), hi = std::max(z1, z2);
    const bool same_branch = (hi < l) || (lo > l);
    if (same_branch) {
      CHECK(phi_k(hi, l, n, k, beta, g) >= phi_k(lo, l, n, k, beta, g));
    }
    // branch limits around l(a)
    const Scalar eps = 1e-9;
    const Scalar below = phi_k(l - eps, l, n, k, beta, g);
    const Scalar above = phi_k(l + eps, l, n, k, beta, g);
    CHECK(below == doctest::Approx(-g * k).epsilon(1e-6));
    CHECK(above == doctest::Approx(g * (n + 1 - k)).epsilon(1e-6));
    CHECK(above - below == doctest::Approx(g * (n + 1)).epsilon(1e-6));
  }
}

TEST_CASE("size system feeds ones through the leader-damped drift") {
  const NetworkTimeline tl = testutil::reference_ring();
  const GainSet gains = select_gains(50, 10, GainPreset::PaperExact, 40);
  SystemSpec spec;
  spec.kind = ProtocolKind::Size;
  const ProtocolSystem sys = make(tl, spec, gains);
  CHECK(sys.input == Matrix::Ones(40, 1));
  // leader row of gamma L + e1 e1^T carries the extra damping unit
  CHECK(sys.sym(0, 0) == doctest::Approx(gains.gamma_x * 2 + 1));
  CHECK(sys.sym(1, 1) == doctest::Approx(gains.gamma_x * 2));
  // drift/input accessors expose -h A and h b
  CHECK(sys.drift()(0, 0) == doctest::Approx(-gains.h_x * (gains.gamma_x * 2 + 1)));
  CHECK(sys.scaled_input()(0, 0) == doctest::Approx(gains.h_x));
}

TEST_CASE("frequency of an absent attribute has zero input and zero equilibrium") {
  const NetworkTimeline tl = build_ring(4, {"a", "a", "b", "b"}, {"a", "b", "c"});
  SystemSpec spec;
  spec.kind = ProtocolKind::Frequency;
  spec.attribute = "c";
  const ProtocolSystem sys = make(tl, spec, mild_gains());
  CHECK(sys.input.cwiseAbs().maxCoeff() == 0.0);
  CHECK(equilibrium(sys).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("counter input rows are unit vectors e_{l(a_i)}") {
  const NetworkTimeline tl = testutil::reference_ring();
  SystemSpec spec;
  spec.kind = ProtocolKind::Counter;
  const ProtocolSystem sys = make(tl, spec, mild_gains());
  CHECK(sys.state_dim == 10);
  for (int i = 0; i < sys.n; ++i) {
    CHECK(sys.input.row(i).sum() == 1.0);
    CHECK(sys.input(i, sys.lvals[static_cast<std::size_t>(i)] - 1) == 1.0);
  }
}

TEST_CASE("reference-ring frequency equilibrium puts the count at the leader") {
  const NetworkTimeline tl = testutil::reference_ring();
  const GainSet gains = select_gains(50, 10, GainPreset::PaperExact, 40);
  SystemSpec spec;
  spec.kind = ProtocolKind::Frequency;
  spec.attribute = "4";
  const ProtocolSystem sys = make(tl, spec, gains);
  const Matrix y_star = equilibrium(sys);
  CHECK(y_star(0, 0) == doctest::Approx(16.0).epsilon(1e-10));
  const Scalar bound = deviation_bound(40, gains.gamma_y);
  CHECK(bound == doctest::Approx(0.3535533905932738));
  for (int i = 0; i < sys.n; ++i) {
    CHECK(std::abs(y_star(i, 0) - y_star(0, 0)) < bound);
  }
}

TEST_CASE("two-agent path equilibrium solved by hand") {
  const NetworkTimeline tl = build_path(2, {"a", "a"});
  GainSet gains = mild_gains();
  gains.gamma_y = 8.0;
  SystemSpec spec;
  spec.kind = ProtocolKind::Frequency;
  spec.attribute = "a";
  const ProtocolSystem sys = make(tl, spec, gains);
  // (gamma L + e1 e1^T) = [[9, -8], [-8, 8]], b = (1, 1) -> y* = (2, 2.125)
  const Matrix y_star = equilibrium(sys);
  CHECK(y_star(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(y_star(1, 0) == doctest::Approx(2.125).epsilon(1e-12));
  CHECK(std::abs(y_star(1, 0) - y_star(0, 0)) <= deviation_bound(2, 8.0) + 1e-12);
}

TEST_CASE("leader-sum identity holds on random graphs") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const NetworkTimeline tl = testutil::random_network(seed, 8, 4);
    GainSet gains = mild_gains();
    gains.gamma_y = std::pow(static_cast<Scalar>(tl.segment(0).component.size()), 3);
    SystemSpec spec;
    spec.kind = ProtocolKind::Frequency;
    spec.attribute = tl.attrs().universe().front();
    const ProtocolSystem sys = make(tl, spec, gains);
    const Matrix y_star = equilibrium(sys);
    CHECK(std::abs(y_star(sys.leader_pos, 0) - sys.input.col(0).sum()) < 1e-9);
    const Scalar bound = deviation_bound(sys.n, gains.gamma_y);
    for (int i = 0; i < sys.n; ++i) {
      CHECK(std::abs(y_star(i, 0) - y_star(sys.leader_pos, 0)) < bound);
    }
  }
}

TEST_CASE("orphans are frozen under every kind") {
  // ring plus a node that joins and is then cut loose
  NetworkTimeline tl = build_ring(5, {"a", "b", "a", "b", "a"}, {"a", "b"}, 6);
  ScenarioEvent join;
  join.kind = EventKind::NodeJoin;
  join.time = 1.0;
  join.node = 6;
  join.neighbors = {1};
  join.attribute = "b";
  join.init = 1.0;
  tl = tl.apply_event(join);
  ScenarioEvent cut;
  cut.kind = EventKind::EdgeRemove;
  cut.time = 2.0;
  cut.edge = {1, 6};
  tl = tl.apply_event(cut);
  const Segment& seg = tl.segment(2);
  REQUIRE(seg.degree(6) == 0);

  for (ProtocolKind kind : {ProtocolKind::Size, ProtocolKind::Frequency, ProtocolKind::Counter,
                            ProtocolKind::Kth, ProtocolKind::Combined}) {
    SystemSpec spec;
    spec.kind = kind;
    spec.attribute = "a";
    spec.k = 2;
    spec.big_k = 2;
    const ProtocolSystem sys = build_system(seg, tl.attrs(), 2.0, tl.n_bar(), mild_gains(), spec);
    Matrix state = Matrix::Constant(6, sys.state_dim, 1.25);
    Matrix deriv;
    sys.eval_rhs(state, deriv);
    CHECK(deriv.row(5).cwiseAbs().maxCoeff() == 0.0);  // orphan frozen
    CHECK(deriv.row(0).cwiseAbs().maxCoeff() > 0.0);   // ring keeps moving
  }
}

TEST_CASE("combined field is stationary for on-target agents") {
  const NetworkTimeline tl = build_ring(4, {"a", "a", "a", "b"}, {"a", "b"}, 6);
  GainSet gains = mild_gains();
  SystemSpec spec;
  spec.kind = ProtocolKind::Combined;
  spec.big_k = 2;
  const ProtocolSystem sys = make(tl, spec, gains);
  REQUIRE(sys.pairs == 2);  // ceil(4/2) = 4/2, no truncation
  REQUIRE(sys.state_dim == 5);

  // on the equal-consensus manifold the sgn coupling is zero everywhere;
  // agents whose own l(a_i) equals the common z sit on the middle phi
  // branch, so their z-field vanishes entirely
  Matrix state(6, 5);
  for (int row = 0; row < 6; ++row) {
    state(row, 0) = 4.0;  // x at N
    state(row, 1) = 1.0;  // common z_1 = l("a")
    state(row, 2) = 2.0;  // common z_2 = l("b")
    state(row, 3) = 0.0;
    state(row, 4) = 0.0;
  }
  Matrix deriv;
  sys.eval_rhs(state, deriv);
  for (int row = 0; row < 3; ++row) {  // the "a" holders
    CHECK(deriv(row, 1) == 0.0);
    CHECK(deriv(row, 2) != 0.0);
  }
  CHECK(deriv(3, 2) == 0.0);  // the "b" holder
  CHECK(deriv(3, 1) != 0.0);

  CHECK(rounded_match(2.49, 2) == 1);
  CHECK(rounded_match(2.51, 2) == 0);
}

TEST_CASE("phi_k_live targets k ceil(<x>/K) positions") {
  // n_hat = 40, K = 3 -> p = 14; k = 2 targets the 28th smallest
  CHECK(phi_k_live(2.0, 5, 40, 3, 2, 0.02, 10.0) ==
        doctest::Approx(0.02 * (2.0 - 5.0) - 10.0 * 2 * 14));
  CHECK(phi_k_live(9.0, 5, 40, 3, 2, 0.02, 10.0) ==
        doctest::Approx(0.02 * (9.0 - 5.0) + 10.0 * (40 + 1 - 28)));
  CHECK(phi_k_live(5.0, 5, 40, 3, 2, 0.02, 10.0) == 0.0);
}

TEST_CASE("combined truncation drops the out-of-range candidate pair") {
  const NetworkTimeline tl = testutil::reference_ring();
  SystemSpec spec;
  spec.kind = ProtocolKind::Combined;
  spec.big_k = 3;
  const ProtocolSystem sys = make(tl, spec, mild_gains());
  CHECK(sys.truncated);
  CHECK(sys.pairs == 2);  // ceil(40/3) = 14 > 40/3
  CHECK(sys.state_dim == 5);

  SystemSpec even;
  even.kind = ProtocolKind::Combined;
  even.big_k = 2;
  const ProtocolSystem sys2 = make(tl, even, mild_gains());
  CHECK_FALSE(sys2.truncated);
  CHECK(sys2.pairs == 2);
}

TEST_CASE("paper-compliant mode rejects undersized gains") {
  const NetworkTimeline tl = testutil::reference_ring();
  SystemSpec spec;
  spec.kind = ProtocolKind::Frequency;
  spec.attribute = "4";
  spec.paper_compliant = true;
  GainSet weak = select_gains(50, 10, GainPreset::PaperStrict);
  weak.gamma_y = 10.0;
  CHECK_THROWS_AS(make(tl, spec, weak), ConfigError);
  CHECK_NOTHROW(make(tl, spec, select_gains(50, 10, GainPreset::PaperStrict)));
}

TEST_CASE("mhat picks the candidate with the largest frequency estimate") {
  const NetworkTimeline tl = build_ring(4, {"a", "a", "a", "b"}, {"a", "b"}, 6);
  SystemSpec spec;
  spec.kind = ProtocolKind::Combined;
  spec.big_k = 2;
  const ProtocolSystem sys = make(tl, spec, mild_gains());
  Matrix state = Matrix::Zero(6, 5);
  state(0, 1) = 2.0;  // z_1
  state(0, 2) = 1.0;  // z_2
  state(0, 3) = 1.2;  // y_1
  state(0, 4) = 2.9;  // y_2 wins
  CHECK(sys.mhat(state, 1) == 1);
  state(0, 3) = 3.2;  // now y_1 wins
  CHECK(sys.mhat(state, 1) == 2);
}
