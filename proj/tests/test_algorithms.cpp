#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "modesim/algorithms.hpp"
#include "test_util.hpp"

using namespace modesim;

namespace {

NetworkTimeline labelled_ring(const std::vector<int>& lvals, int omega, int n_bar = 0) {
  const auto universe = testutil::decimal_universe(omega);
  std::vector<std::string> labels;
  for (int l : lvals) labels.push_back(universe[static_cast<std::size_t>(l) - 1]);
  return build_ring(static_cast<int>(lvals.size()), labels, universe, n_bar);
}

RunOptions desk_options(int n_bar, int omega, std::uint64_t seed = 1) {
  RunOptions opts;
  opts.gains = select_gains(n_bar, omega, GainPreset::Desk);
  opts.seed = seed;
  opts.keep_trajectories = false;
  return opts;
}

}  // namespace

TEST_CASE("oracle mode over reference multisets") {
  const NetworkTimeline tl = labelled_ring({1, 1, 1, 1, 1, 2, 3, 4, 5, 6}, 6);
  const AttributeTable& attrs = tl.attrs();
  std::vector<std::string> labels;
  for (int node : tl.segment(0).component) labels.push_back(attrs.label_at(node, 0.0));
  const ModeOracle oracle = oracle_mode(labels, attrs);
  CHECK(oracle.modes == std::vector<std::string>{"1"});
  CHECK(oracle.frequency == 5);

  const NetworkTimeline tied = labelled_ring({1, 2, 3, 4, 4, 5, 6, 7, 8, 8}, 8);
  std::vector<std::string> tied_labels;
  for (int node : tied.segment(0).component) {
    tied_labels.push_back(tied.attrs().label_at(node, 0.0));
  }
  const ModeOracle both = oracle_mode(tied_labels, tied.attrs());
  CHECK(both.modes == std::vector<std::string>{"4", "8"});
  CHECK(both.frequency == 2);

  const ModeOracle single = oracle_mode({"4"}, attrs);
  CHECK(single.modes == std::vector<std::string>{"4"});
  CHECK(single.frequency == 1);
  CHECK_THROWS_AS(oracle_mode({}, attrs), ConfigError);
}

TEST_CASE("oracle k-th smallest on the reference histogram") {
  const NetworkTimeline tl = testutil::reference_ring();
  std::vector<std::string> labels;
  for (int node : tl.segment(0).component) labels.push_back(tl.attrs().label_at(node, 0.0));
  CHECK(oracle_kth(labels, 14, tl.attrs()) == "3");
  CHECK(oracle_kth(labels, 28, tl.attrs()) == "4");
  CHECK(oracle_kth(labels, 20, tl.attrs()) == "4");
  CHECK(oracle_kth(labels, 40, tl.attrs()) == "10");
  CHECK(oracle_kth(labels, 1, tl.attrs()) == "1");
  CHECK_THROWS_AS(oracle_kth(labels, 0, tl.attrs()), ConfigError);
  CHECK_THROWS_AS(oracle_kth(labels, 41, tl.attrs()), ConfigError);
}

TEST_CASE("candidate positions with the ceiling truncation") {
  CHECK(candidate_positions(40, 3) == std::vector<int>{14, 28});
  CHECK(candidate_positions(40, 2) == std::vector<int>{20, 40});
  CHECK(candidate_positions(10, 5) == std::vector<int>{2, 4, 6, 8, 10});
  CHECK(candidate_positions(10, 1) == std::vector<int>{10});  // max consensus
  CHECK_THROWS_AS(candidate_positions(10, 11), ConfigError);
}

TEST_CASE("k_star is the smallest K with f_star >= ceil(N/K)") {
  CHECK(kstar(5, 10) == 2);
  CHECK(kstar(16, 40) == 3);
  CHECK(kstar(10, 10) == 1);
  CHECK(kstar(1, 10) == 10);
  CHECK_THROWS_AS(kstar(0, 10), ConfigError);
}

TEST_CASE("state-variable budgets") {
  CHECK(state_count(AlgorithmId::AprioriK, 2) == 5);
  CHECK(state_count(AlgorithmId::AprioriK, 5) == 11);
  CHECK(state_count(AlgorithmId::AdaptiveK, 3) == 13);
  CHECK(state_count(AlgorithmId::Direct, 10) == 10);
  CHECK(state_count_apriori(3, true) == 5);
  CHECK(state_count_apriori(3, false) == 7);
  // 2K+1 < |Omega| marks when candidate selection beats the direct scan
  CHECK(state_count(AlgorithmId::AprioriK, 2) < 6);
  CHECK(state_count(AlgorithmId::AprioriK, 5) > 8);
}

TEST_CASE("pigeonhole candidate coverage on random multisets") {
  Rng rng(2024);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = static_cast<int>(uniform_int(rng, 1, 12));
    const int omega = static_cast<int>(uniform_int(rng, 1, 6));
    std::vector<int> ls;
    for (int i = 0; i < n; ++i) ls.push_back(static_cast<int>(uniform_int(rng, 1, omega)));
    std::sort(ls.begin(), ls.end());
    for (int big_k = 1; big_k <= n; ++big_k) {
      const int p = (n + big_k - 1) / big_k;
      const auto positions = candidate_positions(n, big_k);
      for (int value = 1; value <= omega; ++value) {
        const long freq = std::count(ls.begin(), ls.end(), value);
        if (freq < p) continue;
        bool covered = false;
        for (int pos : positions) {
          if (pos <= n && ls[static_cast<std::size_t>(pos) - 1] == value) covered = true;
        }
        CHECK(covered);
      }
    }
  }
}

TEST_CASE("direct algorithm finds the mode on a desk ring") {
  const NetworkTimeline tl = labelled_ring({1, 1, 1, 2, 2, 3, 3, 3}, 3, 10);
  RunOptions opts = desk_options(10, 3);
  opts.tie_break = TieBreak::LowestL;
  const AlgorithmRun run = run_algorithm1(tl, opts);
  CHECK(run.all_pass());
  CHECK(run.mode == "1");  // tie between "1" and "3" broken at the lowest index
  CHECK(run.mode_frequency == 3);
  CHECK(run.frequencies.at("2") == 2);
  CHECK(run.state_var_count == 3);
  CHECK(run.elapsed_sim > 0);
  REQUIRE(run.mode_per_agent.size() == 8);
  for (const auto& label : run.mode_per_agent) CHECK(label == "1");

  RunOptions high = opts;
  high.tie_break = TieBreak::HighestL;
  CHECK(run_algorithm1(tl, high).mode == "3");
}

TEST_CASE("direct algorithm via the vector counter") {
  const NetworkTimeline tl = labelled_ring({2, 2, 2, 2, 1, 3}, 3, 8);
  RunOptions opts = desk_options(8, 3);
  opts.use_counter = true;
  const AlgorithmRun run = run_algorithm1(tl, opts);
  CHECK(run.all_pass());
  CHECK(run.mode == "2");
  CHECK(run.frequencies.at("2") == 4);
  CHECK(run.frequencies.at("1") == 1);
  CHECK(run.frequencies.at("3") == 1);
}

TEST_CASE("single-attribute network returns that attribute with frequency N") {
  const NetworkTimeline tl = build_ring(5, {"only", "only", "only", "only", "only"}, {"only"}, 6);
  RunOptions opts = desk_options(6, 1);
  const AlgorithmRun run = run_algorithm1(tl, opts);
  CHECK(run.all_pass());
  CHECK(run.mode == "only");
  CHECK(run.mode_frequency == 5);
}

TEST_CASE("mode is invariant under relabeling of the universe") {
  const std::vector<std::string> labels{"red", "blue", "red", "green", "red", "blue"};
  const std::vector<std::string> order_a{"red", "green", "blue"};
  const std::vector<std::string> order_b{"green", "blue", "red"};
  const NetworkTimeline tl_a = build_ring(6, labels, order_a, 8);
  const NetworkTimeline tl_b = build_ring(6, labels, order_b, 8);
  RunOptions opts = desk_options(8, 3);
  const AlgorithmRun run_a = run_algorithm1(tl_a, opts);
  const AlgorithmRun run_b = run_algorithm1(tl_b, opts);
  CHECK(run_a.mode == "red");
  CHECK(run_b.mode == "red");
  CHECK(run_a.mode_frequency == run_b.mode_frequency);
}

TEST_CASE("a-priori-K algorithm on the ten-agent example") {
  // l-values [1,1,1,1,1,2,3,4,5,6] with f* = 5 known: K = 2, positions 5 and
  // 10, candidates l = 1 and l = 6, mode "1"
  const NetworkTimeline tl = labelled_ring({1, 1, 1, 1, 1, 2, 3, 4, 5, 6}, 6, 10);
  RunOptions opts = desk_options(10, 6);
  const AlgorithmRun run = run_algorithm2(tl, opts, 5);
  CHECK(run.all_pass());
  CHECK(run.size_estimate == 10);
  CHECK(run.k_trace == std::vector<int>{2});
  REQUIRE(run.candidates.size() == 2);
  CHECK(run.candidates[0].position == 5);
  CHECK(run.candidates[0].attribute == "1");
  CHECK(run.candidates[0].frequency == 5);
  CHECK(run.candidates[1].position == 10);
  CHECK(run.candidates[1].attribute == "6");
  CHECK(run.candidates[1].frequency == 1);
  CHECK(run.mode == "1");
  CHECK(run.state_var_count == 5);  // 2K+1
  CHECK(run.warnings.empty());
}

TEST_CASE("a-priori-K warns when f_star is not actually a lower bound") {
  const NetworkTimeline tl = labelled_ring({1, 1, 2, 3, 4, 5}, 6, 8);
  RunOptions opts = desk_options(8, 6);
  const AlgorithmRun run = run_algorithm2(tl, opts, 5);  // true f* is 2
  CHECK_FALSE(run.warnings.empty());
}

TEST_CASE("K = 1 reduces to max consensus") {
  const NetworkTimeline tl = labelled_ring({2, 2, 2, 1, 3}, 3, 6);
  RunOptions opts = desk_options(6, 3);
  const AlgorithmRun run = run_algorithm2(tl, opts, 5, 1);
  REQUIRE(run.candidates.size() == 1);
  CHECK(run.candidates[0].position == 5);
  CHECK(run.candidates[0].attribute == "3");  // the maximum l value
  CHECK(run.mode == "3");                     // sole candidate
}

TEST_CASE("adaptive algorithm grows K until the pigeonhole criterion holds") {
  // all-same network: round K = 2 sees frequency N and terminates
  const NetworkTimeline same = build_ring(6, std::vector<std::string>(6, "a"), {"a", "b"}, 8);
  RunOptions opts = desk_options(8, 2);
  const AlgorithmRun run = run_algorithm3(same, opts);
  CHECK(run.all_pass());
  CHECK(run.k_trace == std::vector<int>{1, 2});
  CHECK(run.mode == "a");
  CHECK(run.mode_frequency == 6);
  CHECK(run.state_var_count == state_count(AlgorithmId::AdaptiveK, 2));
}

TEST_CASE("adaptive algorithm short-circuits a single-agent network") {
  const NetworkTimeline solo = build_path(1, {"z"}, {"y", "z"}, 4);
  RunOptions opts = desk_options(4, 2);
  const AlgorithmRun run = run_algorithm3(solo, opts);
  CHECK(run.mode == "z");
  CHECK(run.k_trace == std::vector<int>{1});
  CHECK(run.all_pass());
}

TEST_CASE("fixed-interval cadence rounds each round up to the check period") {
  const NetworkTimeline same = build_ring(6, std::vector<std::string>(6, "a"), {"a", "b"}, 8);
  RunOptions opts = desk_options(8, 2);
  opts.lock_gated = false;
  opts.cadence_interval = 0.6;
  const AlgorithmRun run = run_algorithm3(same, opts);
  CHECK(run.all_pass());
  // elapsed time beyond the size phase is a whole number of check periods
  const Scalar rounds_part = run.elapsed_sim - run.lock_times.at("x");
  const Scalar quotient = rounds_part / 0.6;
  CHECK(std::abs(quotient - std::round(quotient)) < 1e-9);
}

TEST_CASE("explicit K without a frequency bound runs without spurious warnings") {
  const NetworkTimeline tl = labelled_ring({1, 1, 1, 2, 3}, 3, 6);
  RunOptions opts = desk_options(6, 3);
  const AlgorithmRun run = run_algorithm2(tl, opts, 0, 2);
  CHECK(run.warnings.empty());
  CHECK(run.mode == "1");
  CHECK_THROWS_AS(run_algorithm2(tl, opts, 0, 0), ConfigError);
}

TEST_CASE("oracle equivalence across all three algorithms on random scenarios") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const NetworkTimeline tl = testutil::random_network(seed, 8, 4, 10);
    const AttributeTable& attrs = tl.attrs();
    std::vector<std::string> labels;
    for (int node : tl.segment(0).component) labels.push_back(attrs.label_at(node, 0.0));
    const ModeOracle oracle = oracle_mode(labels, attrs);
    RunOptions opts = desk_options(10, attrs.size(), seed);

    const AlgorithmRun direct = run_algorithm1(tl, opts);
    const AlgorithmRun apriori =
        run_algorithm2(tl, opts, static_cast<int>(oracle.frequency));
    const AlgorithmRun adaptive = run_algorithm3(tl, opts);
    for (const AlgorithmRun* run : {&direct, &apriori, &adaptive}) {
      INFO("seed ", seed, " algorithm ", to_string(run->algorithm));
      CHECK(run->all_pass());
      const long count = std::count(labels.begin(), labels.end(), run->mode);
      CHECK(count == oracle.frequency);
    }
  }
}

TEST_CASE("combined realization finds the mode on a desk ring") {
  const NetworkTimeline tl = labelled_ring({1, 1, 1, 1, 2, 2, 3, 4, 4}, 4, 10);
  RunOptions opts = desk_options(10, 4);
  opts.combined = true;
  const AlgorithmRun run = run_algorithm2(tl, opts, 4);
  CHECK(run.all_pass());
  CHECK(run.mode == "1");
  CHECK(run.mode_frequency == 4);
  CHECK(run.size_estimate == 9);
}

TEST_CASE("combined realization reproduces the reference-ring mode") {
  // same 40-agent ring as the sequential runs; speed gains lowered so the
  // single coupled system integrates in reasonable wall time, couplings
  // kept large enough that every rounded equilibrium is exact
  const NetworkTimeline tl = testutil::reference_ring();
  RunOptions opts;
  opts.gains.h_x = 100.0;
  opts.gains.gamma_x = 5000.0;
  opts.gains.h_y = 100.0;
  opts.gains.gamma_y = 2000.0;
  opts.gains.beta = 0.05;
  opts.gains.g = 26.0;  // > beta n_bar |Omega| = 25
  opts.gains.gamma_z = 40000.0;
  opts.seed = 11;
  opts.keep_trajectories = false;
  opts.horizon = 40.0;
  opts.combined = true;
  const AlgorithmRun run = run_algorithm2(tl, opts, 16, 3);
  CHECK(run.mode == "4");
  CHECK(run.mode_l == 4);
  CHECK(run.size_estimate == 40);
  REQUIRE(run.candidates.size() == 2);
  CHECK(run.candidates[0].position == 14);
  CHECK(run.candidates[1].position == 28);
  CHECK(run.candidates[0].attribute == "3");
  CHECK(run.candidates[1].attribute == "4");
  CHECK(run.state_var_count == 5);  // 2K-1 with the truncation
}
