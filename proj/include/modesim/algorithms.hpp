#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modesim/bounds.hpp"
#include "modesim/integrate.hpp"
#include "modesim/network.hpp"
#include "modesim/protocol.hpp"

namespace modesim {

// Centralized oracles used for verification.
struct ModeOracle {
  std::vector<std::string> modes;  // every label attaining the maximum, in l order
  long frequency = 0;
};
ModeOracle oracle_mode(const std::vector<std::string>& attrs, const AttributeTable& table);
std::string oracle_kth(const std::vector<std::string>& attrs, int k, const AttributeTable& table);

// Order-statistic positions j ceil(N/K), j = 1..K, truncated to j <= K-1
// when ceil(N/K) > N/K.
std::vector<int> candidate_positions(int n, int big_k);

// Smallest K with f_star >= ceil(N/K).
int kstar(int f_star, int n);

enum class AlgorithmId { Direct, AprioriK, AdaptiveK };
std::string to_string(AlgorithmId id);
AlgorithmId algorithm_from_string(const std::string& s);

// State-variable budgets: direct |Omega|, a-priori-K 2K+1, adaptive
// K*(K*+1)+1. The truncated a-priori variant drops one pair (2K-1).
long state_count(AlgorithmId id, int param);
long state_count_apriori(int big_k, bool truncated);

enum class TieBreak { LowestL, HighestL };

struct RunOptions {
  GainSet gains;
  std::uint64_t seed = 1;
  Scalar window = 0.05;
  std::optional<Scalar> dt;
  std::optional<Scalar> horizon;  // per sub-run override; default scales the bound
  Scalar horizon_scale = 1.5;
  Scalar sample_interval = 0.01;
  TieBreak tie_break = TieBreak::LowestL;
  bool use_counter = false;       // direct algorithm via the vector counter
  bool combined = false;          // a-priori-K via the single combined ODE
  bool paper_compliant = false;
  bool lock_gated = true;         // false: fixed-interval round cadence
  Scalar cadence_interval = 0.6;
  int n_for_gamma_y = 0;          // gamma_y was selected for this known size
  bool keep_trajectories = true;
};

struct Candidate {
  int position = 0;
  std::string attribute;
  long frequency = 0;
  Scalar z_lock_time = 0.0;
  Scalar y_lock_time = 0.0;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct NamedTrajectory {
  std::string name;        // file stem
  std::string variable;    // x | y[a] | z[k] | xi[d] | mhat
  std::string description;
  Trajectory traj;
};

struct Round {
  int big_k = 1;
  std::vector<Candidate> candidates;
};

struct AlgorithmRun {
  AlgorithmId algorithm = AlgorithmId::Direct;
  std::vector<int> k_trace;
  std::vector<Scalar> k_trace_times;  // simulated time of each K value
  std::vector<Candidate> candidates;  // final round
  std::vector<Round> rounds;
  std::map<std::string, long> frequencies;
  std::string mode;
  int mode_l = 0;
  long mode_frequency = 0;
  std::vector<std::string> mode_per_agent;  // per component member
  long size_estimate = 0;
  Scalar elapsed_sim = 0.0;
  long state_var_count = 0;
  std::map<std::string, Scalar> lock_times;
  std::vector<std::string> warnings;
  std::vector<Verdict> verdicts;
  std::vector<NamedTrajectory> trajectories;

  bool all_pass() const;
};

// Frequency protocol for every attribute (or one vector-counter run),
// then the argmax.
AlgorithmRun run_algorithm1(const NetworkTimeline& timeline, const RunOptions& opts);

// Size estimate, k-th smallest runs at the candidate positions, frequency
// runs over the collected candidates, then the argmax. K comes from the
// supplied lower bound f_star unless given explicitly.
AlgorithmRun run_algorithm2(const NetworkTimeline& timeline, const RunOptions& opts, int f_star,
                            int explicit_k = 0);

// Adaptive variant: grows K from 1 until the best frequency seen satisfies
// the pigeonhole criterion.
AlgorithmRun run_algorithm3(const NetworkTimeline& timeline, const RunOptions& opts);

// Direct algorithm over an event-laden timeline: one piecewise run per
// attribute, re-locked per segment.
struct SegmentModeReport {
  int segment = 0;
  Scalar start_time = 0.0;
  std::string mode;
  long mode_frequency = 0;
  std::optional<Scalar> lock_time;  // absolute; lock held within the segment
  bool mode_matches_oracle = false;
  bool states_in_box_at_start = true;
  std::map<std::string, long> frequencies;
};

struct PiecewiseModeRun {
  std::vector<SegmentModeReport> segments;
  std::vector<NamedTrajectory> trajectories;
  std::vector<Verdict> verdicts;
  bool all_pass() const;
};

PiecewiseModeRun run_algorithm1_piecewise(const NetworkTimeline& timeline,
                                          const RunOptions& opts, Scalar horizon);

}  // namespace modesim
