#include "modesim/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace modesim {

namespace {

std::vector<std::string> member_labels(const Segment& seg, const AttributeTable& attrs) {
  std::vector<std::string> out;
  out.reserve(seg.component.size());
  for (int node : seg.component) out.push_back(attrs.label_at(node, seg.start_time));
  return out;
}

std::string argmax_label(const std::map<std::string, long>& freqs, const AttributeTable& attrs,
                         TieBreak tie) {
  std::string best;
  long best_freq = -1;
  int best_l = 0;
  for (const auto& [label, freq] : freqs) {
    const int l = attrs.l_of(label);
    const bool better =
        freq > best_freq ||
        (freq == best_freq && (tie == TieBreak::LowestL ? l < best_l : l > best_l));
    if (better) {
      best = label;
      best_freq = freq;
      best_l = l;
    }
  }
  return best;
}

struct SubRun {
  Trajectory traj;
  LockReport lock;
};

SubRun sub_run(const ProtocolSystem& system, Rng& rng, const RunOptions& opts, Scalar bound) {
  const Scalar window = std::max(opts.window, robust_lock_window(system));
  IntegrateOptions io;
  io.t0 = 0.0;
  io.horizon = opts.horizon.value_or(opts.horizon_scale * bound + window);
  io.dt = opts.dt;
  io.window = window;
  io.sample_interval = std::min(opts.sample_interval, opts.window / 5.0);
  io.early_stop = true;
  const Matrix y0 = random_initial_state(system, rng);
  SubRun run;
  run.traj = run_single(system, y0, io);
  run.lock = detect_lock(run.traj, window);
  run.lock.bound_used = bound;
  return run;
}

void add_verdict(AlgorithmRun& run, const std::string& name, bool pass,
                 const std::string& detail = "") {
  run.verdicts.push_back({name, pass, detail});
}

void add_lock_verdicts(AlgorithmRun& run, const std::string& label, const LockReport& lock) {
  std::ostringstream detail;
  if (lock.lock_time) {
    detail << "locked at " << *lock.lock_time << " s, bound " << lock.bound_used << " s";
  } else {
    detail << "no lock within horizon";
  }
  add_verdict(run, label + " locked within bound",
              lock.lock_time.has_value() && *lock.lock_time <= lock.bound_used, detail.str());
}

long locked_or_last(const SubRun& run, int dim_index) {
  if (run.lock.lock_time) return run.lock.locked_values[static_cast<std::size_t>(dim_index)];
  return run.traj.rounded.back()[static_cast<std::size_t>(dim_index)];
}

void keep_trajectory(AlgorithmRun& run, const RunOptions& opts, std::string name,
                     std::string variable, std::string description, Trajectory traj) {
  if (!opts.keep_trajectories) return;
  run.trajectories.push_back(
      {std::move(name), std::move(variable), std::move(description), std::move(traj)});
}

// Size-estimation phase shared by the a-priori and adaptive algorithms.
long run_size_phase(AlgorithmRun& run, const NetworkTimeline& timeline, const RunOptions& opts,
                    Rng& rng) {
  const Segment& seg = timeline.segment(0);
  SystemSpec spec;
  spec.kind = ProtocolKind::Size;
  spec.paper_compliant = opts.paper_compliant;
  const ProtocolSystem system =
      build_system(seg, timeline.attrs(), seg.start_time, timeline.n_bar(), opts.gains, spec);
  const Scalar t_x = time_bound_x(timeline.n_bar(), opts.gains.h_x);
  SubRun sub = sub_run(system, rng, opts, t_x);
  const long n_hat = locked_or_last(sub, 0);
  run.size_estimate = n_hat;
  if (sub.lock.lock_time) run.lock_times["x"] = *sub.lock.lock_time;
  add_lock_verdicts(run, "size estimate", sub.lock);
  add_verdict(run, "size estimate matches component size",
              n_hat == static_cast<long>(seg.component.size()),
              "estimate " + std::to_string(n_hat) + ", actual " +
                  std::to_string(seg.component.size()));
  run.elapsed_sim += sub.lock.lock_time.value_or(opts.horizon_scale * t_x);
  keep_trajectory(run, opts, "size", "x", "network-size estimate at each agent",
                  std::move(sub.traj));
  return n_hat;
}

struct RoundResult {
  std::vector<Candidate> candidates;
  std::map<std::string, long> frequencies;
  Scalar duration = 0.0;
  long best_frequency = 0;
};

// One batch of k-th smallest runs at the candidate positions followed by
// frequency runs over the collected attributes.
RoundResult run_candidate_round(AlgorithmRun& run, const NetworkTimeline& timeline,
                                const RunOptions& opts, Rng& rng, long n_hat, int big_k,
                                const std::string& name_prefix) {
  const Segment& seg = timeline.segment(0);
  const AttributeTable& attrs = timeline.attrs();
  const Scalar t_z = time_bound_z(opts.gains.beta, timeline.n_bar(), attrs.size());
  const Scalar t_y = time_bound_y(timeline.n_bar(), opts.gains.h_y);

  RoundResult round;
  Scalar z_time = 0.0;
  Scalar y_time = 0.0;

  for (int position : candidate_positions(static_cast<int>(n_hat), big_k)) {
    SystemSpec spec;
    spec.kind = ProtocolKind::Kth;
    spec.k = position;
    spec.paper_compliant = opts.paper_compliant;
    const ProtocolSystem system =
        build_system(seg, attrs, seg.start_time, timeline.n_bar(), opts.gains, spec);
    SubRun sub = sub_run(system, rng, opts, t_z);
    const std::string tag = name_prefix + "kth_" + std::to_string(position);
    add_lock_verdicts(run, "order statistic " + std::to_string(position), sub.lock);
    const long l_value = locked_or_last(sub, 0);
    if (sub.lock.lock_time) run.lock_times["z[" + std::to_string(position) + "]"] = *sub.lock.lock_time;
    z_time = std::max(z_time, sub.lock.lock_time.value_or(opts.horizon_scale * t_z));
    keep_trajectory(run, opts, tag, "z[" + std::to_string(position) + "]",
                    "estimate of the " + std::to_string(position) + "-th smallest element",
                    std::move(sub.traj));
    Candidate cand;
    cand.position = position;
    cand.z_lock_time = sub.lock.lock_time.value_or(-1.0);
    if (l_value >= 1 && l_value <= attrs.size()) {
      cand.attribute = attrs.label_of(static_cast<int>(l_value));
    } else {
      add_verdict(run, "order statistic " + std::to_string(position) + " in range", false,
                  "locked value " + std::to_string(l_value));
    }
    round.candidates.push_back(std::move(cand));
  }

  for (auto& cand : round.candidates) {
    if (cand.attribute.empty()) continue;
    if (round.frequencies.count(cand.attribute)) {
      cand.frequency = round.frequencies[cand.attribute];
      continue;  // attribute already inspected this round
    }
    SystemSpec spec;
    spec.kind = ProtocolKind::Frequency;
    spec.attribute = cand.attribute;
    spec.paper_compliant = opts.paper_compliant;
    const ProtocolSystem system =
        build_system(seg, attrs, seg.start_time, timeline.n_bar(), opts.gains, spec);
    SubRun sub = sub_run(system, rng, opts, t_y);
    add_lock_verdicts(run, "frequency of '" + cand.attribute + "'", sub.lock);
    cand.frequency = locked_or_last(sub, 0);
    cand.y_lock_time = sub.lock.lock_time.value_or(-1.0);
    if (sub.lock.lock_time) run.lock_times["y[" + cand.attribute + "]"] = *sub.lock.lock_time;
    round.frequencies[cand.attribute] = cand.frequency;
    y_time = std::max(y_time, sub.lock.lock_time.value_or(opts.horizon_scale * t_y));
    keep_trajectory(run, opts, name_prefix + "freq_" + cand.attribute, "y[" + cand.attribute + "]",
                    "frequency estimate of attribute '" + cand.attribute + "'",
                    std::move(sub.traj));
  }

  for (const auto& cand : round.candidates) {
    round.best_frequency = std::max(round.best_frequency, cand.frequency);
  }
  round.duration = z_time + y_time;
  return round;
}

void finish_mode_selection(AlgorithmRun& run, const NetworkTimeline& timeline,
                           const RunOptions& opts, const std::map<std::string, long>& freqs) {
  const Segment& seg = timeline.segment(0);
  const AttributeTable& attrs = timeline.attrs();
  run.frequencies = freqs;
  run.mode = argmax_label(freqs, attrs, opts.tie_break);
  if (run.mode.empty()) {
    add_verdict(run, "mode available", false, "no candidate produced a frequency");
    return;
  }
  run.mode_l = attrs.l_of(run.mode);
  run.mode_frequency = freqs.at(run.mode);
  run.mode_per_agent.assign(seg.component.size(), run.mode);

  const ModeOracle oracle = oracle_mode(member_labels(seg, attrs), attrs);
  long mode_count = 0;
  for (const auto& label : member_labels(seg, attrs)) {
    if (label == run.mode) ++mode_count;
  }
  add_verdict(run, "mode matches oracle", mode_count == oracle.frequency,
              "returned '" + run.mode + "' (oracle frequency " + std::to_string(mode_count) +
                  ", maximum " + std::to_string(oracle.frequency) + ")");
}

}  // namespace

ModeOracle oracle_mode(const std::vector<std::string>& attrs, const AttributeTable& table) {
  if (attrs.empty()) throw ConfigError("oracle_mode needs a nonempty multiset");
  std::map<int, long> counts;  // keyed by l so ties come out in l order
  for (const auto& label : attrs) counts[table.l_of(label)]++;
  long best = 0;
  for (const auto& [l, c] : counts) best = std::max(best, c);
  ModeOracle oracle;
  oracle.frequency = best;
  for (const auto& [l, c] : counts) {
    if (c == best) oracle.modes.push_back(table.label_of(l));
  }
  return oracle;
}

std::string oracle_kth(const std::vector<std::string>& attrs, int k, const AttributeTable& table) {
  const int n = static_cast<int>(attrs.size());
  if (k < 1 || k > n) throw ConfigError("oracle_kth needs 1 <= k <= N");
  std::vector<int> ls;
  ls.reserve(attrs.size());
  for (const auto& label : attrs) ls.push_back(table.l_of(label));
  std::sort(ls.begin(), ls.end());
  return table.label_of(ls[static_cast<std::size_t>(k) - 1]);
}

std::vector<int> candidate_positions(int n, int big_k) {
  if (big_k < 1 || big_k > n) throw ConfigError("candidate_positions needs 1 <= K <= N");
  const int p = (n + big_k - 1) / big_k;
  const bool truncated = static_cast<long>(p) * big_k > n;
  const int j_max = truncated ? big_k - 1 : big_k;
  std::vector<int> out;
  for (int j = 1; j <= std::max(1, j_max); ++j) out.push_back(j * p);
  if (out.size() == 1 && out[0] > n) out[0] = n;  // K = 1 degenerate guard
  return out;
}

int kstar(int f_star, int n) {
  if (f_star < 1 || f_star > n) throw ConfigError("kstar needs 1 <= f_star <= N");
  int k = 1;
  while ((n + k - 1) / k > f_star) ++k;
  return k;
}

std::string to_string(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::Direct: return "direct";
    case AlgorithmId::AprioriK: return "apriori-k";
    case AlgorithmId::AdaptiveK: return "adaptive-k";
  }
  return "?";
}

AlgorithmId algorithm_from_string(const std::string& s) {
  if (s == "direct") return AlgorithmId::Direct;
  if (s == "apriori-k") return AlgorithmId::AprioriK;
  if (s == "adaptive-k") return AlgorithmId::AdaptiveK;
  throw ConfigError("unknown algorithm '" + s + "'");
}

long state_count(AlgorithmId id, int param) {
  if (param < 1) throw ConfigError("state_count needs a positive parameter");
  switch (id) {
    case AlgorithmId::Direct: return param;
    case AlgorithmId::AprioriK: return 2L * param + 1;
    case AlgorithmId::AdaptiveK: return static_cast<long>(param) * (param + 1) + 1;
  }
  return 0;
}

long state_count_apriori(int big_k, bool truncated) {
  return truncated ? 2L * big_k - 1 : 2L * big_k + 1;
}

bool AlgorithmRun::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

bool PiecewiseModeRun::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

AlgorithmRun run_algorithm1(const NetworkTimeline& timeline, const RunOptions& opts) {
  AlgorithmRun run;
  run.algorithm = AlgorithmId::Direct;
  const Segment& seg = timeline.segment(0);
  const AttributeTable& attrs = timeline.attrs();
  Rng rng(opts.seed);
  const Scalar t_y = time_bound_y(timeline.n_bar(), opts.gains.h_y);

  std::map<std::string, long> freqs;
  const auto labels = member_labels(seg, attrs);

  if (opts.use_counter) {
    SystemSpec spec;
    spec.kind = ProtocolKind::Counter;
    spec.paper_compliant = opts.paper_compliant;
    const ProtocolSystem system =
        build_system(seg, attrs, seg.start_time, timeline.n_bar(), opts.gains, spec);
    SubRun sub = sub_run(system, rng, opts, t_y);
    add_lock_verdicts(run, "attribute counter", sub.lock);
    for (int d = 1; d <= attrs.size(); ++d) {
      const std::string& label = attrs.label_of(d);
      freqs[label] = locked_or_last(sub, d - 1);
      const long expected = std::count(labels.begin(), labels.end(), label);
      add_verdict(run, "counter frequency of '" + label + "' matches oracle",
                  freqs[label] == expected,
                  std::to_string(freqs[label]) + " vs " + std::to_string(expected));
    }
    if (sub.lock.lock_time) run.lock_times["xi"] = *sub.lock.lock_time;
    run.elapsed_sim = sub.lock.lock_time.value_or(opts.horizon_scale * t_y);
    keep_trajectory(run, opts, "counter", "xi", "per-attribute counter vector", std::move(sub.traj));
  } else {
    for (const auto& label : attrs.universe()) {
      SystemSpec spec;
      spec.kind = ProtocolKind::Frequency;
      spec.attribute = label;
      spec.paper_compliant = opts.paper_compliant;
      const ProtocolSystem system =
          build_system(seg, attrs, seg.start_time, timeline.n_bar(), opts.gains, spec);
      SubRun sub = sub_run(system, rng, opts, t_y);
      add_lock_verdicts(run, "frequency of '" + label + "'", sub.lock);
      freqs[label] = locked_or_last(sub, 0);
      const long expected = std::count(labels.begin(), labels.end(), label);
      add_verdict(run, "frequency of '" + label + "' matches oracle", freqs[label] == expected,
                  std::to_string(freqs[label]) + " vs " + std::to_string(expected));
      if (sub.lock.lock_time) run.lock_times["y[" + label + "]"] = *sub.lock.lock_time;
      run.elapsed_sim =
          std::max(run.elapsed_sim, sub.lock.lock_time.value_or(opts.horizon_scale * t_y));
      keep_trajectory(run, opts, "freq_" + label, "y[" + label + "]",
                      "frequency estimate of attribute '" + label + "'", std::move(sub.traj));
    }
  }

  run.state_var_count = state_count(AlgorithmId::Direct, attrs.size());
  finish_mode_selection(run, timeline, opts, freqs);
  return run;
}

AlgorithmRun run_algorithm2(const NetworkTimeline& timeline, const RunOptions& opts, int f_star,
                            int explicit_k) {
  AlgorithmRun run;
  run.algorithm = AlgorithmId::AprioriK;
  const Segment& seg = timeline.segment(0);
  const AttributeTable& attrs = timeline.attrs();
  Rng rng(opts.seed);
  if (f_star < 1 && explicit_k < 1) {
    throw ConfigError("the a-priori algorithm needs a frequency bound f_star or an explicit K");
  }
  const ModeOracle oracle = oracle_mode(member_labels(seg, attrs), attrs);
  if (f_star > oracle.frequency) {
    run.warnings.push_back("supplied f_star=" + std::to_string(f_star) +
                           " exceeds the oracle mode frequency " +
                           std::to_string(oracle.frequency));
  }

  if (opts.combined) {
    // The single-system realization carries its own size estimator; K is
    // fixed when the states are allocated.
    const int n_true = static_cast<int>(seg.component.size());
    const int big_k = explicit_k > 0 ? explicit_k : kstar(f_star, n_true);
    run.k_trace = {big_k};
    run.k_trace_times = {0.0};
    SystemSpec spec;
    spec.kind = ProtocolKind::Combined;
    spec.big_k = big_k;
    const ProtocolSystem system =
        build_system(seg, attrs, seg.start_time, timeline.n_bar(), opts.gains, spec);
    const Scalar total_bound = time_bound_x(timeline.n_bar(), opts.gains.h_x) +
                               time_bound_y(timeline.n_bar(), opts.gains.h_y) +
                               time_bound_z(opts.gains.beta, timeline.n_bar(), attrs.size());
    SubRun sub = sub_run(system, rng, opts, total_bound);
    add_lock_verdicts(run, "combined mode estimate", sub.lock);
    const long m_hat = locked_or_last(sub, 0);
    run.elapsed_sim = sub.lock.lock_time.value_or(opts.horizon_scale * total_bound);
    if (sub.lock.lock_time) run.lock_times["mhat"] = *sub.lock.lock_time;

    // read the candidate table off the leader at the final sample
    const Matrix& final_state = sub.traj.states.back();
    const int leader_row = seg.leader - 1;
    const long x_final = nearest_int(final_state(leader_row, 0));
    run.size_estimate = x_final;
    add_verdict(run, "size estimate matches component size", x_final == n_true,
                "estimate " + std::to_string(x_final) + ", actual " + std::to_string(n_true));
    std::map<std::string, long> freqs;
    for (int kk = 1; kk <= system.pairs; ++kk) {
      Candidate cand;
      const long p = (std::clamp<long>(x_final, 1, timeline.n_bar()) + big_k - 1) / big_k;
      cand.position = static_cast<int>(kk * p);
      const long l_val = nearest_int(final_state(leader_row, kk));
      if (l_val >= 1 && l_val <= attrs.size()) {
        cand.attribute = attrs.label_of(static_cast<int>(l_val));
        cand.frequency = nearest_int(final_state(leader_row, system.pairs + kk));
        freqs[cand.attribute] = std::max(freqs[cand.attribute], cand.frequency);
      }
      run.candidates.push_back(cand);
    }
    run.rounds.push_back({big_k, run.candidates});
    keep_trajectory(run, opts, "combined", "mhat",
                    "single-system realization: size, candidates, frequencies, mode",
                    std::move(sub.traj));
    run.state_var_count = state_count_apriori(big_k, system.truncated);
    run.frequencies = freqs;
    if (m_hat >= 1 && m_hat <= attrs.size()) {
      run.mode = attrs.label_of(static_cast<int>(m_hat));
      run.mode_l = static_cast<int>(m_hat);
      run.mode_frequency = freqs.count(run.mode) ? freqs.at(run.mode) : 0;
      run.mode_per_agent.assign(seg.component.size(), run.mode);
      long mode_count = 0;
      for (const auto& label : member_labels(seg, attrs)) {
        if (label == run.mode) ++mode_count;
      }
      add_verdict(run, "mode matches oracle", mode_count == oracle.frequency,
                  "returned '" + run.mode + "' (oracle frequency " + std::to_string(mode_count) +
                      ", maximum " + std::to_string(oracle.frequency) + ")");
    } else {
      add_verdict(run, "mode matches oracle", false,
                  "mode integer " + std::to_string(m_hat) + " outside the universe");
    }
    return run;
  }

  const long n_hat = run_size_phase(run, timeline, opts, rng);
  const int big_k = explicit_k > 0 ? explicit_k : kstar(f_star, static_cast<int>(n_hat));
  run.k_trace = {big_k};
  run.k_trace_times = {run.elapsed_sim};

  const long ceil_nk = (n_hat + big_k - 1) / big_k;
  if (f_star >= 1 && f_star < ceil_nk) {
    run.warnings.push_back("f_star=" + std::to_string(f_star) + " is below ceil(N/K)=" +
                           std::to_string(ceil_nk) + "; candidate coverage unguaranteed");
  }

  RoundResult round = run_candidate_round(run, timeline, opts, rng, n_hat, big_k, "");
  run.candidates = round.candidates;
  run.rounds.push_back({big_k, round.candidates});
  run.elapsed_sim += round.duration;
  const int p = static_cast<int>((n_hat + big_k - 1) / big_k);
  run.state_var_count = state_count_apriori(big_k, static_cast<long>(p) * big_k > n_hat);
  finish_mode_selection(run, timeline, opts, round.frequencies);
  return run;
}

AlgorithmRun run_algorithm3(const NetworkTimeline& timeline, const RunOptions& opts) {
  AlgorithmRun run;
  run.algorithm = AlgorithmId::AdaptiveK;
  const Segment& seg = timeline.segment(0);
  const AttributeTable& attrs = timeline.attrs();
  Rng rng(opts.seed);

  const long n_hat = run_size_phase(run, timeline, opts, rng);
  int big_k = 1;
  long best_f = 1;
  run.k_trace = {1};
  run.k_trace_times = {0.0};

  if (n_hat <= 1) {
    // single-agent network: the mode is the agent's own attribute
    const std::string label = attrs.label_at(seg.component.front(), seg.start_time);
    run.mode = label;
    run.mode_l = attrs.l_of(label);
    run.mode_frequency = 1;
    run.frequencies[label] = 1;
    run.mode_per_agent.assign(seg.component.size(), label);
    run.state_var_count = state_count(AlgorithmId::AdaptiveK, 1);
    add_verdict(run, "mode matches oracle", true, "single-agent short-circuit");
    return run;
  }

  std::map<std::string, long> last_freqs;
  while (best_f < (n_hat + big_k - 1) / big_k) {
    if (big_k > attrs.size()) {
      throw std::runtime_error("adaptive loop passed K = |Omega| without terminating");
    }
    ++big_k;
    run.k_trace.push_back(big_k);
    run.k_trace_times.push_back(run.elapsed_sim);
    RoundResult round = run_candidate_round(run, timeline, opts, rng, n_hat, big_k,
                                            "round" + std::to_string(big_k) + "_");
    Scalar duration = round.duration;
    if (!opts.lock_gated) {
      duration = std::ceil(duration / opts.cadence_interval) * opts.cadence_interval;
    }
    run.elapsed_sim += duration;
    run.candidates = round.candidates;
    run.rounds.push_back({big_k, round.candidates});
    last_freqs = round.frequencies;
    best_f = std::max(best_f, round.best_frequency);
  }

  run.state_var_count = state_count(AlgorithmId::AdaptiveK, big_k);
  finish_mode_selection(run, timeline, opts, last_freqs);
  return run;
}

PiecewiseModeRun run_algorithm1_piecewise(const NetworkTimeline& timeline,
                                          const RunOptions& opts, Scalar horizon) {
  PiecewiseModeRun result;
  const AttributeTable& attrs = timeline.attrs();
  Rng rng(opts.seed);
  const Scalar t_y = time_bound_y(timeline.n_bar(), opts.gains.h_y);

  IntegrateOptions io;
  io.horizon = horizon;
  io.window = opts.window;
  io.sample_interval = std::min(opts.sample_interval, opts.window / 5.0);
  io.dt = opts.dt;
  io.early_stop = false;  // every segment is simulated to its boundary

  Scalar window = opts.window;
  std::vector<Trajectory> per_attribute;
  for (const auto& label : attrs.universe()) {
    std::vector<ProtocolSystem> systems;
    for (int s = 0; s < timeline.n_segments(); ++s) {
      SystemSpec spec;
      spec.kind = ProtocolKind::Frequency;
      spec.attribute = label;
      systems.push_back(build_system(timeline.segment(s), attrs,
                                     timeline.segment(s).start_time, timeline.n_bar(),
                                     opts.gains, spec));
      window = std::max(window, robust_lock_window(systems.back()));
    }
    const Matrix y0 = random_initial_state(systems.front(), rng);
    Trajectory traj = run_piecewise(timeline, systems, y0, io);
    if (opts.keep_trajectories) {
      result.trajectories.push_back({"freq_" + label, "y[" + label + "]",
                                     "piecewise frequency estimate of '" + label + "'", traj});
    }
    per_attribute.push_back(std::move(traj));
  }

  for (int s = 0; s < timeline.n_segments(); ++s) {
    const Segment& seg = timeline.segment(s);
    SegmentModeReport report;
    report.segment = s;
    report.start_time = seg.start_time;

    bool in_box = true;
    bool all_locked = true;
    Scalar latest_lock = 0.0;
    std::map<std::string, long> freqs;
    for (std::size_t ai = 0; ai < per_attribute.size(); ++ai) {
      const Trajectory& traj = per_attribute[ai];
      const auto [first, last] = traj.segment_range(s);
      const Matrix& at_start = traj.states[static_cast<std::size_t>(first)];
      for (int node : seg.component) {
        if (!Interval{-0.5, timeline.n_bar() + 0.5}.contains(at_start(node - 1, 0))) {
          in_box = false;
        }
      }
      const LockReport lock = detect_lock_segment(traj, s, window);
      const std::string& label = attrs.universe()[ai];
      if (lock.lock_time) {
        freqs[label] = lock.locked_values[0];
        latest_lock = std::max(latest_lock, *lock.lock_time);
      } else {
        freqs[label] = traj.rounded[static_cast<std::size_t>(last)][0];
        all_locked = false;
      }
    }
    report.frequencies = freqs;
    report.states_in_box_at_start = in_box;
    if (all_locked) report.lock_time = latest_lock;
    report.mode = argmax_label(freqs, attrs, opts.tie_break);
    report.mode_frequency = freqs.at(report.mode);

    const ModeOracle oracle = oracle_mode(member_labels(seg, attrs), attrs);
    long actual = 0;
    for (const auto& label : member_labels(seg, attrs)) {
      if (label == report.mode) ++actual;
    }
    report.mode_matches_oracle = actual == oracle.frequency;

    const std::string tag = "segment " + std::to_string(s);
    result.verdicts.push_back({tag + " mode matches oracle", report.mode_matches_oracle,
                               "mode '" + report.mode + "'"});
    result.verdicts.push_back({tag + " states inside admissible box at start", in_box, ""});
    const bool lock_ok =
        report.lock_time.has_value() && *report.lock_time - seg.start_time <= t_y;
    result.verdicts.push_back(
        {tag + " re-locked within bound", lock_ok,
         report.lock_time ? "lock at " + std::to_string(*report.lock_time) : "no lock"});
    result.segments.push_back(std::move(report));
  }
  return result;
}

}  // namespace modesim
