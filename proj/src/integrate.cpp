#include "modesim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace modesim {

namespace {

constexpr Scalar kTimeEps = 1e-9;

bool frozen_throughout(const ProtocolSystem& system) {
  for (const auto& nb : system.adj) {
    if (!nb.empty()) return false;
  }
  return true;
}

int observable_dim(const ProtocolSystem& system) {
  return system.kind == ProtocolKind::Combined ? 1 : system.state_dim;
}

// Rounded lock observable of all members: the full rounded state row, or the
// mode-integer estimate for the combined realization.
std::vector<long> observe(const ProtocolSystem& system, const Matrix& compact) {
  std::vector<long> out;
  if (system.kind == ProtocolKind::Combined) {
    out.reserve(system.component.size());
    for (int i = 0; i < system.n; ++i) {
      int best = 1;
      Scalar best_y = compact(i, system.pairs + 1);
      for (int kk = 2; kk <= system.pairs; ++kk) {
        if (compact(i, system.pairs + kk) > best_y) {
          best_y = compact(i, system.pairs + kk);
          best = kk;
        }
      }
      out.push_back(nearest_int(compact(i, best)));
    }
  } else {
    out.reserve(static_cast<std::size_t>(system.n) * system.state_dim);
    for (int i = 0; i < system.n; ++i)
      for (int d = 0; d < system.state_dim; ++d) out.push_back(nearest_int(compact(i, d)));
  }
  return out;
}

bool agent_uniform(const std::vector<long>& obs, int obs_dim) {
  if (obs.empty()) return true;
  const int members = static_cast<int>(obs.size()) / obs_dim;
  for (int i = 1; i < members; ++i)
    for (int d = 0; d < obs_dim; ++d)
      if (obs[static_cast<std::size_t>(i) * obs_dim + d] != obs[d]) return false;
  return true;
}

Matrix gather(const ProtocolSystem& system, const Matrix& full) {
  Matrix compact(system.n, system.state_dim);
  for (int i = 0; i < system.n; ++i) compact.row(i) = full.row(system.component[i] - 1);
  return compact;
}

void scatter(const ProtocolSystem& system, const Matrix& compact, Matrix& full) {
  for (int i = 0; i < system.n; ++i) full.row(system.component[i] - 1) = compact.row(i);
}

void push_sample(Trajectory& traj, const ProtocolSystem& system, Scalar t, const Matrix& full,
                 const Matrix& compact) {
  traj.times.push_back(t);
  traj.states.push_back(full);
  traj.rounded.push_back(observe(system, compact));
}

struct EarlyStopState {
  int stable_start = 0;
  bool done = false;

  void feed(const Trajectory& traj, Scalar window) {
    const int s = traj.n_samples() - 1;
    if (s > 0 && traj.rounded[static_cast<std::size_t>(s)] !=
                     traj.rounded[static_cast<std::size_t>(s - 1)]) {
      stable_start = s;
    }
    if (agent_uniform(traj.rounded[static_cast<std::size_t>(s)], traj.obs_dim) &&
        traj.times[static_cast<std::size_t>(s)] -
                traj.times[static_cast<std::size_t>(stable_start)] >=
            window - kTimeEps) {
      done = true;
    }
  }
};

}  // namespace

std::pair<int, int> Trajectory::segment_range(int seg) const {
  const int first = segment_start_index.at(static_cast<std::size_t>(seg));
  const int last = seg + 1 < n_segments() ? segment_start_index[static_cast<std::size_t>(seg) + 1] - 1
                                          : n_samples() - 1;
  return {first, last};
}

Scalar chatter_dt_limit(const ProtocolSystem& system) {
  if (!system.sign_coupled()) return std::numeric_limits<Scalar>::infinity();
  const Scalar denom = system.gains.gamma_z * system.max_degree() +
                       system.gains.g * (system.n_bar + 1);
  return denom > 0 ? 0.25 / denom : std::numeric_limits<Scalar>::infinity();
}

Scalar stability_dt_limit(const ProtocolSystem& system) {
  const Scalar deg = static_cast<Scalar>(system.max_degree());
  Scalar limit = std::numeric_limits<Scalar>::infinity();
  if (system.is_linear()) {
    const Scalar lam_max = system.eigvals.size() > 0
                               ? system.eigvals(system.eigvals.size() - 1)
                               : 2.0 * system.gamma() * deg + 1.0;
    limit = 2.0 / (system.h() * lam_max);
  } else if (system.kind == ProtocolKind::Kth) {
    limit = 2.0 / system.gains.beta;
  } else {
    limit = std::min(limit, 2.0 / (system.gains.h_x * (2.0 * system.gains.gamma_x * deg + 1.0)));
    limit = std::min(limit, 2.0 / (system.gains.h_y * (2.0 * system.gains.gamma_y * deg + 1.0)));
    limit = std::min(limit, 2.0 / system.gains.beta);
  }
  return limit;
}

Scalar auto_dt(const ProtocolSystem& system) {
  // The chatter budget is the refusal ceiling; by default step well below
  // it so the sliding cluster's rounding cannot wander across a cell edge.
  return std::min(0.2 * chatter_dt_limit(system), 0.9 * stability_dt_limit(system));
}

Scalar robust_lock_window(const ProtocolSystem& system) {
  constexpr Scalar kLn2 = 0.6931471805599453;
  switch (system.kind) {
    case ProtocolKind::Size:
    case ProtocolKind::Frequency:
    case ProtocolKind::Counter: {
      const Scalar rate = system.h() * (system.eigvals.size() > 0 ? system.eigvals(0)
                                                                  : 1.0 / (4.0 * system.n_bar));
      return 3.0 * kLn2 / rate;
    }
    case ProtocolKind::Kth:
      return 0.25 / system.gains.beta;
    case ProtocolKind::Combined: {
      const Scalar rate_floor = 1.0 / (4.0 * system.n_bar);
      const Scalar lin = 3.0 * kLn2 / (std::min(system.gains.h_x, system.gains.h_y) * rate_floor);
      return std::max(lin, 0.25 / system.gains.beta);
    }
  }
  return 0.05;
}

Matrix propagate_linear_exact(const ProtocolSystem& system, const Matrix& y0, Scalar t) {
  if (!system.is_linear()) throw ConfigError("exact propagation needs a linear kind");
  if (t < 0) throw ConfigError("exact propagation needs t >= 0");
  if ((system.sym - system.sym.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::runtime_error("drift matrix lost symmetry");
  }
  Matrix full = y0;
  if (t == 0.0 || frozen_throughout(system)) return full;
  const Matrix compact = gather(system, y0);
  const Vector decay = (-system.h() * t * system.eigvals.array()).exp().matrix();
  const Matrix moved =
      system.y_star +
      system.eigvecs * (decay.asDiagonal() * (system.eigvecs.transpose() * (compact - system.y_star)));
  scatter(system, moved, full);
  return full;
}

std::vector<Scalar> make_sample_grid(Scalar t0, Scalar t1, Scalar window) {
  if (t1 <= t0) throw ConfigError("sample grid needs t1 > t0");
  const Scalar span = t1 - t0;
  std::vector<Scalar> grid;
  grid.push_back(t0);
  // geometric early part, catching the fast consensus transient
  const Scalar geo_lo = span * 1e-5;
  const Scalar geo_hi = span * 0.1;
  const int geo_count = 40;
  for (int i = 0; i < geo_count; ++i) {
    grid.push_back(t0 + geo_lo * std::pow(geo_hi / geo_lo, static_cast<Scalar>(i) /
                                                              (geo_count - 1)));
  }
  // uniform backbone, at least four samples per lock window
  Scalar step = std::min(window / 4.0, span / 40.0);
  const Scalar max_points = 2e5;
  if (span / step > max_points) step = span / max_points;
  for (Scalar t = t0 + step; t < t1 - kTimeEps; t += step) grid.push_back(t);
  grid.push_back(t1);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](Scalar a, Scalar b) { return std::abs(a - b) < kTimeEps; }),
             grid.end());
  return grid;
}

Trajectory sample_linear(const ProtocolSystem& system, const Matrix& y0,
                         const IntegrateOptions& opts) {
  if (!system.is_linear()) throw ConfigError("sample_linear needs a linear kind");
  Trajectory traj;
  traj.kind = system.kind;
  traj.state_dim = system.state_dim;
  traj.obs_dim = observable_dim(system);
  traj.segment_start_index = {0};
  traj.segment_start_time = {opts.t0};
  traj.segment_members = {system.component};

  const auto grid = make_sample_grid(opts.t0, opts.horizon, opts.window);
  EarlyStopState stop;
  for (Scalar t : grid) {
    const Matrix full = propagate_linear_exact(system, y0, t - opts.t0);
    push_sample(traj, system, t, full, gather(system, full));
    if (opts.early_stop) {
      stop.feed(traj, opts.window);
      if (stop.done) break;
    }
  }
  return traj;
}

Trajectory integrate_fixed_step(const ProtocolSystem& system, const Matrix& y0,
                                const IntegrateOptions& opts) {
  const Scalar limit = std::min(chatter_dt_limit(system), stability_dt_limit(system));
  const Scalar dt = opts.dt.value_or(auto_dt(system));
  if (dt <= 0) throw ConfigError("fixed-step integration needs dt > 0");
  if (dt > limit) {
    std::ostringstream msg;
    msg << "step size " << dt << " violates the chatter/stability budget; need dt <= " << limit;
    throw NumericalRefusal(msg.str());
  }
  if (opts.horizon <= opts.t0) throw ConfigError("horizon must exceed start time");

  Trajectory traj;
  traj.kind = system.kind;
  traj.state_dim = system.state_dim;
  traj.obs_dim = observable_dim(system);
  traj.segment_start_index = {0};
  traj.segment_start_time = {opts.t0};
  traj.segment_members = {system.component};

  Matrix full = y0;
  Matrix compact = gather(system, y0);
  Matrix deriv(system.n, system.state_dim);

  const long n_steps = static_cast<long>(std::ceil((opts.horizon - opts.t0) / dt - kTimeEps));
  const long stride = std::max<long>(1, std::lround(opts.sample_interval / dt));

  push_sample(traj, system, opts.t0, full, compact);
  EarlyStopState stop;
  for (long step = 1; step <= n_steps; ++step) {
    system.eval_rhs_compact(compact, deriv);
    compact += dt * deriv;
    const bool last = step == n_steps;
    if (step % stride == 0 || last) {
      const Scalar t = last ? opts.horizon : opts.t0 + static_cast<Scalar>(step) * dt;
      scatter(system, compact, full);
      push_sample(traj, system, t, full, compact);
      if (opts.early_stop) {
        stop.feed(traj, opts.window);
        if (stop.done) break;
      }
    }
  }
  return traj;
}

Trajectory run_single(const ProtocolSystem& system, const Matrix& y0,
                      const IntegrateOptions& opts) {
  return system.is_linear() ? sample_linear(system, y0, opts)
                            : integrate_fixed_step(system, y0, opts);
}

namespace {

// A lock is the start of the final streak: the rounded observable is
// agent-uniform and unchanged from there to the end of the range, and the
// streak spans at least `window`. Transient plateaus that later move again
// never count.
LockReport detect_lock_range(const Trajectory& traj, int first, int last, Scalar window) {
  LockReport report;
  report.stability_window = window;
  if (window <= 0) throw ConfigError("lock window must be > 0");
  if (first > last) return report;
  const auto& final_obs = traj.rounded[static_cast<std::size_t>(last)];
  if (!agent_uniform(final_obs, traj.obs_dim)) return report;
  int start = last;
  while (start > first && traj.rounded[static_cast<std::size_t>(start) - 1] == final_obs) {
    --start;
  }
  const Scalar held = traj.times[static_cast<std::size_t>(last)] -
                      traj.times[static_cast<std::size_t>(start)];
  if (held >= window - kTimeEps) {
    report.lock_time = traj.times[static_cast<std::size_t>(start)];
    report.locked_values.assign(final_obs.begin(), final_obs.begin() + traj.obs_dim);
  }
  return report;
}

}  // namespace

LockReport detect_lock(const Trajectory& traj, Scalar window) {
  if (traj.n_samples() == 0) return LockReport{std::nullopt, {}, window, 0};
  return detect_lock_range(traj, 0, traj.n_samples() - 1, window);
}

LockReport detect_lock_segment(const Trajectory& traj, int seg, Scalar window) {
  const auto [first, last] = traj.segment_range(seg);
  return detect_lock_range(traj, first, last, window);
}

Trajectory run_piecewise(const NetworkTimeline& timeline,
                         const std::vector<ProtocolSystem>& systems, const Matrix& init_state,
                         const IntegrateOptions& opts) {
  if (static_cast<int>(systems.size()) != timeline.n_segments()) {
    throw ConfigError("need one protocol system per timeline segment");
  }
  if (opts.horizon <= timeline.segments().back().start_time) {
    throw ConfigError("horizon must extend past the last event");
  }

  Trajectory out;
  out.kind = systems.front().kind;
  out.state_dim = systems.front().state_dim;
  out.obs_dim = observable_dim(systems.front());

  Matrix state = init_state;
  for (int seg = 0; seg < timeline.n_segments(); ++seg) {
    const ProtocolSystem& system = systems[static_cast<std::size_t>(seg)];
    if (system.state_dim != out.state_dim) {
      throw ConfigError("state dimension must stay constant across segments");
    }
    const Scalar t_start = timeline.segment(seg).start_time;
    const Scalar t_end = seg + 1 < timeline.n_segments()
                             ? timeline.segment(seg + 1).start_time
                             : opts.horizon;

    if (seg > 0) {
      const ScenarioEvent& ev = timeline.events()[static_cast<std::size_t>(seg) - 1];
      if (ev.kind == EventKind::NodeJoin) {
        if (!ev.init.has_value()) {
          throw ConfigError("node-join without a local initialization value");
        }
        for (int d = 0; d < system.state_dim; ++d) {
          if (!system.state_boxes[static_cast<std::size_t>(d)].contains(*ev.init)) {
            throw ConfigError("node-join initialization outside the admissible state box");
          }
          state(ev.node - 1, d) = *ev.init;
        }
      }
    }

    IntegrateOptions seg_opts = opts;
    seg_opts.t0 = t_start;
    seg_opts.horizon = t_end;
    // interior segments run until their event boundary
    seg_opts.early_stop = opts.early_stop && seg + 1 == timeline.n_segments();
    Trajectory piece = run_single(system, state, seg_opts);

    const int base = out.n_samples();
    out.segment_start_index.push_back(base);
    out.segment_start_time.push_back(t_start);
    out.segment_members.push_back(system.component);
    for (int s = 0; s < piece.n_samples(); ++s) {
      out.times.push_back(piece.times[static_cast<std::size_t>(s)]);
      out.states.push_back(std::move(piece.states[static_cast<std::size_t>(s)]));
      out.rounded.push_back(std::move(piece.rounded[static_cast<std::size_t>(s)]));
    }
    state = out.states.back();
  }
  return out;
}

Matrix random_initial_state(const ProtocolSystem& system, Rng& rng) {
  Matrix state(system.n_bar, system.state_dim);
  for (int i = 0; i < system.n_bar; ++i) {
    for (int d = 0; d < system.state_dim; ++d) {
      const Interval& box = system.state_boxes[static_cast<std::size_t>(d)];
      state(i, d) = uniform_real(rng, box.lo, box.hi);
    }
  }
  return state;
}

}  // namespace modesim
