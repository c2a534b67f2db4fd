#pragma once

#include <optional>
#include <vector>

#include "modesim/network.hpp"
#include "modesim/protocol.hpp"
#include "modesim/types.hpp"

namespace modesim {

// Sampled states of one protocol run, possibly spanning several
// constant-topology segments. `states` rows cover the full potential node
// set; `rounded` holds the lock observable (rounded member states, or the
// mode-integer estimate for the combined kind) per sample.
struct Trajectory {
  ProtocolKind kind = ProtocolKind::Size;
  int state_dim = 1;
  int obs_dim = 1;
  std::vector<Scalar> times;
  std::vector<Matrix> states;
  std::vector<std::vector<long>> rounded;  // members x obs_dim, row-major
  std::vector<int> segment_start_index;    // first sample of each segment
  std::vector<Scalar> segment_start_time;
  std::vector<std::vector<int>> segment_members;

  int n_samples() const { return static_cast<int>(times.size()); }
  int n_segments() const { return static_cast<int>(segment_start_index.size()); }
  // Sample index range [first, last] of a segment.
  std::pair<int, int> segment_range(int seg) const;
};

struct LockReport {
  std::optional<Scalar> lock_time;
  std::vector<long> locked_values;  // one value per observable dimension
  Scalar stability_window = 0.0;
  Scalar bound_used = 0.0;
};

// Explicit-Euler stability ceiling and sign-coupling chatter budget; the
// usable step is the minimum of what applies to the kind.
Scalar chatter_dt_limit(const ProtocolSystem& system);
Scalar stability_dt_limit(const ProtocolSystem& system);
Scalar auto_dt(const ProtocolSystem& system);

// Smallest stability window that cannot be fooled by a transit through one
// rounding cell: a few cell-crossing times for the exponential kinds, a
// quarter decay constant for the sign-coupled ones.
Scalar robust_lock_window(const ProtocolSystem& system);

// y(t) = y* + Q exp(-h Lambda t) Q^T (y0 - y*), columns independently.
// Rows outside the component (and sign-gated orphans) stay at y0.
Matrix propagate_linear_exact(const ProtocolSystem& system, const Matrix& y0, Scalar t);

// Dense-early sample grid: geometric refinement over the first tenth of the
// span, then uniform steps no wider than window/4.
std::vector<Scalar> make_sample_grid(Scalar t0, Scalar t1, Scalar window);

struct IntegrateOptions {
  Scalar t0 = 0.0;
  Scalar horizon = 1.0;            // absolute end time
  std::optional<Scalar> dt;        // fixed-step kinds; auto when unset
  Scalar window = 0.05;            // lock stability window
  Scalar sample_interval = 0.01;
  bool early_stop = true;          // stop once a lock has held for `window`
};

// Exact spectral sampling for linear kinds.
Trajectory sample_linear(const ProtocolSystem& system, const Matrix& y0,
                         const IntegrateOptions& opts);

// Fixed-step explicit integration (any kind; required for sign-coupled
// ones). Refuses steps over the chatter/stability budget, reporting the
// step size that would be needed.
Trajectory integrate_fixed_step(const ProtocolSystem& system, const Matrix& y0,
                                const IntegrateOptions& opts);

// Dispatches on the kind: exact sampling when linear, fixed-step otherwise.
Trajectory run_single(const ProtocolSystem& system, const Matrix& y0,
                      const IntegrateOptions& opts);

// Earliest time from which the rounded observable is agent-uniform and
// constant over [t, t+window].
LockReport detect_lock(const Trajectory& traj, Scalar window);
LockReport detect_lock_segment(const Trajectory& traj, int seg, Scalar window);

// Integrates across all timeline segments with one system per segment.
// States are carried over events; joining nodes take their event-local
// initialization; frozen rows persist.
Trajectory run_piecewise(const NetworkTimeline& timeline,
                         const std::vector<ProtocolSystem>& systems, const Matrix& init_state,
                         const IntegrateOptions& opts);

// Uniform in-box initial state for every potential agent (box of column 0,
// or per-column boxes for multi-dimensional kinds).
Matrix random_initial_state(const ProtocolSystem& system, Rng& rng);

}  // namespace modesim
