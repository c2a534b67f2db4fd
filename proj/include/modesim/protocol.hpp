#pragma once

#include <string>
#include <vector>

#include "modesim/attributes.hpp"
#include "modesim/gains.hpp"
#include "modesim/network.hpp"
#include "modesim/types.hpp"

namespace modesim {

enum class ProtocolKind { Size, Frequency, Counter, Kth, Combined };

std::string to_string(ProtocolKind kind);

// 1 iff a_i = a; both labels must be in the universe.
int indicator(const AttributeTable& attrs, const std::string& a, const std::string& a_i);

// Drift of the k-th smallest element protocol:
//   beta (z - l_a) - g k            for z < l_a
//   0                               for z = l_a
//   beta (z - l_a) + g (n + 1 - k)  for z > l_a
Scalar phi_k(Scalar z, int l_a, int n, int k, Scalar beta, Scalar g);
Scalar phi_k(Scalar z, const std::string& a, const AttributeTable& attrs, int n, int k,
             Scalar beta, Scalar g);

// Variant driven by the live size estimate: the k-th candidate targets the
// k * ceil(<x>/K)-th smallest element. n_hat is <x> clamped to [1, n_bar].
Scalar phi_k_live(Scalar z, int l_a, long n_hat, int big_k, int k, Scalar beta, Scalar g);

// 1 iff <z> = l(a).
int rounded_match(Scalar z, int l_a);

// A named vector field over the agent states of one network segment.
// Agents outside the component of interest are frozen (zero field). Linear
// kinds carry the symmetric part gamma L + e_l e_l^T of the drift, its
// eigendecomposition, and the input columns; full state matrices are
// n_bar x state_dim with one row per potential agent.
struct ProtocolSystem {
  ProtocolKind kind = ProtocolKind::Size;
  std::string attribute;  // frequency target
  int k = 0;              // order-statistic index
  int big_k = 1;          // pigeonhole parameter of the combined realization
  int pairs = 0;          // combined: number of (z_k, y_k) pairs kept
  bool truncated = false; // combined: ceil(N/K) > N/K, last pair dropped

  int n_bar = 0;
  int n = 0;  // component size
  std::vector<int> component;          // sorted agent ids
  int leader = 1;
  int leader_pos = 0;                  // index of the leader within component
  std::vector<std::vector<int>> adj;   // neighbor positions within component
  std::vector<int> lvals;              // l(a_i) per component member
  int omega_size = 0;
  GainSet gains;

  int state_dim = 1;
  std::vector<Interval> state_boxes;   // one admissible box per state column

  // Linear kinds only.
  Matrix sym;       // gamma L + e_l e_l^T
  Matrix input;     // b columns (indicator / ones / unit vectors)
  Vector eigvals;   // of sym
  Matrix eigvecs;
  Matrix y_star;    // equilibrium, n x state_dim

  bool is_linear() const {
    return kind == ProtocolKind::Size || kind == ProtocolKind::Frequency ||
           kind == ProtocolKind::Counter;
  }
  bool sign_coupled() const {
    return kind == ProtocolKind::Kth || kind == ProtocolKind::Combined;
  }
  Scalar h() const { return kind == ProtocolKind::Size ? gains.h_x : gains.h_y; }
  Scalar gamma() const { return kind == ProtocolKind::Size ? gains.gamma_x : gains.gamma_y; }
  int max_degree() const;

  // Drift matrix -h (gamma L + e_l e_l^T) and constant input h b.
  Matrix drift() const { return -h() * sym; }
  Matrix scaled_input() const { return h() * input; }

  // Exact sup of |phi_k| over K_z for the attributes present (k-th kind).
  Scalar phi_sup() const;

  // Vector field on the full n_bar x state_dim state; frozen rows get zero.
  void eval_rhs(const Matrix& state, Matrix& deriv) const;
  // Same field on the member-compacted n x state_dim state (row i is the
  // i-th component member). Degree-0 members are sign-gated to zero.
  void eval_rhs_compact(const Matrix& compact, Matrix& deriv) const;

  // Mode-integer estimate of one agent under the combined realization:
  // <z_j> for j = argmax_j y_j.
  long mhat(const Matrix& state, int agent) const;
};

struct SystemSpec {
  ProtocolKind kind = ProtocolKind::Size;
  std::string attribute;
  int k = 0;
  int big_k = 1;
  bool paper_compliant = false;  // reject gains that break the convergence hypotheses
};

ProtocolSystem build_system(const Segment& seg, const AttributeTable& attrs, Scalar at_time,
                            int n_bar, const GainSet& gains, const SystemSpec& spec);

// Solves (gamma L + e_l e_l^T) y* = b column-wise (LDLT plus iterative
// refinement). The leader component equals the column sum of b.
Matrix equilibrium(const ProtocolSystem& system);

}  // namespace modesim
