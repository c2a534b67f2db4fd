#pragma once

#include <string>
#include <vector>

#include "modesim/gains.hpp"
#include "modesim/network.hpp"
#include "modesim/types.hpp"

namespace modesim {

struct CheckResult {
  std::string name;
  Scalar required = 0.0;
  Scalar actual = 0.0;
  bool pass = false;
};

struct BoundReport {
  Scalar t_x = 0.0;
  Scalar t_y = 0.0;
  Scalar t_z = 0.0;
  std::vector<CheckResult> gain_checks;
  std::vector<CheckResult> spectral_checks;
};

// Finite-time rounding-lock bounds. The x-variant uses the size of
// [0.5, n_bar+0.5] (= n_bar); the y-variant uses the size of
// [-0.5, n_bar+0.5] (= n_bar+1).
Scalar time_bound_x(int n_bar, Scalar h_x);
Scalar time_bound_y(int n_bar, Scalar h_y);
Scalar time_bound_z(Scalar beta, int n_bar, int omega_size);

// Equilibrium deviation bound sqrt(2) n^3 / (4 gamma).
Scalar deviation_bound(int n, Scalar gamma);

// Verifies, on the component of interest of `seg`:
//   lambda_2(L) >= 4/N^2,
//   gamma >= N/lambda_2  =>  lambda_min(gamma L + e_l e_l^T) >= 1/(4N),
//   gamma > 0            =>  gamma L + e_l e_l^T positive definite.
// A disconnected component reports lambda_2 = 0 as a failed precondition.
std::vector<CheckResult> spectral_checks(const Segment& seg, Scalar gamma);

// Gain inequalities for the requested compliance level. n_for_gamma_y
// substitutes the actual network size when gamma_y was selected for a known
// network (otherwise the n_bar^3 rule applies). phi_sup, when positive, is
// the exact sup of |phi_k| on K_z for the system under test; otherwise the
// conservative beta*n_bar + g*n_bar envelope is used.
std::vector<CheckResult> gain_checks(const GainSet& gains, int n_bar, int omega_size,
                                     int n_for_gamma_y = 0, Scalar phi_sup = 0.0);

BoundReport make_bound_report(const GainSet& gains, int n_bar, int omega_size,
                              const Segment& seg, int n_for_gamma_y = 0);

// End-to-end convergence-time budgets: the a-priori-K algorithm totals
// t_x + t_y + t_z; the adaptive one totals t_x + k_star (t_y + t_z).
Scalar algorithm2_time_bound(const BoundReport& report);
Scalar algorithm3_time_bound(const BoundReport& report, int k_star);

}  // namespace modesim
