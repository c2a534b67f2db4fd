#include "modesim/bounds.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace modesim {

namespace {

constexpr Scalar kIneqMargin = 1e-7;  // absorbs eigensolver rounding

Scalar lock_bound(int n_bar, Scalar h, Scalar interval_size) {
  if (n_bar < 1 || h <= 0) throw ConfigError("lock bound needs n_bar >= 1 and h > 0");
  const Scalar nb = static_cast<Scalar>(n_bar);
  return (4.0 * nb / h) * std::log(4.0 * interval_size * std::sqrt(nb) / (2.0 - std::sqrt(2.0)));
}

}  // namespace

Scalar time_bound_x(int n_bar, Scalar h_x) {
  return lock_bound(n_bar, h_x, static_cast<Scalar>(n_bar));
}

Scalar time_bound_y(int n_bar, Scalar h_y) {
  return lock_bound(n_bar, h_y, static_cast<Scalar>(n_bar) + 1.0);
}

Scalar time_bound_z(Scalar beta, int n_bar, int omega_size) {
  if (beta <= 0) throw ConfigError("time_bound_z needs beta > 0");
  return std::log(2.0 * n_bar * omega_size) / beta;
}

Scalar deviation_bound(int n, Scalar gamma) {
  if (n < 2 || gamma <= 0) throw ConfigError("deviation_bound needs n >= 2 and gamma > 0");
  const Scalar nd = static_cast<Scalar>(n);
  return std::sqrt(2.0) * nd * nd * nd / (4.0 * gamma);
}

std::vector<CheckResult> spectral_checks(const Segment& seg, Scalar gamma) {
  std::vector<CheckResult> out;
  const std::vector<int>& nodes = seg.component;
  const int n = static_cast<int>(nodes.size());
  const Matrix lap = laplacian(seg, nodes);

  Eigen::SelfAdjointEigenSolver<Matrix> lap_eigs(lap);
  const Scalar lambda2 = n >= 2 ? lap_eigs.eigenvalues()(1) : 0.0;

  CheckResult connectivity;
  connectivity.name = "lambda2(L) >= 4/N^2";
  connectivity.required = 4.0 / (static_cast<Scalar>(n) * n);
  connectivity.actual = lambda2;
  connectivity.pass = lambda2 >= connectivity.required - kIneqMargin;
  out.push_back(connectivity);

  Matrix shifted = gamma * lap;
  int leader_pos = 0;
  for (int i = 0; i < n; ++i) {
    if (nodes[static_cast<std::size_t>(i)] == seg.leader) leader_pos = i;
  }
  shifted(leader_pos, leader_pos) += 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> shifted_eigs(shifted);
  const Scalar lambda_min = shifted_eigs.eigenvalues()(0);

  CheckResult floor;
  floor.name = "gamma >= N/lambda2 => lambda_min(gamma L + e1 e1^T) >= 1/(4N)";
  floor.required = 1.0 / (4.0 * n);
  floor.actual = lambda_min;
  const bool hypothesis = lambda2 > 0 && gamma >= static_cast<Scalar>(n) / lambda2;
  floor.pass = !hypothesis || lambda_min >= floor.required - kIneqMargin;
  if (!hypothesis) floor.name += " (hypothesis not met)";
  out.push_back(floor);

  CheckResult pd;
  pd.name = "gamma L + e1 e1^T positive definite";
  pd.required = 0.0;
  pd.actual = lambda_min;
  pd.pass = gamma > 0 && lambda_min > 0.0;
  out.push_back(pd);

  return out;
}

std::vector<CheckResult> gain_checks(const GainSet& gains, int n_bar, int omega_size,
                                     int n_for_gamma_y, Scalar phi_sup) {
  const Scalar nb = static_cast<Scalar>(n_bar);
  std::vector<CheckResult> out;

  CheckResult gx{"gamma_x >= n_bar^3", nb * nb * nb, gains.gamma_x, false};
  gx.pass = gx.actual >= gx.required;
  out.push_back(gx);

  const Scalar ny = n_for_gamma_y > 0 ? static_cast<Scalar>(n_for_gamma_y) : nb;
  CheckResult gy;
  gy.name = n_for_gamma_y > 0 ? "gamma_y >= N^3 (known network size)" : "gamma_y >= n_bar^3";
  gy.required = ny * ny * ny;
  gy.actual = gains.gamma_y;
  gy.pass = gy.actual >= gy.required;
  out.push_back(gy);

  CheckResult gg{"g > beta * n_bar * |Omega|", gains.beta * nb * omega_size, gains.g, false};
  gg.pass = gg.actual > gg.required;
  out.push_back(gg);

  const Scalar sup = phi_sup > 0 ? phi_sup : gains.beta * nb + gains.g * nb;
  CheckResult gz{"gamma_z > n_bar * sup|phi_k|", nb * sup, gains.gamma_z, false};
  gz.pass = gz.actual > gz.required;
  out.push_back(gz);

  return out;
}

BoundReport make_bound_report(const GainSet& gains, int n_bar, int omega_size,
                              const Segment& seg, int n_for_gamma_y) {
  BoundReport report;
  report.t_x = time_bound_x(n_bar, gains.h_x);
  report.t_y = time_bound_y(n_bar, gains.h_y);
  report.t_z = time_bound_z(gains.beta, n_bar, omega_size);
  // worst sup of |phi_k| over K_z across k = 1..N for this segment
  const int n = static_cast<int>(seg.component.size());
  Scalar phi_sup = 0.0;
  for (int l = 1; l <= omega_size; ++l) {
    const Scalar below = gains.beta * (l - 0.5) + gains.g * n;
    const Scalar above = gains.beta * (n_bar + 0.5 - l) + gains.g * n;
    phi_sup = std::max({phi_sup, below, above});
  }
  report.gain_checks = gain_checks(gains, n_bar, omega_size, n_for_gamma_y, phi_sup);
  report.spectral_checks = spectral_checks(seg, gains.gamma_y);
  return report;
}

Scalar algorithm2_time_bound(const BoundReport& report) {
  return report.t_x + report.t_y + report.t_z;
}

Scalar algorithm3_time_bound(const BoundReport& report, int k_star) {
  if (k_star < 1) throw ConfigError("k_star must be >= 1");
  return report.t_x + k_star * (report.t_y + report.t_z);
}

}  // namespace modesim
