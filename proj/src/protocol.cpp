#include "modesim/protocol.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "modesim/bounds.hpp"

namespace modesim {

namespace {

inline Scalar sgn(Scalar v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

long clamp_size_estimate(Scalar x, int n_bar) {
  const long rounded = nearest_int(x);
  return std::clamp<long>(rounded, 1, n_bar);
}

}  // namespace

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::Size: return "size";
    case ProtocolKind::Frequency: return "frequency";
    case ProtocolKind::Counter: return "counter";
    case ProtocolKind::Kth: return "kth";
    case ProtocolKind::Combined: return "combined";
  }
  return "?";
}

int indicator(const AttributeTable& attrs, const std::string& a, const std::string& a_i) {
  attrs.l_of(a);
  attrs.l_of(a_i);
  return a == a_i ? 1 : 0;
}

Scalar phi_k(Scalar z, int l_a, int n, int k, Scalar beta, Scalar g) {
  const Scalar l = static_cast<Scalar>(l_a);
  if (z < l) return beta * (z - l) - g * k;
  if (z > l) return beta * (z - l) + g * (n + 1 - k);
  return 0.0;
}

Scalar phi_k(Scalar z, const std::string& a, const AttributeTable& attrs, int n, int k,
             Scalar beta, Scalar g) {
  if (k < 1 || k > n) throw ConfigError("phi_k needs 1 <= k <= N");
  return phi_k(z, attrs.l_of(a), n, k, beta, g);
}

Scalar phi_k_live(Scalar z, int l_a, long n_hat, int big_k, int k, Scalar beta, Scalar g) {
  const Scalar l = static_cast<Scalar>(l_a);
  const long p = (n_hat + big_k - 1) / big_k;  // ceil(n_hat / K)
  if (z < l) return beta * (z - l) - g * static_cast<Scalar>(k) * static_cast<Scalar>(p);
  if (z > l) return beta * (z - l) + g * static_cast<Scalar>(n_hat + 1 - k * p);
  return 0.0;
}

int rounded_match(Scalar z, int l_a) { return nearest_int(z) == l_a ? 1 : 0; }

int ProtocolSystem::max_degree() const {
  std::size_t deg = 0;
  for (const auto& nb : adj) deg = std::max(deg, nb.size());
  return static_cast<int>(deg);
}

Scalar ProtocolSystem::phi_sup() const {
  const Scalar lo = 0.5;
  const Scalar hi = static_cast<Scalar>(n_bar) + 0.5;
  Scalar sup = 0.0;
  for (int l : lvals) {
    const Scalar below = gains.beta * (l - lo) + gains.g * k;
    const Scalar above = gains.beta * (hi - l) + gains.g * (n + 1 - k);
    sup = std::max({sup, below, above});
  }
  return sup;
}

void ProtocolSystem::eval_rhs_compact(const Matrix& compact, Matrix& deriv) const {
  deriv.setZero(n, state_dim);
  switch (kind) {
    case ProtocolKind::Size:
    case ProtocolKind::Frequency:
    case ProtocolKind::Counter: {
      deriv = h() * (input - sym * compact);
      break;
    }
    case ProtocolKind::Kth: {
      for (int i = 0; i < n; ++i) {
        const Scalar zi = compact(i, 0);
        Scalar coupling = 0.0;
        for (int j : adj[i]) coupling += sgn(compact(j, 0) - zi);
        deriv(i, 0) = -phi_k(zi, lvals[i], n, k, gains.beta, gains.g) + gains.gamma_z * coupling;
      }
      break;
    }
    case ProtocolKind::Combined: {
      for (int i = 0; i < n; ++i) {
        const Scalar c = (i == leader_pos) ? 1.0 : 0.0;
        const Scalar xi = compact(i, 0);
        Scalar xcoup = 0.0;
        for (int j : adj[i]) xcoup += compact(j, 0) - xi;
        deriv(i, 0) = gains.h_x * (-c * xi + 1.0 + gains.gamma_x * xcoup);
        const long n_hat = clamp_size_estimate(xi, n_bar);
        for (int kk = 1; kk <= pairs; ++kk) {
          const int zc = kk;
          const int yc = pairs + kk;
          const Scalar zi = compact(i, zc);
          Scalar zcoup = 0.0;
          for (int j : adj[i]) zcoup += sgn(compact(j, zc) - zi);
          deriv(i, zc) = -phi_k_live(zi, lvals[i], n_hat, big_k, kk, gains.beta, gains.g) +
                         gains.gamma_z * zcoup;
          const Scalar yi = compact(i, yc);
          Scalar ycoup = 0.0;
          for (int j : adj[i]) ycoup += compact(j, yc) - yi;
          deriv(i, yc) = gains.h_y * (-c * yi + rounded_match(zi, lvals[i]) +
                                      gains.gamma_y * ycoup);
        }
      }
      break;
    }
  }
  // Sign gate of the piecewise-constant network model: a node with no
  // incident edge stops integrating, the leader included.
  for (int i = 0; i < n; ++i) {
    if (adj[i].empty()) deriv.row(i).setZero();
  }
}

void ProtocolSystem::eval_rhs(const Matrix& state, Matrix& deriv) const {
  deriv.setZero(state.rows(), state.cols());
  Matrix compact(n, state_dim);
  for (int i = 0; i < n; ++i) compact.row(i) = state.row(component[i] - 1);
  Matrix d(n, state_dim);
  eval_rhs_compact(compact, d);
  for (int i = 0; i < n; ++i) deriv.row(component[i] - 1) = d.row(i);
}

long ProtocolSystem::mhat(const Matrix& state, int agent) const {
  if (kind != ProtocolKind::Combined) throw ConfigError("mhat applies to the combined kind");
  const int row = agent - 1;
  int best = 1;
  Scalar best_y = state(row, pairs + 1);
  for (int kk = 2; kk <= pairs; ++kk) {
    const Scalar y = state(row, pairs + kk);
    if (y > best_y) {
      best_y = y;
      best = kk;
    }
  }
  return nearest_int(state(row, best));
}

ProtocolSystem build_system(const Segment& seg, const AttributeTable& attrs, Scalar at_time,
                            int n_bar, const GainSet& gains, const SystemSpec& spec) {
  ProtocolSystem sys;
  sys.kind = spec.kind;
  sys.attribute = spec.attribute;
  sys.k = spec.k;
  sys.big_k = spec.big_k;
  sys.n_bar = n_bar;
  sys.component = seg.component;
  sys.n = static_cast<int>(sys.component.size());
  sys.leader = seg.leader;
  sys.omega_size = attrs.size();
  sys.gains = gains;

  for (int i = 0; i < sys.n; ++i) {
    if (sys.component[i] == seg.leader) sys.leader_pos = i;
  }
  sys.adj.assign(sys.component.size(), {});
  auto pos_of = [&](int node) {
    auto it = std::lower_bound(sys.component.begin(), sys.component.end(), node);
    return (it != sys.component.end() && *it == node)
               ? static_cast<int>(it - sys.component.begin())
               : -1;
  };
  for (const auto& [a, b] : seg.edges) {
    const int pa = pos_of(a);
    const int pb = pos_of(b);
    if (pa < 0 || pb < 0) continue;
    sys.adj[pa].push_back(pb);
    sys.adj[pb].push_back(pa);
  }
  sys.lvals.reserve(sys.component.size());
  for (int node : sys.component) sys.lvals.push_back(attrs.l_at(node, at_time));

  const Scalar nb = static_cast<Scalar>(n_bar);
  const Interval box_x{0.5, nb + 0.5};
  const Interval box_y{-0.5, nb + 0.5};
  const Interval box_z{0.5, nb + 0.5};

  switch (spec.kind) {
    case ProtocolKind::Size: {
      sys.state_dim = 1;
      sys.state_boxes = {box_x};
      sys.input = Matrix::Ones(sys.n, 1);
      break;
    }
    case ProtocolKind::Frequency: {
      sys.state_dim = 1;
      sys.state_boxes = {box_y};
      const int l_target = attrs.l_of(spec.attribute);
      sys.input = Matrix::Zero(sys.n, 1);
      for (int i = 0; i < sys.n; ++i) sys.input(i, 0) = sys.lvals[i] == l_target ? 1.0 : 0.0;
      break;
    }
    case ProtocolKind::Counter: {
      sys.state_dim = attrs.size();
      sys.state_boxes.assign(static_cast<std::size_t>(sys.state_dim), box_y);
      sys.input = Matrix::Zero(sys.n, sys.state_dim);
      for (int i = 0; i < sys.n; ++i) sys.input(i, sys.lvals[i] - 1) = 1.0;
      break;
    }
    case ProtocolKind::Kth: {
      if (spec.k < 1 || spec.k > sys.n) {
        throw ConfigError("k-th protocol needs 1 <= k <= N, got k=" + std::to_string(spec.k));
      }
      sys.state_dim = 1;
      sys.state_boxes = {box_z};
      break;
    }
    case ProtocolKind::Combined: {
      if (spec.big_k < 1 || spec.big_k > sys.n) {
        throw ConfigError("combined realization needs 1 <= K <= N");
      }
      const int p = (sys.n + spec.big_k - 1) / spec.big_k;
      sys.truncated = static_cast<long>(p) * spec.big_k > sys.n;
      sys.pairs = sys.truncated ? spec.big_k - 1 : spec.big_k;
      if (sys.pairs < 1) sys.pairs = 1;
      sys.state_dim = 1 + 2 * sys.pairs;
      sys.state_boxes.assign(1, box_x);
      for (int kk = 0; kk < sys.pairs; ++kk) sys.state_boxes.push_back(box_z);
      for (int kk = 0; kk < sys.pairs; ++kk) sys.state_boxes.push_back(box_y);
      break;
    }
  }

  if (sys.is_linear()) {
    sys.sym = sys.gamma() * laplacian(seg, sys.component);
    sys.sym(sys.leader_pos, sys.leader_pos) += 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eigs(sys.sym);
    sys.eigvals = eigs.eigenvalues();
    sys.eigvecs = eigs.eigenvectors();
    sys.y_star = equilibrium(sys);
  }

  if (spec.paper_compliant) {
    const Scalar sup = spec.kind == ProtocolKind::Kth ? sys.phi_sup() : 0.0;
    for (const auto& check : gain_checks(gains, n_bar, sys.omega_size, 0, sup)) {
      const bool relevant =
          (spec.kind == ProtocolKind::Size && check.name.rfind("gamma_x", 0) == 0) ||
          ((spec.kind == ProtocolKind::Frequency || spec.kind == ProtocolKind::Counter) &&
           check.name.rfind("gamma_y", 0) == 0) ||
          (spec.kind == ProtocolKind::Kth &&
           (check.name.rfind("g >", 0) == 0 || check.name.rfind("gamma_z", 0) == 0));
      if (relevant && !check.pass) {
        throw ConfigError("gains violate paper compliance: " + check.name);
      }
    }
  }

  return sys;
}

Matrix equilibrium(const ProtocolSystem& system) {
  if (!system.is_linear()) {
    throw ConfigError("equilibrium is defined for the linear protocol kinds");
  }
  if (system.gamma() <= 0) throw ConfigError("equilibrium needs gamma > 0");
  Eigen::LDLT<Matrix> solver(system.sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("equilibrium solve failed (matrix not positive definite?)");
  }
  Matrix y = solver.solve(system.input);
  // One step of iterative refinement keeps the leader-sum identity at
  // solver tolerance even for gamma ~ n^3 conditioning.
  for (int pass = 0; pass < 2; ++pass) {
    const Matrix residual = system.input - system.sym * y;
    y += solver.solve(residual);
  }
  return y;
}

}  // namespace modesim
