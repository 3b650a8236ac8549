#pragma once

#include "htlip/dynamics.hpp"
#include "htlip/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace htlip {

/// How the step-length limits l_min / l_max are formed.
enum class FrictionBounds {
  /// l_max = max(u_max, mu z0), l_min = min(u_min, -mu z0).
  Printed,
  /// Intersection with the friction interval: l_max = min(u_max, 2 mu z0),
  /// l_min = max(u_min, -2 mu z0).
  Strict,
};

/// Which linearisation of the row-sum certificate enters the QP.
enum class StabilityRows {
  /// Both sign patterns of |a| + |b| < 1 per row: 8 stability rows. Every
  /// feasible gain satisfies the certificate.
  Exact,
  /// Only the equal-sign pattern (|a + b| < 1): 4 stability rows. Necessary
  /// but not sufficient for the certificate.
  Printed,
};

struct QpOptions {
  double eps = 1e-6;  // strict inequalities become E K <= d - eps
  FrictionBounds friction = FrictionBounds::Printed;
  StabilityRows rows = StabilityRows::Exact;
};

struct StepBounds {
  double l_min = 0.0;
  double l_max = 0.0;
};

inline StepBounds step_length_bounds(const ModelParams& p, FrictionBounds mode) {
  if (mode == FrictionBounds::Printed)
    return {std::min(p.u_min, -p.mu * p.z0), std::max(p.u_max, p.mu * p.z0)};
  return {std::max(p.u_min, -2.0 * p.mu * p.z0), std::min(p.u_max, 2.0 * p.mu * p.z0)};
}

/// min 1/2 K S K^T + K c  s.t.  E K^T <= d - eps.
///
/// Rows 0-1 bound the commanded step length; the remaining rows depend only
/// on the supremum transition matrix.
template <typename Scalar>
struct QpProblem {
  Eigen::Matrix<Scalar, 2, 2> S;
  Eigen::Matrix<Scalar, 2, 1> c;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> E;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d;
  Scalar eps = Scalar(0);
  Transition<Scalar> phi_bar;

  Eigen::Index num_constraints() const { return E.rows(); }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs() const { return d.array() - eps; }
  Scalar cost(const Gain<Scalar>& k) const {
    return Scalar(0.5) * (k * S * k.transpose())(0) + (k * c)(0);
  }
};

using QpProblem2d = QpProblem<double>;

template <typename Scalar>
QpProblem<Scalar> build_qp(Scalar fbar, Scalar dtau, const State<Scalar>& e, Scalar u_xr,
                           const ModelParams& params, const QpOptions& opts = {}) {
  if (!(fbar > Scalar(0))) throw ModelError("supremum stiffness must be positive");
  if (!(dtau > Scalar(0))) throw ModelError("phase duration must be positive");
  QpProblem<Scalar> qp;
  qp.phi_bar = stm_supremum(fbar, dtau);
  const auto& p = qp.phi_bar;
  const Scalar curvature = Scalar(2) * (p(0, 0) * p(0, 0) + p(1, 0) * p(1, 0));
  qp.S = Eigen::Matrix<Scalar, 2, 2>::Identity() * curvature;
  qp.c << -curvature, Scalar(-2) * (p(0, 0) * p(0, 1) + p(1, 0) * p(1, 1));

  const auto bounds = step_length_bounds(params, opts.friction);
  const Eigen::Index rows = opts.rows == StabilityRows::Exact ? 10 : 6;
  qp.E.resize(rows, 2);
  qp.d.resize(rows);
  qp.E.row(0) << e(0), e(1);
  qp.d(0) = Scalar(bounds.l_max) - u_xr;
  qp.E.row(1) << -e(0), -e(1);
  qp.d(1) = -Scalar(bounds.l_min) + u_xr;
  // Row sums |(1-k1) P_i1| + |P_i2 - k2 P_i1| < 1, one half-plane per sign
  // pattern (s1, s2): s1 (1-k1) P_i1 + s2 (P_i2 - k2 P_i1) < 1.
  Eigen::Index r = 2;
  auto add = [&](int i, Scalar s1, Scalar s2) {
    qp.E.row(r) << -s1 * p(i, 0), -s2 * p(i, 0);
    qp.d(r) = Scalar(1) - s1 * p(i, 0) - s2 * p(i, 1);
    ++r;
  };
  add(0, 1, 1);
  add(0, -1, -1);
  add(1, 1, 1);
  add(1, -1, -1);
  if (opts.rows == StabilityRows::Exact) {
    add(0, 1, -1);
    add(0, -1, 1);
    add(1, 1, -1);
    add(1, -1, 1);
  }
  qp.eps = Scalar(opts.eps);
  return qp;
}

enum class QpStatus { Optimal, Infeasible };

template <typename Scalar>
struct QpSolution {
  Gain<Scalar> K = Gain<Scalar>::Zero();
  QpStatus status = QpStatus::Infeasible;
  std::vector<int> active_set;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> multipliers;  // one per constraint
  Scalar cost = std::numeric_limits<Scalar>::quiet_NaN();
  int systems_solved = 0;
  /// Phase-1 optimum: min over K of the largest constraint violation.
  /// Positive means the constraint polygon is empty.
  Scalar phase1_violation = std::numeric_limits<Scalar>::quiet_NaN();
};

using QpSolution2d = QpSolution<double>;

template <typename Scalar>
struct Phase1Result {
  Scalar violation;  // min_K max_i (E_i K - b_i), within the box |k_j| <= box
  Gain<Scalar> K;
};

/// Phase-1 feasibility LP  min s  s.t.  E_i K - s <= b_i, |k_j| - s <= box,
/// solved by enumerating the vertices of the three-variable polyhedron.
template <typename Scalar>
Phase1Result<Scalar> phase1_lp(const Eigen::Matrix<Scalar, Eigen::Dynamic, 2>& E,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                               Scalar box = Scalar(1e4)) {
  const Eigen::Index m = E.rows() + 4;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> A(m, 3);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs(m);
  A.topLeftCorner(E.rows(), 2) = E;
  A.col(2).setConstant(Scalar(-1));
  rhs.head(E.rows()) = b;
  const Eigen::Index o = E.rows();
  A.row(o) << 1, 0, -1;
  A.row(o + 1) << -1, 0, -1;
  A.row(o + 2) << 0, 1, -1;
  A.row(o + 3) << 0, -1, -1;
  rhs.tail(4).setConstant(box);

  Phase1Result<Scalar> best{std::numeric_limits<Scalar>::infinity(), Gain<Scalar>::Zero()};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      for (Eigen::Index l = j + 1; l < m; ++l) {
        Eigen::Matrix<Scalar, 3, 3> M;
        M << A.row(i), A.row(j), A.row(l);
        Eigen::FullPivLU<Eigen::Matrix<Scalar, 3, 3>> lu(M);
        if (lu.rank() < 3) continue;
        const Eigen::Matrix<Scalar, 3, 1> v = lu.solve(Eigen::Matrix<Scalar, 3, 1>(rhs(i), rhs(j), rhs(l)));
        const Scalar scale = Scalar(1) + rhs.cwiseAbs().maxCoeff();
        if (((A * v - rhs).array() > Scalar(1e-9) * scale).any()) continue;
        if (v(2) < best.violation) best = {v(2), Gain<Scalar>(v(0), v(1))};
      }
    }
  }
  return best;
}

namespace detail {

template <typename Scalar>
struct QpCandidate {
  Gain<Scalar> K;
  std::vector<int> active;
  std::vector<Scalar> lambda;
};

}  // namespace detail

/// Global minimiser by active-set enumeration: the unconstrained point, every
/// single active constraint and every pair (2 variables). The cheapest
/// primal-feasible candidate is optimal because the problem is strictly
/// convex. Infeasibility is cross-checked by the phase-1 LP.
template <typename Scalar>
QpSolution<Scalar> solve_qp(const QpProblem<Scalar>& qp) {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  const auto b = qp.rhs();
  const Eigen::Index m = qp.num_constraints();
  const Scalar feas_tol = Scalar(1e-9) * (Scalar(1) + b.cwiseAbs().maxCoeff());
  const Scalar row_tiny = Scalar(1e-14);

  std::vector<detail::QpCandidate<Scalar>> candidates;
  int systems = 0;

  // Unconstrained minimiser.
  {
    ++systems;
    const Vec2 k = -qp.S.ldlt().solve(qp.c);
    candidates.push_back({k.transpose(), {}, {}});
  }
  // One active constraint: [S E_i^T; E_i 0] [K; lambda] = [-c; b_i].
  for (Eigen::Index i = 0; i < m; ++i) {
    if (qp.E.row(i).norm() < row_tiny) continue;
    ++systems;
    Eigen::Matrix<Scalar, 3, 3> kkt = Eigen::Matrix<Scalar, 3, 3>::Zero();
    kkt.topLeftCorner(2, 2) = qp.S;
    kkt.block(0, 2, 2, 1) = qp.E.row(i).transpose();
    kkt.block(2, 0, 1, 2) = qp.E.row(i);
    Eigen::Matrix<Scalar, 3, 1> rhs;
    rhs << -qp.c, b(i);
    Eigen::FullPivLU<Eigen::Matrix<Scalar, 3, 3>> lu(kkt);
    if (lu.rank() < 3) continue;
    const Eigen::Matrix<Scalar, 3, 1> sol = lu.solve(rhs);
    candidates.push_back({sol.head(2).transpose(), {int(i)}, {sol(2)}});
  }
  // Two active constraints: K pinned to the vertex, multipliers from
  // stationarity.
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      Eigen::Matrix<Scalar, 2, 2> Ea;
      Ea << qp.E.row(i), qp.E.row(j);
      const Scalar det = Ea.determinant();
      if (std::abs(det) <= Scalar(1e-12) * (Scalar(1e-300) + qp.E.row(i).norm() * qp.E.row(j).norm()))
        continue;
      ++systems;
      const Vec2 k = Ea.partialPivLu().solve(Vec2(b(i), b(j)));
      const Vec2 lambda = -Ea.transpose().partialPivLu().solve(qp.S * k + qp.c);
      candidates.push_back({k.transpose(), {int(i), int(j)}, {lambda(0), lambda(1)}});
    }
  }

  QpSolution<Scalar> out;
  out.systems_solved = systems;
  out.multipliers = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(m);

  const detail::QpCandidate<Scalar>* best = nullptr;
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  bool best_dual_ok = false;
  for (const auto& cand : candidates) {
    if (((qp.E * cand.K.transpose() - b).array() > feas_tol).any()) continue;
    const Scalar cost = qp.cost(cand.K);
    const bool dual_ok = std::all_of(cand.lambda.begin(), cand.lambda.end(),
                                     [](Scalar l) { return l >= Scalar(-1e-9); });
    const Scalar tie = Scalar(1e-10) * (Scalar(1) + std::abs(cost));
    // Among (numerically) equal-cost candidates prefer a valid KKT certificate.
    if (best == nullptr || cost < best_cost - tie ||
        (std::abs(cost - best_cost) <= tie && dual_ok && !best_dual_ok)) {
      best = &cand;
      best_cost = cost;
      best_dual_ok = dual_ok;
    }
  }

  if (best != nullptr) {
    out.K = best->K;
    out.status = QpStatus::Optimal;
    out.cost = best_cost;
    out.active_set = best->active;
    for (std::size_t a = 0; a < best->active.size(); ++a)
      out.multipliers(best->active[a]) = best->lambda[a];
    return out;
  }

  const auto phase1 = phase1_lp<Scalar>(qp.E, b);
  out.phase1_violation = phase1.violation;
  out.status = QpStatus::Infeasible;
  return out;
}

template <typename Scalar>
struct KktResiduals {
  Scalar stationarity = 0;      // ||S K^T + c + E^T lambda||_inf
  Scalar complementarity = 0;   // max |lambda_i (E_i K^T - b_i)|
  Scalar primal_violation = 0;  // max(0, E_i K^T - b_i)
  Scalar dual_violation = 0;    // max(0, -lambda_i)
};

template <typename Scalar>
KktResiduals<Scalar> kkt_residuals(const QpProblem<Scalar>& qp, const QpSolution<Scalar>& sol) {
  KktResiduals<Scalar> r;
  const auto b = qp.rhs();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> slack = qp.E * sol.K.transpose() - b;
  const Eigen::Matrix<Scalar, 2, 1> grad =
      qp.S * sol.K.transpose() + qp.c + qp.E.transpose() * sol.multipliers;
  r.stationarity = grad.cwiseAbs().maxCoeff();
  r.complementarity = (sol.multipliers.array() * slack.array()).abs().maxCoeff();
  r.primal_violation = std::max(Scalar(0), slack.maxCoeff());
  r.dual_violation = std::max(Scalar(0), -sol.multipliers.minCoeff());
  return r;
}

}  // namespace htlip
