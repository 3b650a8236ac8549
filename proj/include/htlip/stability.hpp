#pragma once

#include "htlip/dynamics.hpp"
#include "htlip/types.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace htlip {

inline constexpr double kDefaultStabilitySlack = 1e-9;

/// Outcome of an infinity-norm certificate on a closed-loop step-to-step
/// matrix. row1/row2 are the absolute row sums; a_dn is their maximum.
struct StabilityReport {
  double a_dn = 0.0;
  double row1 = 0.0;
  double row2 = 0.0;
  bool stable = false;
  double xi = std::numeric_limits<double>::quiet_NaN();  // unset for raw-matrix checks
};

/// Phi (I + beta K) with beta = [-1, 0]^T, written out entrywise:
/// [[(1-k1) Phi11, Phi12 - k2 Phi11], [(1-k1) Phi21, Phi22 - k2 Phi21]].
template <typename Scalar>
Transition<Scalar> closed_loop_matrix(const Transition<Scalar>& phi, const Gain<Scalar>& k) {
  const Scalar one_minus_k1 = Scalar(1) - k(0);
  Transition<Scalar> a;
  a << one_minus_k1 * phi(0, 0), phi(0, 1) - k(1) * phi(0, 0),
       one_minus_k1 * phi(1, 0), phi(1, 1) - k(1) * phi(1, 0);
  return a;
}

/// Induced infinity norm: the largest absolute row sum.
template <typename Derived>
typename Derived::Scalar inf_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Certificate on an arbitrary closed-loop step-to-step matrix.
template <typename Scalar>
StabilityReport theorem1_check(const Transition<Scalar>& abar,
                               double slack = kDefaultStabilitySlack) {
  using std::abs;
  StabilityReport r;
  r.row1 = double(abs(abar(0, 0)) + abs(abar(0, 1)));
  r.row2 = double(abs(abar(1, 0)) + abs(abar(1, 1)));
  r.a_dn = std::max(r.row1, r.row2);
  r.stable = r.a_dn < 1.0 - slack;
  return r;
}

/// Gain certificate evaluated directly from the cosh/sinh row-sum
/// inequalities with xi = dtau sqrt(fbar).
template <typename Scalar>
StabilityReport theorem2_check(Scalar fbar, Scalar dtau, const Gain<Scalar>& k,
                               double slack = kDefaultStabilitySlack) {
  using std::abs;
  using std::cosh;
  using std::sinh;
  using std::sqrt;
  if (!(fbar > Scalar(0))) throw ModelError("supremum stiffness must be positive");
  if (!(dtau >= Scalar(0))) throw ModelError("phase duration must be non-negative");
  const Scalar root = sqrt(fbar);
  const Scalar xi = dtau * root;
  const Scalar c = cosh(xi), s = sinh(xi);
  const Scalar one_minus_k1 = Scalar(1) - k(0);
  StabilityReport r;
  r.xi = double(xi);
  r.row1 = double(abs(one_minus_k1 * c) + abs(s / root - k(1) * c));
  r.row2 = double(abs(one_minus_k1 * (root * s)) + abs(c - k(1) * (root * s)));
  r.a_dn = std::max(r.row1, r.row2);
  r.stable = r.row1 < 1.0 - slack && r.row2 < 1.0 - slack;
  return r;
}

/// K = [1, tanh(xi) / sqrt(fbar)]: zeroes the position column; a_dn = 1/cosh xi.
template <typename Scalar>
Gain<Scalar> deadbeat_gain(Scalar fbar, Scalar dtau) {
  using std::sqrt;
  using std::tanh;
  const Scalar root = sqrt(fbar);
  return Gain<Scalar>(Scalar(1), tanh(dtau * root) / root);
}

std::vector<double> linspace(double lo, double hi, std::size_t n);

struct SweepCell {
  double fbar, dtau, k1, k2;
  StabilityReport report;
};

struct SweepRegion {
  double fbar, dtau;
  std::size_t n_stable = 0;
  std::size_t n_cells = 0;
  bool non_empty() const { return n_stable > 0; }
};

struct StabilityRaster {
  std::vector<SweepCell> cells;      // fbar-major, then dtau, k1, k2
  std::vector<SweepRegion> regions;  // one per (fbar, dtau)
};

/// Evaluates the gain certificate over the Cartesian grid.
StabilityRaster sweep_stability_region(std::span<const double> fbar_values,
                                       std::span<const double> dtau_values,
                                       std::span<const double> k1_values,
                                       std::span<const double> k2_values,
                                       double slack = kDefaultStabilitySlack);

}  // namespace htlip
