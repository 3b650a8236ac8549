#pragma once

#include "htlip/surface_motion.hpp"
#include "htlip/types.hpp"

#include <cmath>
#include <type_traits>

namespace htlip {

inline constexpr double kDefaultIntegrationStep = 1e-3;  // s

/// Pendulum stiffness f = (zdd_s + g) / z0. May be negative; callers decide
/// whether that is acceptable.
template <typename Scalar>
Scalar stiffness(const ModelParams& params, Scalar zdd_s) {
  return (zdd_s + Scalar(params.g)) / Scalar(params.z0);
}

/// Foot-switch reset: the support point jumps forward by `step`, velocity is
/// continuous.
template <typename Scalar>
State<Scalar> reset_map(const State<Scalar>& pre, Scalar step) {
  return {pre(0) - step, pre(1)};
}

/// Dimensionless phase stiffness dtau * sqrt(fbar).
template <typename Scalar>
Scalar phase_xi(Scalar fbar, Scalar dtau) {
  using std::sqrt;
  return dtau * sqrt(fbar);
}

/// Closed-form transition matrix of xddot = fbar x over dtau:
/// [[cosh xi, sinh xi / sqrt fbar], [sqrt fbar sinh xi, cosh xi]].
template <typename Scalar>
Transition<Scalar> stm_supremum(Scalar fbar, Scalar dtau) {
  using std::cosh;
  using std::sinh;
  using std::sqrt;
  if (!(fbar > Scalar(0))) throw ModelError("supremum stiffness must be positive");
  if (!(dtau >= Scalar(0))) throw ModelError("phase duration must be non-negative");
  const Scalar root = sqrt(fbar);
  const Scalar xi = dtau * root;
  const Scalar c = cosh(xi), s = sinh(xi);
  Transition<Scalar> phi;
  phi << c, s / root, root * s, c;
  return phi;
}

namespace detail {

template <typename Scalar, int Cols, typename StiffnessFn, typename ForcingFn>
Eigen::Matrix<Scalar, 2, Cols> rk4_step(const Eigen::Matrix<Scalar, 2, Cols>& y, Scalar t,
                                        Scalar h, StiffnessFn& f, ForcingFn& forcing) {
  auto rhs = [&](Scalar tau, const Eigen::Matrix<Scalar, 2, Cols>& v) {
    Eigen::Matrix<Scalar, 2, Cols> d;
    d.row(0) = v.row(1);
    d.row(1) = f(tau) * v.row(0);
    if constexpr (Cols == 1) d(1) += forcing(tau);
    return d;
  };
  const Scalar half = h / Scalar(2);
  const auto k1 = rhs(t, y);
  const auto k2 = rhs(t + half, (y + half * k1).eval());
  const auto k3 = rhs(t + half, (y + half * k2).eval());
  const auto k4 = rhs(t + h, (y + h * k3).eval());
  return y + (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

struct NoForcing {
  template <typename Scalar>
  Scalar operator()(Scalar) const {
    return Scalar(0);
  }
};

}  // namespace detail

/// Integrates Ydot = alpha(t) Y (alpha = [[0, 1], [f(t), 0]]) from t0 to t1
/// with fixed-step RK4. Steps have length dt except the last, which is
/// shortened to land on t1. t1 < t0 integrates backward. For a single column
/// an optional additive acceleration `forcing(t)` enters the velocity row.
template <typename Scalar, int Cols, typename StiffnessFn, typename ForcingFn = detail::NoForcing>
Eigen::Matrix<Scalar, 2, Cols> propagate(const Eigen::Matrix<Scalar, 2, Cols>& y0,
                                         StiffnessFn&& f, Scalar t0, Scalar t1, Scalar dt,
                                         ForcingFn&& forcing = {}) {
  using std::abs;
  if (!(dt > Scalar(0))) throw ModelError("integration step must be positive");
  const Scalar span = t1 - t0;
  const Scalar dir = span < Scalar(0) ? Scalar(-1) : Scalar(1);
  const Scalar length = abs(span);
  Eigen::Matrix<Scalar, 2, Cols> y = y0;
  using std::floor;
  auto full = static_cast<long>(floor(length / dt));
  Scalar last = length - Scalar(full) * dt;
  // A sliver remainder is folded into the final step instead of taking a
  // near-zero step.
  if (full > 0 && last < Scalar(1e-9) * dt) {
    --full;
    last += dt;
  }
  for (long i = 0; i < full; ++i)
    y = detail::rk4_step<Scalar, Cols>(y, t0 + dir * Scalar(i) * dt, dir * dt, f, forcing);
  if (last > Scalar(0))
    y = detail::rk4_step<Scalar, Cols>(y, t0 + dir * Scalar(full) * dt, dir * last, f, forcing);
  if (!y.allFinite()) throw ModelError("non-finite state during integration");
  return y;
}

/// Continuous-phase flow of the pendulum on a moving surface.
template <typename Scalar>
State<Scalar> integrate_phase(const State<Scalar>& x0, const MotionProfile& profile,
                              const ModelParams& params, Scalar t0, Scalar t1,
                              Scalar dt = Scalar(kDefaultIntegrationStep)) {
  auto f = [&](Scalar t) { return Scalar(profile.stiffness(double(t), params.z0, params.g)); };
  return propagate<Scalar, 1>(x0, f, t0, t1, dt);
}

/// State-transition matrix of the time-varying phase dynamics, integrated
/// from the identity with the same RK4 scheme as integrate_phase.
template <typename Scalar>
Transition<Scalar> stm_numeric(const MotionProfile& profile, Scalar t0, Scalar t1, Scalar dt,
                               Scalar z0, Scalar g) {
  auto f = [&](Scalar t) { return Scalar(profile.stiffness(double(t), double(z0), double(g))); };
  if (t1 == t0) return Transition<Scalar>::Identity();
  return propagate<Scalar, 2>(Transition<Scalar>::Identity(), f, t0, t1, dt);
}

/// Same, for an arbitrary stiffness function f(t).
template <typename Scalar, typename StiffnessFn>
Transition<Scalar> stm_numeric(StiffnessFn&& f, Scalar t0, Scalar t1, Scalar dt) {
  if (t1 == t0) return Transition<Scalar>::Identity();
  return propagate<Scalar, 2>(Transition<Scalar>::Identity(), f, t0, t1, dt);
}

}  // namespace htlip
