#include "htlip/footstep_controller.hpp"

#include <algorithm>
#include <cmath>

namespace htlip {

State2d ReferenceGait::at(double elapsed) const {
  if (u_xr == 0.0) return State2d::Zero();
  const double root = std::sqrt(f0);
  const double amplitude = 0.5 * u_xr / std::sinh(root * dtau / 2.0);
  const double arg = root * (elapsed - dtau / 2.0);
  return {amplitude * std::sinh(arg), amplitude * root * std::cosh(arg)};
}

ReferenceGait make_reference(double v_des, double dtau, const ModelParams& params) {
  if (!(dtau > 0.0)) throw ModelError("reference phase duration must be positive");
  const double u = v_des * dtau;
  if (u < params.u_min || u > params.u_max)
    throw ModelError("nominal step length " + std::to_string(u) + " m outside [" +
                     std::to_string(params.u_min) + ", " + std::to_string(params.u_max) + "]");
  ReferenceGait ref;
  ref.v_des = v_des;
  ref.u_xr = u;
  ref.dtau = dtau;
  ref.f0 = params.nominal_stiffness();
  const double root = std::sqrt(ref.f0);
  const double v = u == 0.0 ? 0.0 : root * (u / 2.0) / std::tanh(root * dtau / 2.0);
  ref.post = State2d(-u / 2.0, v);
  ref.pre = State2d(u / 2.0, v);
  return ref;
}

std::string_view to_string(CommandStatus s) {
  switch (s) {
    case CommandStatus::Optimal:
      return "optimal";
    case CommandStatus::Fallback:
      return "fallback";
    case CommandStatus::Fixed:
      return "fixed";
  }
  return "?";
}

std::string_view to_string(QpStatus s) {
  return s == QpStatus::Optimal ? "optimal" : "infeasible";
}

FootstepController::FootstepController(const ModelParams& params, const QpOptions& opts)
    : params_(params), opts_(opts) {
  last_feasible_ = static_surface_gain(params, opts, 0.0);
}

StepBounds FootstepController::effective_bounds() const {
  const auto b = step_length_bounds(params_, opts_.friction);
  return {b.l_min + opts_.eps, b.l_max - opts_.eps};
}

FootstepCommand FootstepController::plan(double fbar, double dtau, const State2d& e,
                                         double u_xr) {
  last_problem_ = build_qp(fbar, dtau, e, u_xr, params_, opts_);
  last_solution_ = solve_qp(last_problem_);
  FootstepCommand cmd;
  cmd.fbar = fbar;
  cmd.dtau = dtau;
  if (last_solution_.status == QpStatus::Optimal) {
    last_feasible_ = last_solution_.K;
    cmd.gain = last_solution_.K;
    cmd.u_xd = compute_footstep(cmd.gain, e, u_xr);
    cmd.status = CommandStatus::Optimal;
  } else {
    const auto b = effective_bounds();
    cmd.gain = last_feasible_;
    cmd.u_xd = std::clamp(compute_footstep(cmd.gain, e, u_xr), b.l_min, b.l_max);
    cmd.status = CommandStatus::Fallback;
  }
  cmd.certificate = theorem2_check(fbar, dtau, cmd.gain);
  return cmd;
}

FootstepCommand FootstepController::plan_fixed(const Gain2d& k, double fbar, double dtau,
                                               const State2d& e, double u_xr) const {
  const auto b = effective_bounds();
  FootstepCommand cmd;
  cmd.fbar = fbar;
  cmd.dtau = dtau;
  cmd.gain = k;
  cmd.u_xd = std::clamp(compute_footstep(k, e, u_xr), b.l_min, b.l_max);
  cmd.status = CommandStatus::Fixed;
  cmd.certificate = theorem2_check(fbar, dtau, k);
  return cmd;
}

Gain2d static_surface_gain(const ModelParams& params, const QpOptions& opts, double u_xr) {
  const auto qp =
      build_qp(params.nominal_stiffness(), params.dtau, State2d::Zero().eval(), u_xr, params, opts);
  const auto sol = solve_qp(qp);
  if (sol.status != QpStatus::Optimal)
    return deadbeat_gain(params.nominal_stiffness(), params.dtau);
  return sol.K;
}

}  // namespace htlip
