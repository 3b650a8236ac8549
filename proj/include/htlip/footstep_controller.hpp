#pragma once

#include "htlip/footstep_qp.hpp"
#include "htlip/stability.hpp"
#include "htlip/types.hpp"

#include <string_view>

namespace htlip {

/// Period-1 reference orbit of the nominal static-surface pendulum
/// (stiffness f0 = g / z0), symmetric about mid-phase.
struct ReferenceGait {
  double v_des = 0.0;  // m/s
  double u_xr = 0.0;   // m, nominal step length
  double dtau = 0.0;   // s
  double f0 = 0.0;     // s^-2
  State2d post = State2d::Zero();  // X_r just after a switch: [-u/2, v]
  State2d pre = State2d::Zero();   // X_r just before a switch: [+u/2, v]

  /// Orbit state at `elapsed` seconds into a phase.
  State2d at(double elapsed) const;
};

/// Throws ModelError when v_des * dtau is outside [u_min, u_max].
ReferenceGait make_reference(double v_des, double dtau, const ModelParams& params);

/// u_xd = u_xr + k1 e + k2 edot.
template <typename Scalar>
Scalar compute_footstep(const Gain<Scalar>& k, const State<Scalar>& e, Scalar u_xr) {
  return u_xr + (k * e)(0);
}

enum class CommandStatus { Optimal, Fallback, Fixed };
std::string_view to_string(CommandStatus s);
std::string_view to_string(QpStatus s);

struct FootstepCommand {
  double u_xd = 0.0;
  Gain2d gain = Gain2d::Zero();
  CommandStatus status = CommandStatus::Optimal;
  double fbar = 0.0;
  double dtau = 0.0;
  StabilityReport certificate;  // of `gain` under (fbar, dtau)
};

/// Per-axis footstep planner. Holds the last gain for which the QP was
/// feasible; when the QP turns infeasible the footstep falls back to that
/// gain, clamped to the step-length limits.
class FootstepController {
 public:
  FootstepController(const ModelParams& params, const QpOptions& opts);

  FootstepCommand plan(double fbar, double dtau, const State2d& e, double u_xr);
  /// Fixed-gain footstep, clamped to the step-length limits.
  FootstepCommand plan_fixed(const Gain2d& k, double fbar, double dtau, const State2d& e,
                             double u_xr) const;

  const Gain2d& last_feasible_gain() const { return last_feasible_; }
  const QpSolution2d& last_solution() const { return last_solution_; }
  const QpProblem2d& last_problem() const { return last_problem_; }
  /// Commanded-step interval [l_min + eps, l_max - eps].
  StepBounds effective_bounds() const;

 private:
  ModelParams params_;
  QpOptions opts_;
  Gain2d last_feasible_;
  QpProblem2d last_problem_;
  QpSolution2d last_solution_;
};

/// Gain the QP picks at zero error on the static surface with nominal
/// duration; the fixed-gain baseline.
Gain2d static_surface_gain(const ModelParams& params, const QpOptions& opts, double u_xr);

}  // namespace htlip
