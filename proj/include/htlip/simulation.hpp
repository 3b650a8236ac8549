#pragma once

#include "htlip/footstep_controller.hpp"
#include "htlip/surface_motion.hpp"
#include "htlip/types.hpp"

#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace htlip {

enum class FbarMode {
  /// Supremum over the phase the gain governs (motion known to the estimator).
  OracleHorizon,
  /// Backward window ending at the current tick (motion unknown).
  CausalWindow,
};

enum class GainModeKind { PerTick, PerStep, Fixed };

struct GainMode {
  GainModeKind kind = GainModeKind::PerTick;
  Gain2d fixed = Gain2d::Zero();
};

enum class Axis { X, Y };

enum class DisturbanceKind {
  VelocityImpulse,  // magnitude m/s, applied once at `time`
  FbarNoise,        // magnitude s^-2, uniform noise on stiffness samples over [time, end_time)
  SwayAccel,        // magnitude m/s^2, sinusoidal lateral surface acceleration over [time, end_time)
};

struct Disturbance {
  DisturbanceKind kind = DisturbanceKind::VelocityImpulse;
  double time = 0.0;
  double magnitude = 0.0;
  Axis axis = Axis::X;
  double end_time = std::numeric_limits<double>::infinity();
  double omega = std::numbers::pi;  // rad/s, sway only
};

std::string_view to_string(DisturbanceKind k);
std::string_view to_string(Axis a);
std::string_view to_string(FbarMode m);

/// Instantaneous push: xdot += magnitude, x unchanged.
State2d inject_push(const State2d& state, const Disturbance& d);

/// Sway disturbances with the lateral displacement program of case HC4:
/// 40 mm sin(pi t) on (83, 122] s and 65 mm sin(pi t) on (122, 160] s.
std::vector<Disturbance> hc4_sway_schedule();

struct Scenario {
  MotionProfile profile = MotionProfile::static_surface();
  ModelParams params;
  double v_des = 0.0;  // m/s; the reference gait follows from v_des and params.dtau
  double duration = 10.0;
  State2d e0 = State2d::Zero();
  std::vector<Disturbance> disturbances;
  FbarMode fbar_mode = FbarMode::OracleHorizon;
  GainMode gain_mode;
  QpOptions qp;
  double fbar_margin = 0.0;    // s^-2
  double causal_window = 0.0;  // s; 0 means one nominal phase
  double tick = 5e-3;          // s, control period
  double dt = 1e-3;            // s, RK4 step
  double dtau_jitter = 0.0;    // relative, per-step uniform in [-j, j]
  double error_bound = 1.0;    // m; runs exceeding it are reported as divergent
  std::uint64_t seed = 0;

  ReferenceGait reference() const;
  /// Throws ModelError naming the offending quantity.
  void validate() const;
};

struct StepLog {
  int n = 0;
  Axis axis = Axis::X;
  double tau_minus = 0.0, tau_plus = 0.0;
  State2d x_minus = State2d::Zero(), x_plus = State2d::Zero();
  State2d e_minus = State2d::Zero();
  double u_xd = 0.0;
  Gain2d gain = Gain2d::Zero();
  double fbar = 0.0;       // bound used for the gain
  double fbar_true = 0.0;  // supremum of f over the governed phase
  double dtau_next = 0.0;  // duration of the governed phase
  double a_dn = 0.0;
  bool certificate_stable = false;  // gain certificate under fbar_true
  CommandStatus status = CommandStatus::Optimal;
  bool disturbed = false;  // push, sway or estimator noise in the governed phase
  /// ||e_{n+1}^-||_inf / ||e_n^-||_inf; NaN when not available.
  double contraction_ratio = std::numeric_limits<double>::quiet_NaN();
  double next_error_norm = std::numeric_limits<double>::quiet_NaN();
};

struct TrajectorySample {
  double t, x, xdot, x_ref, e, u_xd, k1, k2, a_dn, fbar, z_s, zdd_s;
};

struct AxisTrace {
  Axis axis = Axis::X;
  std::vector<StepLog> steps;
  std::vector<TrajectorySample> samples;
};

struct RunSummary {
  std::size_t steps = 0;
  double final_error = 0.0;  // ||e^-||_inf at the last switch
  double max_error = 0.0;    // max over ticks of ||X - X_r||_inf
  double max_contraction_ratio = 0.0;  // over undisturbed optimal steps
  std::size_t contraction_checked = 0;
  std::size_t contraction_violations = 0;  // ||e_{n+1}|| > a_dn ||e_n|| + 1e-6
  std::size_t qp_infeasible = 0;
  std::size_t fallback_steps = 0;
  std::size_t certificate_failures = 0;  // steps whose gain fails the certificate under fbar_true
  double step_drift = 0.0;  // |sum u_xd - sum u_xr| on the x axis
  bool diverged = false;
  int divergence_step = -1;
};

struct RunResult {
  AxisTrace x;
  std::optional<AxisTrace> y;
  RunSummary summary;
};

inline constexpr double kContractionTolerance = 1e-6;

/// Hybrid closed-loop simulation: RK4 phases, per-tick footstep planning and
/// foot-switch resets. Throws ModelError if validation fails or the state
/// becomes non-finite (message carries the step index).
RunResult run_scenario(const Scenario& scn);

struct RandomizationSpec {
  double e0_pos = 0.0;         // m, uniform in [-a, a]
  double e0_vel = 0.0;         // m/s
  int push_count = 0;
  double push_max = 0.0;       // m/s, |magnitude| uniform in [0, max], random sign
  double push_window_start = 1.0;  // s
  double push_window_end = -1.0;   // s; negative means duration - 2 s
  Axis push_axis = Axis::X;
  double fbar_noise_max = 0.0;  // s^-2, amplitude uniform in [0, max]

  bool is_zero() const {
    return e0_pos == 0.0 && e0_vel == 0.0 && (push_count == 0 || push_max == 0.0) &&
           fbar_noise_max == 0.0;
  }
};

struct TrialResult {
  std::uint64_t seed = 0;
  RunSummary summary;
  bool success = false;
};

struct MonteCarloSummary {
  std::size_t n_trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_contraction_ratio = 0.0;
  double max_contraction_ratio = 0.0;
  double max_error = 0.0;       // worst trial
  double mean_max_error = 0.0;
  std::vector<TrialResult> trials;
};

/// Scenario for trial `index`: randomized copy of the template.
Scenario randomize_scenario(const Scenario& tmpl, const RandomizationSpec& spec,
                            std::uint64_t trial_seed);
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t index);
bool trial_succeeded(const RunSummary& s, double error_bound);

/// Independent trials, optionally in parallel; results are ordered by trial.
MonteCarloSummary monte_carlo(const Scenario& tmpl, std::size_t n_trials,
                              const RandomizationSpec& spec, std::uint64_t base_seed,
                              unsigned threads = 0);

/// Same scenario under the per-tick QP controller and under the fixed gain
/// certified only for the static surface.
struct Comparison {
  RunResult proposed;
  RunResult baseline;
  Gain2d baseline_gain;
};

Scenario as_baseline(const Scenario& scn);
Comparison compare_controllers(const Scenario& scn);

}  // namespace htlip
