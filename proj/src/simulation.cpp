#include "htlip/simulation.hpp"

#include "htlip/dynamics.hpp"
#include "htlip/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace htlip {

std::string_view to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::VelocityImpulse:
      return "velocity_impulse";
    case DisturbanceKind::FbarNoise:
      return "fbar_noise";
    case DisturbanceKind::SwayAccel:
      return "sway_accel";
  }
  return "?";
}

std::string_view to_string(Axis a) { return a == Axis::X ? "x" : "y"; }

std::string_view to_string(FbarMode m) {
  return m == FbarMode::OracleHorizon ? "oracle_horizon" : "causal_window";
}

State2d inject_push(const State2d& state, const Disturbance& d) {
  if (d.kind != DisturbanceKind::VelocityImpulse)
    throw ModelError("inject_push expects a velocity impulse");
  return {state(0), state(1) + d.magnitude};
}

std::vector<Disturbance> hc4_sway_schedule() {
  // y_s = A sin(pi t)  =>  yddot_s = -A pi^2 sin(pi t); the sign is carried
  // by the magnitude so the forcing is magnitude * sin(omega t).
  const double pi2 = std::numbers::pi * std::numbers::pi;
  Disturbance a{DisturbanceKind::SwayAccel, 83.0, -0.040 * pi2, Axis::Y, 122.0};
  Disturbance b{DisturbanceKind::SwayAccel, 122.0, -0.065 * pi2, Axis::Y, 160.0};
  return {a, b};
}

ReferenceGait Scenario::reference() const { return make_reference(v_des, params.dtau, params); }

void Scenario::validate() const {
  params.validate();
  if (!(duration > 0.0)) throw ModelError("duration must be positive");
  if (!(tick > 0.0) || !(dt > 0.0)) throw ModelError("tick and dt must be positive");
  if (dt > tick) throw ModelError("integration step dt must not exceed the control tick");
  if (!(dtau_jitter >= 0.0 && dtau_jitter < 1.0)) throw ModelError("dtau_jitter must be in [0, 1)");
  const double shortest = params.dtau * (1.0 - dtau_jitter);
  const double longest = params.dtau * (1.0 + dtau_jitter);
  if (shortest < ModelParams::kMinDtau || longest > ModelParams::kMaxDtau)
    throw ModelError("jittered phase durations leave the admissible range");
  if (!(error_bound > 0.0)) throw ModelError("error_bound must be positive");
  if (fbar_margin < 0.0) throw ModelError("fbar margin must be non-negative");
  if (causal_window < 0.0) throw ModelError("causal window must be non-negative");
  if (!e0.allFinite()) throw ModelError("initial error must be finite");
  for (const auto& d : disturbances) {
    if (!std::isfinite(d.time) || !std::isfinite(d.magnitude))
      throw ModelError("disturbance time and magnitude must be finite");
    if (d.kind == DisturbanceKind::FbarNoise && d.magnitude < 0.0)
      throw ModelError("fbar noise amplitude must be non-negative");
  }
  (void)reference();
  const double horizon = duration + 2.0 * longest;
  const double fmin = stiffness_infimum(profile, 0.0, horizon, params.z0, params.g, 1e-3);
  if (!(fmin > 0.0))
    throw ModelError("stiffness (zdd_s + g) / z0 reaches " + std::to_string(fmin) +
                     " s^-2 <= 0: surface acceleration outside the model's validity");
}

namespace {

double inf_norm(const State2d& v) { return v.cwiseAbs().maxCoeff(); }

struct AxisSetup {
  Axis axis = Axis::X;
  ReferenceGait ref;
  State2d e0 = State2d::Zero();
  std::vector<Disturbance> pushes;  // sorted by time
  std::vector<Disturbance> sways;
  std::vector<Disturbance> noise;
  std::uint64_t noise_seed = 0;
};

bool interval_hits(const Disturbance& d, double lo, double hi) {
  return d.time <= hi && d.end_time >= lo;
}

class AxisSimulator {
 public:
  AxisSimulator(const Scenario& scn, const AxisSetup& setup, const std::vector<double>& bounds)
      : scn_(scn),
        setup_(setup),
        bounds_(bounds),
        ctrl_(scn.params, scn.qp),
        rng_(setup.noise_seed),
        f0_(scn.params.nominal_stiffness()) {
    gain_ = scn.gain_mode.kind == GainModeKind::Fixed ? scn.gain_mode.fixed
                                                        : ctrl_.last_feasible_gain();
  }

  AxisTrace run(RunSummary& summary) {
    AxisTrace trace;
    trace.axis = setup_.axis;
    const auto& ref = setup_.ref;
    // The run opens at a foot switch with pre-switch error e0.
    State2d X = ref.pre + setup_.e0;
    std::size_t push_idx = 0;
    while (push_idx < setup_.pushes.size() && setup_.pushes[push_idx].time <= 0.0)
      X = inject_push(X, setup_.pushes[push_idx++]);
    X = foot_switch(trace, summary, X, 0.0, bounds_[1] - bounds_[0]);

    for (std::size_t n = 0; n + 2 < bounds_.size(); ++n) {
      const double T0 = bounds_[n], T1 = bounds_[n + 1];
      if (T0 >= scn_.duration) break;
      const double t_end = std::min(T1, scn_.duration);
      const double d_next = bounds_[n + 2] - T1;
      if (scn_.fbar_mode == FbarMode::OracleHorizon) cached_oracle_.reset();

      // Control ticks of this phase, then integration to the next tick.
      for (long j = 0;; ++j) {
        const double tk = T0 + static_cast<double>(j) * scn_.tick;
        if (tk >= t_end - 1e-12) break;
        const double next = std::min(T0 + static_cast<double>(j + 1) * scn_.tick, t_end);
        if (!sample(trace, summary, X, tk, T0, T1, d_next)) return trace;
        try {
          double t = tk;
          while (push_idx < setup_.pushes.size() && setup_.pushes[push_idx].time <= next) {
            const auto& push = setup_.pushes[push_idx++];
            if (push.time > t) {
              X = flow(X, t, push.time);
              t = push.time;
            }
            X = inject_push(X, push);
          }
          if (next > t) X = flow(X, t, next);
        } catch (const ModelError& err) {
          throw ModelError("step " + std::to_string(trace.steps.size()) + ": " + err.what());
        }
      }
      if (T1 > scn_.duration + 1e-12) break;
      X = foot_switch(trace, summary, X, T1, d_next);
    }
    return trace;
  }

 private:
  // Plans with the actual pre-switch error, logs the step and applies the
  // reset. `d_next` is the duration of the phase the new gain governs.
  State2d foot_switch(AxisTrace& trace, RunSummary& summary, const State2d& X, double T,
                      double d_next) {
    const auto& ref = setup_.ref;
    StepLog log;
    log.n = static_cast<int>(trace.steps.size());
    log.axis = setup_.axis;
    log.tau_minus = log.tau_plus = T;
    log.x_minus = X;
    log.e_minus = X - ref.pre;
    log.dtau_next = d_next;
    if (scn_.fbar_mode == FbarMode::OracleHorizon) cached_oracle_.reset();
    const auto cmd = command(T, T, d_next, log.e_minus, true, summary);
    log.u_xd = cmd.u_xd;
    log.gain = cmd.gain;
    log.fbar = cmd.fbar;
    log.a_dn = cmd.certificate.a_dn;
    log.status = cmd.status;
    log.fbar_true =
        stiffness_supremum(scn_.profile, T, T + d_next, scn_.params.z0, scn_.params.g);
    log.certificate_stable = theorem2_check(log.fbar_true, d_next, cmd.gain).stable;
    log.disturbed = governed_phase_disturbed(T, T + d_next);
    log.x_plus = reset_map(X, cmd.u_xd);

    const double err = inf_norm(log.e_minus);
    if (!trace.steps.empty()) {
      auto& prev = trace.steps.back();
      prev.next_error_norm = err;
      const double prev_err = inf_norm(prev.e_minus);
      if (prev_err > 1e-12) prev.contraction_ratio = err / prev_err;
    }
    trace.steps.push_back(log);
    return log.x_plus;
  }

  State2d flow(const State2d& X, double t0, double t1) const {
    const auto& profile = scn_.profile;
    const double z0 = scn_.params.z0, g = scn_.params.g;
    auto f = [&](double t) { return profile.stiffness(t, z0, g); };
    if (setup_.sways.empty()) return propagate<double, 1>(X, f, t0, t1, scn_.dt);
    // Surface sway accelerates the support point; the CoM relative to it sees
    // the opposite acceleration.
    auto forcing = [&](double t) {
      double a = 0.0;
      for (const auto& s : setup_.sways)
        if (t > s.time && t <= s.end_time) a += s.magnitude * std::sin(s.omega * t);
      return -a;
    };
    return propagate<double, 1>(X, f, t0, t1, scn_.dt, forcing);
  }

  double noise_amplitude(double t) const {
    double a = 0.0;
    for (const auto& d : setup_.noise)
      if (t >= d.time && t < d.end_time) a = std::max(a, d.magnitude);
    return a;
  }

  bool governed_phase_disturbed(double lo, double hi) const {
    for (const auto& d : setup_.pushes)
      if (d.time > lo && d.time <= hi) return true;
    for (const auto& d : setup_.sways)
      if (interval_hits(d, lo, hi)) return true;
    for (const auto& d : setup_.noise)
      if (d.magnitude > 0.0 && interval_hits(d, lo, hi)) return true;
    return false;
  }

  // Stiffness bound the controller uses at time t for the phase starting at
  // `phase_start` with duration `d_next`.
  double fbar_estimate(double t, double phase_start, double d_next) {
    FbarOptions opts;
    opts.margin = scn_.fbar_margin;
    opts.noise_amplitude = noise_amplitude(t);
    const double z0 = scn_.params.z0, g = scn_.params.g;
    if (scn_.fbar_mode == FbarMode::OracleHorizon) {
      if (opts.noise_amplitude == 0.0) {
        if (!cached_oracle_)
          cached_oracle_ = estimate_fbar(scn_.profile, phase_start, d_next, z0, g, opts).fbar;
        return *cached_oracle_;
      }
      return estimate_fbar(scn_.profile, phase_start, d_next, z0, g, opts, &rng_).fbar;
    }
    const double window = scn_.causal_window > 0.0 ? scn_.causal_window : scn_.params.dtau;
    return estimate_fbar_causal(scn_.profile, t, window, z0, g, opts, &rng_).fbar;
  }

  FootstepCommand command(double t, double phase_start, double d_next, const State2d& e,
                          bool at_switch, RunSummary& summary) {
    const double fbar = fbar_estimate(t, phase_start, d_next);
    const double u_xr = setup_.ref.u_xr;
    switch (scn_.gain_mode.kind) {
      case GainModeKind::Fixed:
        return ctrl_.plan_fixed(scn_.gain_mode.fixed, fbar, d_next, e, u_xr);
      case GainModeKind::PerStep:
        if (!at_switch) {
          FootstepCommand cmd;
          cmd.fbar = fbar;
          cmd.dtau = d_next;
          cmd.gain = gain_;
          cmd.u_xd = compute_footstep(gain_, e, u_xr);
          cmd.certificate = theorem2_check(fbar, d_next, gain_);
          return cmd;
        }
        [[fallthrough]];
      case GainModeKind::PerTick: {
        auto cmd = ctrl_.plan(fbar, d_next, e, u_xr);
        if (ctrl_.last_solution().status == QpStatus::Infeasible) ++summary.qp_infeasible;
        if (at_switch && cmd.status == CommandStatus::Fallback) ++summary.fallback_steps;
        gain_ = cmd.gain;
        return cmd;
      }
    }
    return {};
  }

  // Planning and logging at a control tick; false once the run diverged.
  bool sample(AxisTrace& trace, RunSummary& summary, const State2d& X, double tk, double T0,
              double T1, double d_next) {
    const auto& ref = setup_.ref;
    const State2d predicted = stm_supremum(f0_, T1 - tk) * X;
    const auto cmd = command(tk, T1, d_next, (predicted - ref.pre).eval(), false, summary);
    const State2d xr = ref.at(tk - T0);
    const auto surf = scn_.profile.vertical(tk);
    trace.samples.push_back({tk, X(0), X(1), xr(0), X(0) - xr(0), cmd.u_xd, cmd.gain(0),
                             cmd.gain(1), cmd.certificate.a_dn, cmd.fbar, surf.z, surf.zdd});
    const double err = inf_norm(X - xr);
    summary.max_error = std::max(summary.max_error, err);
    if (!(err <= scn_.error_bound)) {
      summary.diverged = true;
      summary.divergence_step = static_cast<int>(trace.steps.size());
      return false;
    }
    return true;
  }

  const Scenario& scn_;
  const AxisSetup& setup_;
  const std::vector<double>& bounds_;
  FootstepController ctrl_;
  std::mt19937_64 rng_;
  double f0_;
  Gain2d gain_;
  std::optional<double> cached_oracle_;
};

std::vector<double> phase_boundaries(const Scenario& scn) {
  std::mt19937_64 rng(scn.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::vector<double> bounds{0.0};
  // Two phases past the end so every switch knows the phase it governs.
  while (bounds.size() < 3 || bounds[bounds.size() - 3] <= scn.duration) {
    const double j = scn.dtau_jitter > 0.0 ? scn.dtau_jitter * jitter(rng) : 0.0;
    bounds.push_back(bounds.back() + scn.params.dtau * (1.0 + j));
  }
  return bounds;
}

void accumulate(RunSummary& summary, const AxisTrace& trace) {
  for (const auto& s : trace.steps) {
    if (!s.certificate_stable) ++summary.certificate_failures;
    if (s.status != CommandStatus::Optimal || s.disturbed || std::isnan(s.next_error_norm))
      continue;
    const double prev = inf_norm(s.e_minus);
    ++summary.contraction_checked;
    if (s.next_error_norm > s.a_dn * prev + kContractionTolerance) ++summary.contraction_violations;
    if (!std::isnan(s.contraction_ratio) && prev > kContractionTolerance)
      summary.max_contraction_ratio = std::max(summary.max_contraction_ratio, s.contraction_ratio);
  }
}

}  // namespace

RunResult run_scenario(const Scenario& scn) {
  scn.validate();
  const auto bounds = phase_boundaries(scn);

  AxisSetup xs;
  xs.axis = Axis::X;
  xs.ref = scn.reference();
  xs.e0 = scn.e0;
  xs.noise_seed = scn.seed * 2 + 1;
  AxisSetup ys;
  ys.axis = Axis::Y;
  ys.ref = make_reference(0.0, scn.params.dtau, scn.params);
  ys.noise_seed = scn.seed * 2 + 2;
  bool lateral = false;
  for (const auto& d : scn.disturbances) {
    AxisSetup& target = d.axis == Axis::X ? xs : ys;
    if (d.axis == Axis::Y && d.kind != DisturbanceKind::FbarNoise) lateral = true;
    switch (d.kind) {
      case DisturbanceKind::VelocityImpulse:
        target.pushes.push_back(d);
        break;
      case DisturbanceKind::SwayAccel:
        target.sways.push_back(d);
        break;
      case DisturbanceKind::FbarNoise:
        // The stiffness estimate is shared by both axes.
        xs.noise.push_back(d);
        ys.noise.push_back(d);
        break;
    }
  }
  for (auto* s : {&xs, &ys})
    std::stable_sort(s->pushes.begin(), s->pushes.end(),
                     [](const Disturbance& a, const Disturbance& b) { return a.time < b.time; });

  RunResult result;
  result.x = AxisSimulator(scn, xs, bounds).run(result.summary);
  if (lateral && !result.summary.diverged)
    result.y = AxisSimulator(scn, ys, bounds).run(result.summary);

  auto& sum = result.summary;
  sum.steps = result.x.steps.size();
  if (!result.x.steps.empty()) sum.final_error = inf_norm(result.x.steps.back().e_minus);
  accumulate(sum, result.x);
  if (result.y) accumulate(sum, *result.y);
  const double u_xr = xs.ref.u_xr;
  double drift = 0.0;
  for (const auto& s : result.x.steps) drift += s.u_xd - u_xr;
  sum.step_drift = std::abs(drift);
  return result;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t index) {
  // splitmix64 finaliser
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Scenario randomize_scenario(const Scenario& tmpl, const RandomizationSpec& spec,
                            std::uint64_t seed) {
  if (spec.is_zero()) return tmpl;
  Scenario scn = tmpl;
  scn.seed = seed;
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  scn.e0 = tmpl.e0 + State2d(uniform(-spec.e0_pos, spec.e0_pos), uniform(-spec.e0_vel, spec.e0_vel));
  const double w_end = spec.push_window_end >= 0.0 ? spec.push_window_end : tmpl.duration - 2.0;
  for (int i = 0; i < spec.push_count && spec.push_max > 0.0; ++i) {
    Disturbance push;
    push.kind = DisturbanceKind::VelocityImpulse;
    push.axis = spec.push_axis;
    push.time = uniform(spec.push_window_start, std::max(spec.push_window_start, w_end));
    const double mag = uniform(0.0, spec.push_max);
    push.magnitude = uniform(0.0, 1.0) < 0.5 ? -mag : mag;
    scn.disturbances.push_back(push);
  }
  if (spec.fbar_noise_max > 0.0) {
    Disturbance noise;
    noise.kind = DisturbanceKind::FbarNoise;
    noise.time = 0.0;
    noise.magnitude = uniform(0.0, spec.fbar_noise_max);
    scn.disturbances.push_back(noise);
  }
  return scn;
}

bool trial_succeeded(const RunSummary& s, double error_bound) {
  return !s.diverged && s.qp_infeasible == 0 && s.max_error < error_bound;
}

MonteCarloSummary monte_carlo(const Scenario& tmpl, std::size_t n_trials,
                              const RandomizationSpec& spec, std::uint64_t base_seed,
                              unsigned threads) {
  if (n_trials == 0) throw ModelError("monte carlo needs at least one trial");
  MonteCarloSummary out;
  out.n_trials = n_trials;
  out.trials.resize(n_trials);
  // Steps considered for the contraction statistics, per trial.
  std::vector<std::vector<double>> ratios(n_trials);

  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(n_trials);
  auto worker = [&] {
    for (std::size_t i = next++; i < n_trials; i = next++) {
      const auto seed = trial_seed(base_seed, i);
      auto& trial = out.trials[i];
      trial.seed = seed;
      try {
        const auto scn = randomize_scenario(tmpl, spec, seed);
        const auto run = run_scenario(scn);
        trial.summary = run.summary;
        trial.success = trial_succeeded(run.summary, scn.error_bound);
        for (const auto* axis : {&run.x, run.y ? &*run.y : nullptr}) {
          if (axis == nullptr) continue;
          for (const auto& s : axis->steps)
            if (s.status == CommandStatus::Optimal && !s.disturbed &&
                !std::isnan(s.contraction_ratio))
              ratios[i].push_back(s.contraction_ratio);
        }
      } catch (const ModelError& err) {
        errors[i] = err.what();
        trial.summary.diverged = true;
        trial.success = false;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(threads == 0 ? hw : threads, n_trials));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;
  double max_error_sum = 0.0;
  for (std::size_t i = 0; i < n_trials; ++i) {
    const auto& trial = out.trials[i];
    out.successes += trial.success ? 1 : 0;
    out.max_error = std::max(out.max_error, trial.summary.max_error);
    max_error_sum += trial.summary.max_error;
    for (double r : ratios[i]) {
      ratio_sum += r;
      ++ratio_count;
      out.max_contraction_ratio = std::max(out.max_contraction_ratio, r);
    }
  }
  out.success_rate = static_cast<double>(out.successes) / static_cast<double>(n_trials);
  out.mean_contraction_ratio = ratio_count > 0 ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
  out.mean_max_error = max_error_sum / static_cast<double>(n_trials);
  return out;
}

Scenario as_baseline(const Scenario& scn) {
  Scenario base = scn;
  base.gain_mode.kind = GainModeKind::Fixed;
  base.gain_mode.fixed = static_surface_gain(scn.params, scn.qp, scn.reference().u_xr);
  return base;
}

Comparison compare_controllers(const Scenario& scn) {
  Scenario proposed = scn;
  proposed.gain_mode.kind = GainModeKind::PerTick;
  const Scenario baseline = as_baseline(scn);
  return {run_scenario(proposed), run_scenario(baseline), baseline.gain_mode.fixed};
}

}  // namespace htlip
