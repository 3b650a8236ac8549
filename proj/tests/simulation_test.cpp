#include "htlip/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace htlip {
namespace {

double inf_norm(const State2d& v) { return v.cwiseAbs().maxCoeff(); }

Scenario trot_on(Table1Case c, double duration = 10.0) {
  Scenario scn;
  scn.profile = MotionProfile::table1(c);
  scn.duration = duration;
  return scn;
}

TEST(Scenario, RejectsNonPositiveStiffness) {
  Scenario scn;
  scn.profile = MotionProfile::vertical_sinusoid(0.5, 10.0);
  try {
    scn.validate();
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("<= 0"), std::string::npos);
  }
}

TEST(Scenario, RejectsBadTiming) {
  Scenario scn;
  scn.duration = 0.0;
  EXPECT_THROW(scn.validate(), ModelError);
  scn = {};
  scn.dtau_jitter = 0.9;
  EXPECT_THROW(scn.validate(), ModelError);
  scn = {};
  scn.v_des = 5.0;
  EXPECT_THROW(scn.validate(), ModelError);
}

TEST(InjectPush, AddsVelocityOnly) {
  Disturbance d;
  d.magnitude = 0.0;
  EXPECT_EQ(inject_push(State2d(0.1, 0.2), d), State2d(0.1, 0.2));
  d.magnitude = 0.3;
  EXPECT_EQ(inject_push(State2d(0.1, 0.2), d), State2d(0.1, 0.5));
  d.kind = DisturbanceKind::FbarNoise;
  EXPECT_THROW(inject_push(State2d(0.1, 0.2), d), ModelError);
}

// Fixed deadbeat gain on the static surface: the pre-switch error obeys the
// geometric bound with rate 1 / cosh(xi).
TEST(RunScenario, StaticDeadbeatDecaysGeometrically) {
  Scenario scn;
  scn.e0 = State2d(0.05, 0.0);
  scn.gain_mode = {GainModeKind::Fixed, deadbeat_gain(39.24, 0.3)};
  const auto run = run_scenario(scn);
  const double rate = 1.0 / std::cosh(0.3 * std::sqrt(39.24));
  const double c = inf_norm(run.x.steps.front().e_minus);
  for (const auto& s : run.x.steps)
    EXPECT_LE(inf_norm(s.e_minus), std::pow(rate, s.n) * c + 1e-9) << "step " << s.n;
  EXPECT_FALSE(run.summary.diverged);
}

TEST(RunScenario, TrotInPlaceOnPitchingSurfaceConverges) {
  auto scn = trot_on(Table1Case::HC1);
  scn.e0 = State2d(0.03, 0.1);
  const auto run = run_scenario(scn);
  ASSERT_GE(run.x.steps.size(), 16u);
  EXPECT_LT(inf_norm(run.x.steps[15].e_minus), 1e-3);
  EXPECT_EQ(run.summary.qp_infeasible, 0u);
  EXPECT_EQ(run.summary.fallback_steps, 0u);
  for (const auto& s : run.x.steps) {
    EXPECT_EQ(s.status, CommandStatus::Optimal);
    EXPECT_LE(std::abs(s.u_xd), 0.2);
  }
}

TEST(RunScenario, ZeroErrorStaysAtRest) {
  for (auto c : {Table1Case::HC1, Table1Case::HC3}) {
    const auto run = run_scenario(trot_on(c));
    for (const auto& s : run.x.steps) EXPECT_LT(inf_norm(s.e_minus), 1e-9);
  }
  Scenario walk;
  walk.v_des = 0.3;
  for (const auto& s : run_scenario(walk).x.steps) EXPECT_LT(inf_norm(s.e_minus), 1e-9);
}

TEST(RunScenario, StepLogsAreConsistent) {
  auto scn = trot_on(Table1Case::HC2, 3.0);
  scn.v_des = 0.2;
  scn.e0 = State2d(0.01, 0.0);
  const auto run = run_scenario(scn);
  const auto ref = scn.reference();
  ASSERT_EQ(run.x.steps.size(), 11u);  // switches at 0, 0.3, ..., 3.0
  for (std::size_t i = 0; i < run.x.steps.size(); ++i) {
    const auto& s = run.x.steps[i];
    EXPECT_NEAR(s.tau_minus, 0.3 * static_cast<double>(i), 1e-12);
    EXPECT_EQ(s.x_plus(1), s.x_minus(1));
    EXPECT_NEAR(s.x_minus(0) - s.x_plus(0), s.u_xd, 1e-15);
    EXPECT_TRUE((s.e_minus - (s.x_minus - ref.pre)).isZero(1e-15));
    // Grid sampling of a smooth peak misses it by at most max|f''| h^2 / 8.
    EXPECT_GE(s.fbar, s.fbar_true - 1e-4);
    if (i + 1 < run.x.steps.size())
      EXPECT_NEAR(s.contraction_ratio,
                  inf_norm(run.x.steps[i + 1].e_minus) / inf_norm(s.e_minus), 1e-12);
  }
  ASSERT_FALSE(run.x.samples.empty());
  EXPECT_NEAR(run.x.samples[1].t - run.x.samples[0].t, scn.tick, 1e-15);
}

TEST(RunScenario, UnstableFixedGainDiverges) {
  Scenario scn;
  scn.e0 = State2d(0.01, 0.0);
  scn.gain_mode = {GainModeKind::Fixed, Gain2d::Zero()};
  const auto run = run_scenario(scn);
  EXPECT_TRUE(run.summary.diverged);
  EXPECT_GT(run.summary.certificate_failures, 0u);
}

TEST(RunScenario, JitteredPhasesStayWithinBounds) {
  auto scn = trot_on(Table1Case::HC5);
  scn.dtau_jitter = 0.2;
  scn.seed = 9;
  scn.e0 = State2d(0.02, 0.0);
  const auto run = run_scenario(scn);
  bool varied = false;
  for (const auto& s : run.x.steps) {
    EXPECT_GE(s.dtau_next, 0.3 * 0.8 - 1e-12);
    EXPECT_LE(s.dtau_next, 0.3 * 1.2 + 1e-12);
    varied = varied || std::abs(s.dtau_next - 0.3) > 1e-3;
  }
  EXPECT_TRUE(varied);
  EXPECT_FALSE(run.summary.diverged);
}

double recovery_time(const AxisTrace& trace, double push_time) {
  double peak = 0.0;
  for (const auto& s : trace.samples)
    if (s.t >= push_time) peak = std::max(peak, std::abs(s.e));
  double last_above = push_time;
  for (const auto& s : trace.samples)
    if (s.t >= push_time && std::abs(s.e) >= 0.05 * peak) last_above = s.t;
  return last_above - push_time;
}

Scenario push_scenario() {
  Scenario scn = trot_on(Table1Case::HC5, 10.0);
  scn.params.dtau = 0.2;
  scn.v_des = 0.2;
  return scn;
}

TEST(RunScenario, RecoversFromPush) {
  auto scn = push_scenario();
  scn.disturbances.push_back({DisturbanceKind::VelocityImpulse, 5.0, 0.3});
  const auto run = run_scenario(scn);
  EXPECT_FALSE(run.summary.diverged);
  EXPECT_LT(recovery_time(run.x, 5.0), 2.0);
  bool flagged = false;
  for (const auto& s : run.x.steps) flagged = flagged || s.disturbed;
  EXPECT_TRUE(flagged);
}

TEST(RunScenario, RecoversFromTwoPushes) {
  auto scn = push_scenario();
  scn.disturbances.push_back({DisturbanceKind::VelocityImpulse, 4.0, 0.3});
  scn.disturbances.push_back({DisturbanceKind::VelocityImpulse, 5.0, -0.3});
  const auto run = run_scenario(scn);
  EXPECT_FALSE(run.summary.diverged);
  EXPECT_EQ(run.summary.fallback_steps, 0u);
  EXPECT_LT(recovery_time(run.x, 5.0), 2.0);
  for (const auto& s : run.x.steps) EXPECT_LE(std::abs(s.u_xd), 0.2);
}

TEST(RunScenario, LateralSwayRunsSecondAxis) {
  Scenario scn = trot_on(Table1Case::HC5, 4.0);
  scn.disturbances.push_back({DisturbanceKind::SwayAccel, 1.0, 0.4, Axis::Y, 3.0});
  const auto run = run_scenario(scn);
  ASSERT_TRUE(run.y.has_value());
  EXPECT_EQ(run.y->axis, Axis::Y);
  double peak = 0.0;
  for (const auto& s : run.y->samples) peak = std::max(peak, std::abs(s.e));
  EXPECT_GT(peak, 1e-4);
  EXPECT_FALSE(run.summary.diverged);
}

TEST(RunScenario, Hc4SwaySchedule) {
  const auto sway = hc4_sway_schedule();
  ASSERT_EQ(sway.size(), 2u);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(std::abs(sway[0].magnitude), 0.040 * pi2, 1e-12);
  EXPECT_NEAR(std::abs(sway[1].magnitude), 0.065 * pi2, 1e-12);
  EXPECT_EQ(sway[0].end_time, 122.0);
  EXPECT_EQ(sway[1].time, 122.0);
}

TEST(RunScenario, CausalEstimatorRuns) {
  auto scn = trot_on(Table1Case::HC1);
  scn.fbar_mode = FbarMode::CausalWindow;
  scn.fbar_margin = 4.0;
  scn.e0 = State2d(0.02, 0.05);
  const auto run = run_scenario(scn);
  EXPECT_FALSE(run.summary.diverged);
  EXPECT_LT(run.summary.final_error, 1e-3);
}

TEST(RunScenario, PerStepModeHoldsGainWithinPhase) {
  auto scn = trot_on(Table1Case::HC2, 2.0);
  scn.gain_mode.kind = GainModeKind::PerStep;
  scn.e0 = State2d(0.02, 0.0);
  const auto run = run_scenario(scn);
  for (std::size_t i = 0; i + 1 < run.x.samples.size(); ++i) {
    const auto& a = run.x.samples[i];
    const auto& b = run.x.samples[i + 1];
    if (std::floor(a.t / 0.3 + 1e-9) == std::floor(b.t / 0.3 + 1e-9)) EXPECT_EQ(a.k2, b.k2);
  }
}

TEST(MonteCarlo, ZeroRandomizationRepeatsTemplate) {
  auto scn = trot_on(Table1Case::HC5, 3.0);
  scn.e0 = State2d(0.02, 0.01);
  const auto mc = monte_carlo(scn, 4, RandomizationSpec{}, 1);
  ASSERT_EQ(mc.trials.size(), 4u);
  for (const auto& t : mc.trials) {
    EXPECT_EQ(t.summary.max_error, mc.trials[0].summary.max_error);
    EXPECT_EQ(t.summary.final_error, mc.trials[0].summary.final_error);
  }
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  auto scn = trot_on(Table1Case::HC1, 4.0);
  RandomizationSpec spec;
  spec.e0_pos = 0.02;
  spec.push_count = 1;
  spec.push_max = 0.2;
  spec.fbar_noise_max = 4.0;
  const auto a = monte_carlo(scn, 12, spec, 7, 1);
  const auto b = monte_carlo(scn, 12, spec, 7, 4);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].seed, b.trials[i].seed);
    EXPECT_EQ(a.trials[i].summary.max_error, b.trials[i].summary.max_error);
  }
  EXPECT_EQ(a.success_rate, b.success_rate);
}

TEST(MonteCarlo, SuccessRateFallsWithPushSize) {
  auto scn = push_scenario();
  scn.duration = 6.0;
  double previous = 1.1;
  for (double push : {0.1, 0.3, 0.6, 1.0}) {
    RandomizationSpec spec;
    spec.push_count = 1;
    spec.push_max = push;
    const auto mc = monte_carlo(scn, 30, spec, 21);
    EXPECT_LE(mc.success_rate, previous) << "push " << push;
    previous = mc.success_rate;
  }
  EXPECT_LT(previous, 1.0);
}

TEST(MonteCarlo, TrialSeedsDiffer) {
  EXPECT_NE(trial_seed(7, 0), trial_seed(7, 1));
  EXPECT_NE(trial_seed(7, 0), trial_seed(8, 0));
  EXPECT_EQ(trial_seed(7, 3), trial_seed(7, 3));
}

TEST(Compare, StaticSurfaceBothStable) {
  Scenario scn;
  scn.v_des = 0.2;
  scn.e0 = State2d(0.03, 0.05);
  const auto cmp = compare_controllers(scn);
  EXPECT_FALSE(cmp.proposed.summary.diverged);
  EXPECT_FALSE(cmp.baseline.summary.diverged);
  EXPECT_NEAR(cmp.proposed.summary.max_error, cmp.baseline.summary.max_error,
              0.1 * cmp.baseline.summary.max_error);
}

TEST(Compare, BaselineCertificateLoggedOnMovingSurface) {
  auto scn = trot_on(Table1Case::HC2, 10.0);
  scn.e0 = State2d(0.02, 0.0);
  const auto cmp = compare_controllers(scn);
  const auto& steps = cmp.baseline.x.steps;
  ASSERT_FALSE(steps.empty());
  for (const auto& s : steps) {
    EXPECT_EQ(s.status, CommandStatus::Fixed);
    EXPECT_GT(s.a_dn, 0.0);
    EXPECT_GT(s.fbar_true, 0.0);
  }
}

}  // namespace
}  // namespace htlip
