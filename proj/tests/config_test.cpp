#include "htlip/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace htlip::config {
namespace {

constexpr const char* kPush = R"(
# comment line
[profile]
kind = "table1"
case_id = "HC5"

[model]
dtau_s = 0.2   # trailing comment

[reference]
v_des_m_s = 0.1

[controller]
gain_mode = "per_step"
fbar_mode = "oracle_horizon"

[simulation]
duration_s = 15.0
e0_m = 0.02
seed = 3

[[disturbance]]
kind = "velocity_impulse"
time_s = 5.0
magnitude_m_s = 0.3

[[disturbance]]
kind = "sway_accel"
time_s = 1.0
end_s = 4.0
magnitude_m_s2 = 0.5
axis = "y"
omega_rad_s = 3.0
)";

TEST(Config, BuildsScenario) {
  const Scenario scn = scenario_from(parse(kPush));
  EXPECT_EQ(scn.profile.kind(), MotionProfile::Kind::Table1);
  EXPECT_EQ(scn.profile.table1_case(), Table1Case::HC5);
  EXPECT_EQ(scn.params.dtau, 0.2);
  EXPECT_EQ(scn.v_des, 0.1);
  EXPECT_EQ(scn.gain_mode.kind, GainModeKind::PerStep);
  EXPECT_EQ(scn.duration, 15.0);
  EXPECT_EQ(scn.e0(0), 0.02);
  EXPECT_EQ(scn.seed, 3u);
  ASSERT_EQ(scn.disturbances.size(), 2u);
  EXPECT_EQ(scn.disturbances[0].kind, DisturbanceKind::VelocityImpulse);
  EXPECT_EQ(scn.disturbances[0].magnitude, 0.3);
  EXPECT_EQ(scn.disturbances[1].kind, DisturbanceKind::SwayAccel);
  EXPECT_EQ(scn.disturbances[1].axis, Axis::Y);
  EXPECT_EQ(scn.disturbances[1].end_time, 4.0);
  EXPECT_NO_THROW(scn.validate());
}

TEST(Config, DefaultsWhenEmpty) {
  const Scenario scn = scenario_from(parse(""));
  const Scenario def;
  EXPECT_EQ(scn.profile.kind(), MotionProfile::Kind::Static);
  EXPECT_EQ(scn.params.z0, def.params.z0);
  EXPECT_EQ(scn.duration, def.duration);
  EXPECT_EQ(scn.gain_mode.kind, GainModeKind::PerTick);
}

TEST(Config, RejectsUnknownKeyAndSection) {
  try {
    scenario_from(parse("[model]\nz_zero = 0.3\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("z_zero"), std::string::npos);
  }
  EXPECT_THROW(scenario_from(parse("[modle]\nz0_m = 0.3\n")), ConfigError);
}

TEST(Config, RejectsMalformedText) {
  EXPECT_THROW(parse("[model\nz0_m = 0.3\n"), ConfigError);
  EXPECT_THROW(parse("[model]\nz0_m 0.3\n"), ConfigError);
  EXPECT_THROW(parse("[model]\nz0_m = 0.3\nz0_m = 0.4\n"), ConfigError);
  EXPECT_THROW(scenario_from(parse("[model]\nz0_m = abc\n")), ConfigError);
  EXPECT_THROW(scenario_from(parse("[model]\nz0_m = 0.3x\n")), ConfigError);
  EXPECT_THROW(scenario_from(parse("[profile]\nkind = \"wobbly\"\n")), ConfigError);
}

TEST(Config, OverrideQualifiedAndBare) {
  Document doc = parse(kPush);
  apply_override(doc, "model.z0_m=0.3");
  apply_override(doc, "duration_s=2.5");
  apply_override(doc, "mu=0.6");  // section not present yet
  const Scenario scn = scenario_from(doc);
  EXPECT_EQ(scn.params.z0, 0.3);
  EXPECT_EQ(scn.duration, 2.5);
  EXPECT_EQ(scn.params.mu, 0.6);
  // Bare keys skip the repeated disturbance tables.
  apply_override(doc, "kind=static");
  EXPECT_EQ(scenario_from(doc).profile.kind(), MotionProfile::Kind::Static);
}

TEST(Config, OverrideErrors) {
  Document doc = parse(kPush);
  EXPECT_THROW(apply_override(doc, "no_equals_sign"), ConfigError);
  try {
    apply_override(doc, "model.bogus=1");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(apply_override(doc, "bogus=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "disturbance.time_s=1"), ConfigError);
}

TEST(Config, GainModes) {
  EXPECT_EQ(parse_gain_mode("per_tick").kind, GainModeKind::PerTick);
  EXPECT_EQ(parse_gain_mode("per_step").kind, GainModeKind::PerStep);
  const auto fixed = parse_gain_mode("fixed:1.0,0.17");
  EXPECT_EQ(fixed.kind, GainModeKind::Fixed);
  EXPECT_EQ(fixed.fixed, Gain2d(1.0, 0.17));
  EXPECT_THROW(parse_gain_mode("fixed:1.0"), ConfigError);
  EXPECT_THROW(parse_gain_mode("adaptive"), ConfigError);
}

TEST(Config, MonteCarloSection) {
  const auto mc = monte_carlo_from(parse(
      "[montecarlo]\ntrials = 40\ne0_pos_m = 0.02\npush_count = 2\npush_max_m_s = 0.2\n"
      "fbar_noise_max_s2 = 4.0\n"));
  EXPECT_EQ(mc.trials, 40u);
  EXPECT_EQ(mc.randomization.e0_pos, 0.02);
  EXPECT_EQ(mc.randomization.push_count, 2u);
  EXPECT_EQ(mc.randomization.push_max, 0.2);
  EXPECT_EQ(mc.randomization.fbar_noise_max, 4.0);
  EXPECT_THROW(monte_carlo_from(parse("[montecarlo]\ntrials = -3\n")), ConfigError);
}

TEST(Config, SampledProfileResolvesAgainstFile) {
  const auto dir = std::filesystem::temp_directory_path() / "htlip_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "deck.csv");
    for (int i = 0; i <= 200; ++i) csv << i * 0.05 << ',' << 0.01 * (i % 2) * 0.0 << '\n';
    std::ofstream toml(dir / "s.toml");
    toml << "[profile]\nkind = \"sampled\"\nsample_file = \"deck.csv\"\n";
  }
  const Scenario scn = scenario_from(load(dir / "s.toml"));
  EXPECT_EQ(scn.profile.kind(), MotionProfile::Kind::Sampled);
  EXPECT_THROW(load(dir / "missing.toml"), ConfigError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace htlip::config
