#include "htlip/dynamics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace htlip {
namespace {

TEST(Stiffness, Examples) {
  ModelParams p;
  EXPECT_NEAR(stiffness(p, 0.0), 39.24, 1e-12);
  EXPECT_NEAR(stiffness(p, 3.5), 53.24, 1e-12);
  EXPECT_NEAR(stiffness(p, -9.81), 0.0, 1e-12);
}

TEST(ModelParams, Validation) {
  ModelParams p;
  EXPECT_NO_THROW(p.validate());
  p.z0 = 0.0;
  EXPECT_THROW(p.validate(), ModelError);
  p = {};
  p.u_min = p.u_max;
  EXPECT_THROW(p.validate(), ModelError);
  p = {};
  p.dtau = 2.0;
  EXPECT_THROW(p.validate(), ModelError);
}

TEST(IntegratePhase, OriginIsAnEquilibrium) {
  const auto hc1 = MotionProfile::table1(Table1Case::HC1);
  const State2d x = integrate_phase(State2d::Zero().eval(), hc1, ModelParams{}, 1.0, 1.3);
  EXPECT_EQ(x, State2d::Zero());
}

TEST(IntegratePhase, ConstantStiffnessMatchesClosedForm) {
  const double w = std::sqrt(39.24);
  const State2d x = integrate_phase(State2d(0.01, 0.0), MotionProfile::static_surface(),
                                    ModelParams{}, 0.0, 0.3);
  EXPECT_NEAR(x(0), 0.01 * std::cosh(w * 0.3), 1e-8 * 0.01 * std::cosh(w * 0.3));
  EXPECT_NEAR(x(1), 0.01 * w * std::sinh(w * 0.3), 1e-8 * 0.01 * w * std::sinh(w * 0.3));
}

TEST(IntegratePhase, ForwardThenBackwardReturns) {
  const auto hc2 = MotionProfile::table1(Table1Case::HC2);
  const State2d x0(0.02, -0.1);
  const State2d x1 = integrate_phase(x0, hc2, ModelParams{}, 2.0, 2.3);
  const State2d back = integrate_phase(x1, hc2, ModelParams{}, 2.3, 2.0);
  EXPECT_LT((back - x0).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(IntegratePhase, NonFiniteStateThrows) {
  auto f = [](double) { return std::nan(""); };
  EXPECT_THROW((propagate<double, 1>(State2d(1.0, 0.0), f, 0.0, 0.1, 1e-3)), ModelError);
}

TEST(ResetMap, Examples) {
  const State2d x = reset_map(State2d(0.10, 0.20), 0.15);
  EXPECT_NEAR(x(0), -0.05, 1e-15);
  EXPECT_EQ(x(1), 0.20);
  EXPECT_EQ(reset_map(State2d(0.3, -0.7), 0.0), State2d(0.3, -0.7));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const State2d pre(u(rng), u(rng));
    EXPECT_EQ(reset_map(pre, u(rng))(1), pre(1));
  }
}

TEST(StmSupremum, ZeroDurationIsIdentity) {
  EXPECT_EQ(stm_supremum(39.24, 0.0), Transition2d::Identity());
}

TEST(StmSupremum, NominalEntries) {
  const Transition2d phi = stm_supremum(39.24, 0.3);
  EXPECT_NEAR(phase_xi(39.24, 0.3), 1.8793, 5e-5);
  EXPECT_NEAR(phi(0, 0), 3.351, 5e-4);
  EXPECT_NEAR(phi(0, 1), 0.5105, 5e-5);
  EXPECT_NEAR(phi(1, 0), 20.03, 5e-3);
  EXPECT_NEAR(phi(1, 1), 3.351, 5e-4);
  EXPECT_TRUE(phi.isApprox(oracle::cosh_sinh_stm(39.24, 0.3), 1e-15));
  EXPECT_NEAR(phi.determinant(), 1.0, 1e-12);
}

TEST(StmSupremum, RejectsNonPositiveStiffness) {
  EXPECT_THROW(stm_supremum(0.0, 0.3), ModelError);
  EXPECT_THROW(stm_supremum(39.24, -0.1), ModelError);
}

TEST(StmNumeric, EqualTimesGiveIdentity) {
  EXPECT_EQ(stm_numeric(MotionProfile::table1(Table1Case::HC1), 1.0, 1.0, 1e-3, 0.25, 9.81),
            Transition2d::Identity());
}

TEST(StmNumeric, StaticSurfaceMatchesSupremumModel) {
  const Transition2d phi = stm_numeric(MotionProfile::static_surface(), 0.0, 0.3, 1e-3, 0.25, 9.81);
  const Transition2d ref = oracle::cosh_sinh_stm(39.24, 0.3);
  EXPECT_LT((phi - ref).cwiseAbs().maxCoeff(), 1e-8 * ref.cwiseAbs().maxCoeff());
}

TEST(StmNumeric, UnitDeterminant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dur(0.1, 0.5);
  for (int i = 0; i < 50; ++i) {
    const auto f = oracle::RandomStiffness::draw(rng);
    const Transition2d phi = stm_numeric(f, 0.0, dur(rng), 1e-3);
    EXPECT_LT(std::abs(phi.determinant() - 1.0), 1e-6);
  }
}

// Domination by the supremum model when f stays positive and below fbar.
TEST(StmNumeric, DominatedBySupremumModel) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dur(0.1, 0.5), start(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const auto f = oracle::RandomStiffness::draw(rng);
    const double t0 = start(rng), t1 = t0 + dur(rng);
    const Transition2d phi = stm_numeric(f, t0, t1, 1e-3);
    const Transition2d bar = oracle::cosh_sinh_stm(f.supremum(t0, t1), t1 - t0);
    EXPECT_TRUE((phi.array() >= 0.0).all());
    EXPECT_TRUE((phi.array() <= bar.array() + 1e-8).all()) << phi << "\n" << bar;
  }
}

TEST(StmNumeric, LastStepLandsOnEndTime) {
  // 0.3 is not a multiple of 0.007; the result must still match the closed form.
  const Transition2d phi = stm_numeric([](double) { return 39.24; }, 0.0, 0.3, 0.007);
  EXPECT_LT((phi - oracle::cosh_sinh_stm(39.24, 0.3)).cwiseAbs().maxCoeff(), 1e-5);
}

}  // namespace
}  // namespace htlip
