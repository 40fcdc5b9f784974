#include <gtest/gtest.h>

#include "chq/calibration.hpp"

using namespace chq;

TEST(ConeCalibrate, LogSigmaTauIsNearDimension) {
  for (int m = 2; m <= 3; ++m) {
    const auto s = SymmetricFunctionSpec::log_sigma(m, m);
    const auto cal = cone_calibrate(s, 0.0, 2000, 0.1, 10.0, 1);
    EXPECT_GT(cal.N, 0.0);
    EXPECT_GE(cal.tau, m * (1.0 - 1e-9));  // AM-GM lower bound
    EXPECT_LT(cal.tau, 1.05 * m);
    EXPECT_GE(cal.kappa, 0.0);
  }
}

TEST(ConeCalibrate, ShiftReachesLevel) {
  const auto s = SymmetricFunctionSpec::log_sigma(3, 3);
  const auto cal = cone_calibrate(s, 0.0, 500, 0.1, 10.0, 2);
  // f(N*1) = 3 log N must exceed the level
  EXPECT_GT(f_eval(s, RVec::Constant(3, cal.N)), 0.0);
  EXPECT_LE(f_eval(s, RVec::Constant(3, cal.N - 2e-3)), 1e-2);
}

TEST(ConeCalibrate, QuotientPositiveTau) {
  const auto s = SymmetricFunctionSpec::quotient_sigma(3, 3, 1);
  const auto cal = cone_calibrate(s, 0.5, 500, 0.1, 10.0, 3);
  EXPECT_GT(cal.tau, 0.0);
  EXPECT_GT(cal.N, 0.0);
  EXPECT_GE(cal.kappa, 0.0);
}

TEST(ConeCalibrate, LevelOutOfRange) {
  const auto s = SymmetricFunctionSpec::quotient_sigma(3, 3, 1);
  try {
    cone_calibrate(s, -0.5, 100, 0.1, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LevelOutOfRange);
  }
}

TEST(DichotomyProbe, LogSigmaPositiveKappa) {
  const auto s = SymmetricFunctionSpec::log_sigma(3, 3);
  const auto rep = dichotomy_probe(s, 0.0, RVec::Ones(3), 0.1, 10.0, 1000, 4);
  EXPECT_GT(rep.kappa, 0.0);
  EXPECT_EQ(rep.branch_gradient + rep.branch_min, rep.samples);
  EXPECT_LE(rep.containment_radius, 10.0);
}

TEST(DichotomyProbe, DeeperMuGivesLargerKappa) {
  const auto s = SymmetricFunctionSpec::log_sigma(3, 3);
  const auto near = dichotomy_probe(s, 0.0, RVec::Ones(3), 0.1, 10.0, 500, 5);
  const auto deep = dichotomy_probe(s, 0.0, RVec::Constant(3, 3.0), 0.1, 10.0, 500, 5);
  EXPECT_GT(deep.kappa, near.kappa);
}

TEST(DichotomyProbe, ZeroSamplesIsAnError) {
  const auto s = SymmetricFunctionSpec::log_sigma(3, 3);
  EXPECT_THROW(dichotomy_probe(s, 0.0, RVec::Ones(3), 0.1, 10.0, 0), Error);
}

TEST(DichotomyProbe, ContainmentFailureIsReported) {
  // f_infinity of QuotientSigma(3,1) at (0.5, 0.5) is 0.5 < 0.9: the set is unbounded
  const auto s = SymmetricFunctionSpec::quotient_sigma(3, 3, 1);
  try {
    dichotomy_probe(s, 0.9, RVec::Constant(3, 0.7), 0.1, 10.0, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HypothesisUnverifiable);
  }
}
