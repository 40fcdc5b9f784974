#include <gtest/gtest.h>

#include "chq/calibration.hpp"
#include "chq/symmetric.hpp"
#include "oracles.hpp"
#include "sampling.hpp"

using namespace chq;

namespace {

RVec vec(std::initializer_list<double> v) {
  RVec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

std::vector<SymmetricFunctionSpec> families(int m) {
  std::vector<SymmetricFunctionSpec> out;
  for (int k = 1; k <= m; ++k) out.push_back(SymmetricFunctionSpec::log_sigma(m, k));
  for (int k = 1; k <= m; ++k)
    for (int l = 0; l < k; ++l) out.push_back(SymmetricFunctionSpec::quotient_sigma(m, k, l));
  if (m >= 2)
    for (int k = 1; k <= m; ++k)
      for (int l = 0; l < k; ++l) out.push_back(SymmetricFunctionSpec::log_quotient_t(m, k, l));
  return out;
}

}  // namespace

TEST(Sigma, Examples) {
  EXPECT_DOUBLE_EQ(sigma(2, vec({1, 2, 3})), 11.0);
  EXPECT_DOUBLE_EQ(sigma(3, vec({1, 1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(sigma(0, vec({4, -2})), 1.0);
  EXPECT_DOUBLE_EQ(sigma(-1, vec({4, -2})), 0.0);
}

TEST(Sigma, MatchesSubsetEnumeration) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 500; ++rep) {
    const int m = 1 + rep % 4;
    RVec x(m);
    std::vector<double> xs(m);
    for (int i = 0; i < m; ++i) xs[i] = x(i) = n(rng);
    for (int k = 0; k <= m; ++k) ASSERT_NEAR(sigma(k, x), oracle::sigma_bruteforce(k, xs), 1e-12);
  }
}

TEST(SigmaPartial, Examples) {
  EXPECT_DOUBLE_EQ(sigma_partial(1, vec({1, 2, 3}), {0}), 5.0);
  EXPECT_DOUBLE_EQ(sigma_partial(2, vec({1, 2, 3}), {0, 1}), 0.0);
}

TEST(SigmaPartial, IsTheDerivativeOfSigma) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  const double eps = 1e-6;
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 2 + rep % 3;
    RVec x(m);
    for (int i = 0; i < m; ++i) x(i) = n(rng);
    for (int k = 1; k <= m; ++k)
      for (int i = 0; i < m; ++i) {
        auto f = [&](double e) {
          RVec y = x;
          y(i) += e;
          return sigma(k, y);
        };
        const double fd = oracle::diff1(f, eps);
        ASSERT_LT(oracle::rel_err(fd, sigma_partial(k - 1, x, {i})), 1e-8);
      }
  }
}

TEST(Cone, Examples) {
  const ConeSpec g2{3, ConeKind::GammaK, 2}, g3{3, ConeKind::GammaK, 3};
  EXPECT_TRUE(cone_contains(g3, vec({1, 1, 1})));
  EXPECT_TRUE(cone_contains(g2, vec({-1, 3, 3})));
  EXPECT_FALSE(cone_contains(g3, vec({-1, 3, 3})));
  EXPECT_FALSE(cone_contains(g2, vec({-1, -1, 5})));
}

TEST(Cone, NestedBetweenPositiveOrthantAndHalfSpace) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int m = 1; m <= 4; ++m)
    for (int k = 1; k <= m; ++k)
      for (auto kind : {ConeKind::GammaK, ConeKind::TPullback}) {
        if (kind == ConeKind::TPullback && m < 2) continue;
        const ConeSpec c{m, kind, k};
        for (int rep = 0; rep < 300; ++rep) {
          RVec x(m);
          for (int i = 0; i < m; ++i) x(i) = n(rng);
          RVec pos = x.cwiseAbs() + RVec::Constant(m, 1e-3);
          ASSERT_TRUE(cone_contains(c, pos));
          if (cone_contains(c, x)) ASSERT_GT(x.sum(), 0.0);
        }
      }
}

TEST(TMap, Examples) {
  const RVec mu = t_map(vec({1, 2, 3}));
  EXPECT_DOUBLE_EQ(mu(0), 2.5);
  EXPECT_DOUBLE_EQ(mu(1), 2.0);
  EXPECT_DOUBLE_EQ(mu(2), 1.5);
  const RVec one = t_map(vec({1, 1, 1}));
  EXPECT_DOUBLE_EQ(one(0), 1.0);
  EXPECT_THROW(t_map(vec({1})), Error);
}

TEST(TMap, Roundtrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int rep = 0; rep < 10000; ++rep) {
    const int m = 2 + rep % 3;
    RVec x(m);
    for (int i = 0; i < m; ++i) x(i) = n(rng);
    worst = std::max(worst, (t_inverse(t_map(x)) - x).cwiseAbs().maxCoeff());
    worst = std::max(worst, (t_map(t_inverse(x)) - x).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(FamilyValues, Examples) {
  const RVec g = f_grad(SymmetricFunctionSpec::log_sigma(3, 3), vec({1, 2, 4}));
  EXPECT_NEAR(g(0), 1.0, 1e-15);
  EXPECT_NEAR(g(1), 0.5, 1e-15);
  EXPECT_NEAR(g(2), 0.25, 1e-15);
  EXPECT_NEAR(f_eval(SymmetricFunctionSpec::quotient_sigma(3, 3, 1), vec({1, 1, 1})), std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(f_eval(SymmetricFunctionSpec::log_quotient_t(3, 2, 1), vec({1, 1, 1})), 0.0, 1e-15);
}

TEST(FamilyValues, SpecValidation) {
  EXPECT_THROW(SymmetricFunctionSpec::quotient_sigma(3, 2, 2), Error);
  EXPECT_THROW(SymmetricFunctionSpec::quotient_sigma(3, 4, 1), Error);
  EXPECT_THROW(SymmetricFunctionSpec::log_sigma(2, 0), Error);
  EXPECT_THROW(SymmetricFunctionSpec::log_quotient_t(1, 1, 0), Error);
}

TEST(FamilyValues, OutsideConeThrows) {
  try {
    f_eval(SymmetricFunctionSpec::log_sigma(3, 3), vec({-1, 3, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideCone);
  }
}

TEST(FamilyDerivatives, MatchFiniteDifferences) {
  Rng rng(6);
  for (int m = 1; m <= 3; ++m)
    for (const auto& s : families(m))
      for (int rep = 0; rep < 60; ++rep) {
        const RVec x = testing_support::interior_point(s, rng);
        const FJet jet = f_jet(s, x);
        const double eps = 1e-5 * (1.0 + x.norm());
        for (int i = 0; i < m; ++i) {
          auto fi = [&](double e) {
            RVec y = x;
            y(i) += e;
            return f_eval(s, y);
          };
          ASSERT_LT(oracle::rel_err(oracle::diff1(fi, eps), jet.grad(i), 1e-3), 1e-6) << s.name();
          auto gi = [&](double e) {
            RVec y = x;
            y(i) += e;
            return f_grad(s, y);
          };
          for (int j = 0; j < m; ++j) {
            const double fd = (gi(eps)(j) - gi(-eps)(j)) / (2.0 * eps);
            ASSERT_LT(oracle::rel_err(fd, jet.hess(i, j), 1e-3), 1e-5) << s.name();
          }
        }
      }
}

TEST(FamilyProperties, MonotoneConcaveSymmetricAndEuler) {
  Rng rng(7);
  std::uniform_real_distribution<double> u;
  for (int m = 2; m <= 3; ++m)
    for (const auto& s : families(m))
      for (int rep = 0; rep < 200; ++rep) {
        const RVec x = random_cone_point(s, rng);
        const RVec y = random_cone_point(s, rng);
        const FJet jx = f_jet(s, x, false);
        ASSERT_GT(jx.grad.minCoeff(), 0.0) << s.name();
        ASSERT_GE(jx.grad.dot(x), -1e-12) << s.name();
        const double mid = f_eval(s, 0.5 * (x + y));
        ASSERT_GE(mid, 0.5 * (f_eval(s, x) + f_eval(s, y)) - 1e-12) << s.name();
        RVec p = x.reverse();
        ASSERT_NEAR(f_eval(s, p), jx.value, 1e-12 * std::max(1.0, std::abs(jx.value)));
        RVec sorted = x;
        std::sort(sorted.data(), sorted.data() + m);
        const RVec g = f_grad(s, sorted);
        for (int i = 0; i + 1 < m; ++i) ASSERT_GE(g(i), g(i + 1) - 1e-12) << s.name();
      }
}

TEST(FamilyProperties, TildeRelation) {
  Rng rng(8);
  for (int m = 2; m <= 4; ++m)
    for (int k = 1; k <= m; ++k)
      for (int l = 0; l < k; ++l) {
        const auto s = SymmetricFunctionSpec::log_quotient_t(m, k, l);
        for (int rep = 0; rep < 50; ++rep) {
          const RVec x = random_cone_point(s, rng);
          const RVec mu = t_map(x);
          // gradient of log(sigma_k/sigma_l) at mu by direct difference of sigma_partial
          RVec ft(m);
          for (int i = 0; i < m; ++i)
            ft(i) = sigma_partial(k - 1, mu, {i}) / sigma(k, mu) - (l > 0 ? sigma_partial(l - 1, mu, {i}) / sigma(l, mu) : 0.0);
          const RVec g = f_grad(s, x);
          for (int kk = 0; kk < m; ++kk) {
            const double expect = (ft.sum() - ft(kk)) / (m - 1);
            ASSERT_NEAR(g(kk), expect, 1e-10 * std::max(1.0, std::abs(expect)));
          }
        }
      }
}

TEST(FamilyProperties, ReciprocalIdentity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int m = 2; m <= 4; ++m)
    for (int l = 0; l < m; ++l) {
      const auto s = SymmetricFunctionSpec::quotient_sigma(m, m, l);
      for (int rep = 0; rep < 100; ++rep) {
        RVec x(m), mu(m);
        for (int i = 0; i < m; ++i) {
          x(i) = u(rng);
          mu(i) = 1.0 / x(i);
        }
        const FJet j = f_jet(s, x, false);
        for (int i = 0; i < m; ++i) {
          const double rhs = std::pow(j.value, m - l + 1) * mu(i) * mu(i) * sigma_partial(m - l - 1, mu, {i}) / (m - l);
          ASSERT_NEAR(j.grad(i), rhs, 1e-8 * std::max(1.0, std::abs(rhs)));
        }
      }
    }
}

TEST(FamilyProperties, BoundaryBehaviour) {
  // Points approaching the boundary of Gamma_k: (eps, 1, ..., 1) with eps -> 0 for k = m,
  // and a scaled boundary point plus tiny shift otherwise.
  for (int m = 2; m <= 3; ++m)
    for (int k = 1; k <= m; ++k) {
      Rng rng(10 + m * 10 + k);
      const auto ls = SymmetricFunctionSpec::log_sigma(m, k);
      for (int rep = 0; rep < 20; ++rep) {
        RVec b;
        if (!random_cone_boundary_point(ls, rng, 1.0, b)) continue;
        const RVec x = b + RVec::Constant(m, 1e-12);
        if (!cone_contains(ls.cone(), x)) continue;
        EXPECT_LT(f_eval(ls, x), -10.0);
        for (int l = 0; l < k; ++l) {
          const auto qs = SymmetricFunctionSpec::quotient_sigma(m, k, l);
          EXPECT_LT(f_eval(qs, x), 1e-3);
        }
      }
    }
}

TEST(FInfinity, Examples) {
  const auto q31 = SymmetricFunctionSpec::quotient_sigma(3, 3, 1);
  EXPECT_NEAR(f_infinity(q31, vec({1, 1})), 1.0, 1e-15);
  // large-t evaluation oracle
  EXPECT_NEAR(f_eval(q31, vec({1, 1, 1e8})), 1.0, 1e-7);
  const auto l2 = SymmetricFunctionSpec::log_sigma(2, 2);
  EXPECT_TRUE(std::isinf(f_infinity(l2, vec({1}))));
  EXPECT_NEAR(f_eval(SymmetricFunctionSpec::log_sigma(3, 2), vec({1, 1, 1e8})) -
                  f_eval(SymmetricFunctionSpec::log_sigma(3, 2), vec({1, 1, 1e6})),
              std::log(100.0), 1e-5);
  EXPECT_TRUE(std::isinf(f_infinity(SymmetricFunctionSpec::quotient_sigma(2, 2, 0), vec({0.3}))));
}

TEST(FInfinity, QuotientMatchesLargeT) {
  Rng rng(11);
  for (int m = 2; m <= 4; ++m)
    for (int k = 2; k <= m; ++k)
      for (int l = 1; l < k; ++l) {
        const auto s = SymmetricFunctionSpec::quotient_sigma(m, k, l);
        for (int rep = 0; rep < 20; ++rep) {
          const RVec x = random_cone_point(s, rng);
          RVec lp = x.head(m - 1);
          if (!gamma_infinity_contains(s, lp)) continue;
          RVec big(m);
          big.head(m - 1) = lp;
          big(m - 1) = 1e9;
          EXPECT_NEAR(f_infinity(s, lp), f_eval(s, big), 1e-6 * std::max(1.0, f_eval(s, big)));
        }
      }
}

TEST(FInfinity, LogQuotientTFiniteOnlyForTopPair) {
  const auto top = SymmetricFunctionSpec::log_quotient_t(3, 3, 2);
  const double v = f_infinity(top, vec({1.0, 2.0}));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, std::log(3.0 / 2.0), 1e-6);
  EXPECT_TRUE(std::isinf(f_infinity(SymmetricFunctionSpec::log_quotient_t(3, 2, 1), vec({1.0, 2.0}))));
}

TEST(FInfinity, OutsideGammaInfinityThrows) {
  try {
    f_infinity(SymmetricFunctionSpec::quotient_sigma(3, 3, 1), vec({-1.0, -1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideGammaInfinity);
  }
}
