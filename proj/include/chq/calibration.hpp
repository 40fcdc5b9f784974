#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "chq/symmetric.hpp"

namespace chq {

using Rng = std::mt19937_64;

/// Random point of the family's cone, with varied spread and scale.
inline RVec random_cone_point(const SymmetricFunctionSpec& s, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const ConeSpec c = s.cone();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double spread = 0.05 + 1.5 * unit(rng);
    const double scale = std::exp(2.0 * unit(rng) - 1.0);
    RVec x(s.m);
    for (int i = 0; i < s.m; ++i) x(i) = scale * (1.0 + spread * normal(rng));
    if (c.kind == ConeKind::TPullback) {
      if (!gamma_contains(c.k, x)) continue;
      x = t_inverse(x);
    }
    if (cone_contains(c, x)) return x;
  }
  fail(ErrorCode::InvalidArgument, "cone sampling failed");
}

namespace detail {

/// Smallest s in [lo, hi] with pred(s), assuming pred is monotone and pred(hi) holds.
inline double bisect_first(const std::function<bool(double)>& pred, double lo, double hi, int iters = 200) {
  for (int it = 0; it < iters && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline bool at_level_or_above(const SymmetricFunctionSpec& s, const RVec& x, double level) {
  return cone_contains(s.cone(), x) && f_eval(s, x) >= level;
}

}  // namespace detail

/// Point t*dir on the level set f = level, for dir inside the cone.
inline RVec level_point_on_ray(const SymmetricFunctionSpec& s, const RVec& dir, double level) {
  auto pred = [&](double logt) { return detail::at_level_or_above(s, std::exp(logt) * dir, level); };
  double lo = -1.0, hi = 1.0;
  while (pred(lo) && lo > -700.0) lo *= 2.0;
  while (!pred(hi)) {
    hi *= 2.0;
    if (hi > 700.0) fail(ErrorCode::LevelOutOfRange, "level not reached along ray");
  }
  return std::exp(detail::bisect_first(pred, lo, hi)) * dir;
}

/// Point b + s*1 on the level set f = level, for b in the closed cone.
inline RVec level_point_shift(const SymmetricFunctionSpec& s, const RVec& b, double level) {
  auto pred = [&](double t) { return detail::at_level_or_above(s, b + RVec::Constant(s.m, t), level); };
  double hi = 1e-3;
  while (!pred(hi)) {
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorCode::LevelOutOfRange, "level not reached along shift");
  }
  return b + RVec::Constant(s.m, detail::bisect_first(pred, 0.0, hi));
}

/// Random point on the boundary of the cone: the exit point of 1 + s*d for a random
/// direction d, rescaled. Returns false when the ray never leaves the cone.
inline bool random_cone_boundary_point(const SymmetricFunctionSpec& s, Rng& rng, double radius, RVec& out) {
  std::normal_distribution<double> normal;
  RVec d(s.m);
  for (int i = 0; i < s.m; ++i) d(i) = normal(rng);
  d.normalize();
  const RVec one = RVec::Ones(s.m);
  auto outside = [&](double t) { return !cone_contains(s.cone(), one + t * d); };
  double hi = 1.0;
  while (!outside(hi)) {
    hi *= 2.0;
    if (hi > 1e6) return false;
  }
  const RVec p = one + detail::bisect_first(outside, 0.0, hi) * d;
  out = radius * p / p.norm();
  return true;
}

struct DichotomyReport {
  double kappa = 0.0;        ///< min over samples of the per-sample best branch constant
  int samples = 0;
  int branch_gradient = 0;   ///< samples where sum f_j (mu_j - lambda_j) attains the max
  int branch_min = 0;        ///< samples where min_i f_i attains the max
  double containment_radius = 0.0;  ///< largest |point| seen on (mu - 2 delta 1 + Gamma_m) ∩ level set
};

/// Empirical dichotomy constant for lambda on the level set f = level with |lambda| > R.
inline DichotomyReport dichotomy_probe(const SymmetricFunctionSpec& s, double level, const RVec& mu, double delta,
                                        double radius, int samples, std::uint64_t seed = 0) {
  if (samples <= 0) fail(ErrorCode::InvalidArgument, "samples must be positive");
  if (mu.size() != s.m) fail(ErrorCode::InvalidArgument, "mu has wrong length");
  if (!(delta > 0.0) || !(radius > 0.0)) fail(ErrorCode::InvalidArgument, "delta and R must be positive");
  if (!(level > boundary_value(s))) fail(ErrorCode::LevelOutOfRange, "level not above the boundary value");
  Rng rng(seed);
  DichotomyReport rep;
  rep.samples = samples;

  // Containment of (mu - 2 delta 1 + Gamma_m) ∩ {f = level} in the ball of radius R.
  const RVec base = mu - RVec::Constant(s.m, 2.0 * delta);
  auto in_superlevel = [&](const RVec& x) { return detail::at_level_or_above(s, x, level); };
  std::vector<RVec> dirs;
  std::exponential_distribution<double> expo;
  for (int i = 0; i < s.m; ++i) {
    RVec d = RVec::Constant(s.m, 1e-3);
    d(i) = 1.0;
    dirs.push_back(d.normalized());
  }
  dirs.push_back(RVec::Ones(s.m).normalized());
  for (int n = 0; n < samples; ++n) {
    RVec d(s.m);
    for (int i = 0; i < s.m; ++i) d(i) = expo(rng);
    dirs.push_back(d.normalized());
  }
  for (const RVec& d : dirs) {
    if (in_superlevel(base)) continue;
    const double cap = 2.0 * radius + base.norm();
    if (!in_superlevel(base + cap * d))
      fail(ErrorCode::HypothesisUnverifiable, "level set not reached inside 2R along a Gamma_m ray");
    const double t = detail::bisect_first([&](double x) { return in_superlevel(base + x * d); }, 0.0, cap);
    const double r = (base + t * d).norm();
    rep.containment_radius = std::max(rep.containment_radius, r);
    if (r > radius) fail(ErrorCode::HypothesisUnverifiable, "containment in the R-ball fails");
  }

  // Far portion of the level set.
  std::uniform_real_distribution<double> unit;
  double kappa = std::numeric_limits<double>::infinity();
  int used = 0;
  for (int attempt = 0; used < samples && attempt < 50 * samples; ++attempt) {
    RVec b;
    if (!random_cone_boundary_point(s, rng, radius * (1.0 + 9.0 * unit(rng)), b)) continue;
    const RVec lam = level_point_shift(s, b, level);
    if (lam.norm() <= radius) continue;
    const FJet jet = f_jet(s, lam, false);
    const double total = jet.grad.sum();
    const double k1 = jet.grad.dot(mu - lam) / total;
    const double k2 = jet.grad.minCoeff() / total;
    (k1 >= k2 ? rep.branch_gradient : rep.branch_min)++;
    kappa = std::min(kappa, std::max(k1, k2));
    ++used;
  }
  if (used == 0) fail(ErrorCode::HypothesisUnverifiable, "no level-set samples with |lambda| > R");
  rep.samples = used;
  rep.kappa = kappa;
  return rep;
}

struct ConeCalibration {
  double sigma = 0.0;
  double N = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  bool kappa_verified = false;  ///< false when the containment hypothesis could not be verified
  int samples = 0;
  DichotomyReport probe;
};

/// Sample-based calibration constants of the level set f = sigma_level.
inline ConeCalibration cone_calibrate(const SymmetricFunctionSpec& s, double sigma_level, int samples, double delta,
                                      double radius, std::uint64_t seed = 0,
                                      const std::optional<RVec>& mu = std::nullopt) {
  if (samples <= 0) fail(ErrorCode::InvalidArgument, "samples must be positive");
  if (!std::isfinite(sigma_level) || !(sigma_level > boundary_value(s)))
    fail(ErrorCode::LevelOutOfRange, "level must lie strictly between the boundary value and sup f");
  Rng rng(seed);
  ConeCalibration cal;
  cal.sigma = sigma_level;
  cal.samples = samples;

  // N: every boundary-proximal sample shifted by N*1 lands strictly above the level.
  std::vector<RVec> proximal;
  std::uniform_real_distribution<double> unit;
  proximal.push_back(RVec::Zero(s.m));
  while (static_cast<int>(proximal.size()) < samples) {
    RVec b;
    if (random_cone_boundary_point(s, rng, 10.0 * unit(rng), b)) proximal.push_back(b);
  }
  auto shift_ok = [&](double n) {
    for (const RVec& b : proximal) {
      const RVec x = b + RVec::Constant(s.m, n);
      if (!cone_contains(s.cone(), x) || !(f_eval(s, x) > sigma_level)) return false;
    }
    return true;
  };
  double hi = 1e-3;
  while (!shift_ok(hi)) {
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorCode::LevelOutOfRange, "no finite shift found");
  }
  double lo = hi > 1e-3 ? hi / 2.0 : 0.0;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (shift_ok(mid) ? hi : lo) = mid;
  }
  cal.N = hi;

  // tau: min of sum f_k over level-set points along random rays.
  cal.tau = std::numeric_limits<double>::infinity();
  for (int n = 0; n < samples; ++n) {
    const RVec dir = random_cone_point(s, rng);
    const RVec lam = level_point_on_ray(s, dir / dir.norm(), sigma_level);
    cal.tau = std::min(cal.tau, f_grad(s, lam).sum());
  }

  const RVec mu0 = mu ? *mu : level_point_on_ray(s, RVec::Ones(s.m), sigma_level);
  try {
    cal.probe = dichotomy_probe(s, sigma_level, mu0, delta, radius, samples, seed + 1);
    cal.kappa = std::max(0.0, cal.probe.kappa);
    cal.kappa_verified = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HypothesisUnverifiable) throw;
    cal.kappa = 0.0;
    cal.kappa_verified = false;
  }
  return cal;
}

}  // namespace chq
