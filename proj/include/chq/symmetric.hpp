#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chq/linalg.hpp"

namespace chq {

/// All elementary symmetric polynomials e[0..m] of lambda in one pass.
inline std::array<double, kMaxDim + 1> sigma_all(const RVec& lambda) {
  std::array<double, kMaxDim + 1> e{};
  e[0] = 1.0;
  const int m = static_cast<int>(lambda.size());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j >= 1; --j) e[j] += lambda(i) * e[j - 1];
  return e;
}

/// C(n, k) as a double; zero outside 0 <= k <= n.
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// sigma_k(lambda); zero for k < 0 or k > m.
inline double sigma(int k, const RVec& lambda) {
  if (k < 0 || k > lambda.size()) return 0.0;
  if (k == 0) return 1.0;
  return sigma_all(lambda)[k];
}

/// sigma_k with the excluded slots set to zero.
inline double sigma_partial(int k, const RVec& lambda, std::span<const int> excluded) {
  RVec x = lambda;
  for (int i : excluded) {
    if (i < 0 || i >= x.size()) fail(ErrorCode::InvalidArgument, "excluded index out of range");
    x(i) = 0.0;
  }
  return sigma(k, x);
}

inline double sigma_partial(int k, const RVec& lambda, std::initializer_list<int> excluded) {
  return sigma_partial(k, lambda, std::span<const int>(excluded.begin(), excluded.size()));
}

/// mu_i = (1/(m-1)) sum_{k != i} lambda_k.
inline RVec t_map(const RVec& lambda) {
  const Eigen::Index m = lambda.size();
  if (m < 2) fail(ErrorCode::DimensionTooSmall, "T-map needs m >= 2");
  const double s = lambda.sum();
  RVec mu(m);
  for (Eigen::Index i = 0; i < m; ++i) mu(i) = (s - lambda(i)) / static_cast<double>(m - 1);
  return mu;
}

/// lambda_j = sum_k mu_k - (m-1) mu_j.
inline RVec t_inverse(const RVec& mu) {
  const Eigen::Index m = mu.size();
  if (m < 2) fail(ErrorCode::DimensionTooSmall, "T-map needs m >= 2");
  const double s = mu.sum();
  RVec lambda(m);
  for (Eigen::Index j = 0; j < m; ++j) lambda(j) = s - static_cast<double>(m - 1) * mu(j);
  return lambda;
}

enum class ConeKind { GammaK, TPullback };

struct ConeSpec {
  int m = 1;
  ConeKind kind = ConeKind::GammaK;
  int k = 1;

  bool operator==(const ConeSpec&) const = default;
};

/// Strict membership, no tolerance.
inline bool gamma_contains(int k, const RVec& lambda) {
  const auto e = sigma_all(lambda);
  for (int j = 1; j <= k; ++j)
    if (!(e[j] > 0.0)) return false;
  return true;
}

inline bool cone_contains(const ConeSpec& c, const RVec& lambda) {
  if (lambda.size() != c.m) fail(ErrorCode::InvalidArgument, "lambda has wrong length");
  if (c.kind == ConeKind::GammaK) return gamma_contains(c.k, lambda);
  return gamma_contains(c.k, t_map(lambda));
}

enum class Family { LogSigma, QuotientSigma, LogQuotientT, Trace };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::LogSigma: return "LogSigma";
    case Family::QuotientSigma: return "QuotientSigma";
    case Family::LogQuotientT: return "LogQuotientT";
    case Family::Trace: return "Trace";
  }
  return "?";
}

/// One of the supported f families on its cone.
///   LogSigma(k)         log sigma_k                    on Gamma_k
///   QuotientSigma(k,l)  (sigma_k/sigma_l)^{1/(k-l)}    on Gamma_k
///   LogQuotientT(k,l)   log(sigma_k(T)/sigma_l(T))     on T^{-1}(Gamma_k)
///   Trace               sigma_1                        on Gamma_1
struct SymmetricFunctionSpec {
  int m = 1;
  Family family = Family::LogSigma;
  int k = 1;
  int l = 0;

  bool operator==(const SymmetricFunctionSpec&) const = default;

  static SymmetricFunctionSpec log_sigma(int m, int k) { return make(m, Family::LogSigma, k, 0); }
  static SymmetricFunctionSpec quotient_sigma(int m, int k, int l) { return make(m, Family::QuotientSigma, k, l); }
  static SymmetricFunctionSpec log_quotient_t(int m, int k, int l) { return make(m, Family::LogQuotientT, k, l); }
  static SymmetricFunctionSpec trace(int m) { return make(m, Family::Trace, 1, 0); }

  static SymmetricFunctionSpec make(int m, Family fam, int k, int l) {
    SymmetricFunctionSpec s{m, fam, k, l};
    s.validate();
    return s;
  }

  void validate() const {
    if (m < 1 || m > kMaxDim) fail(ErrorCode::InvalidArgument, "m must satisfy 1 <= m <= 4");
    switch (family) {
      case Family::LogSigma:
        if (k < 1 || k > m) fail(ErrorCode::InvalidArgument, "LogSigma needs 1 <= k <= m");
        break;
      case Family::QuotientSigma:
      case Family::LogQuotientT:
        if (!(0 <= l && l < k && k <= m))
          fail(ErrorCode::InvalidArgument, "quotient families need 0 <= l < k <= m");
        if (family == Family::LogQuotientT && m < 2)
          fail(ErrorCode::DimensionTooSmall, "LogQuotientT needs m >= 2");
        break;
      case Family::Trace:
        break;
    }
  }

  ConeSpec cone() const {
    switch (family) {
      case Family::LogSigma:
      case Family::QuotientSigma: return ConeSpec{m, ConeKind::GammaK, k};
      case Family::LogQuotientT: return ConeSpec{m, ConeKind::TPullback, k};
      case Family::Trace: return ConeSpec{m, ConeKind::GammaK, 1};
    }
    return {};
  }

  std::string name() const {
    switch (family) {
      case Family::LogSigma: return "LogSigma(" + std::to_string(k) + ")";
      case Family::QuotientSigma: return "QuotientSigma(" + std::to_string(k) + "," + std::to_string(l) + ")";
      case Family::LogQuotientT: return "LogQuotientT(" + std::to_string(k) + "," + std::to_string(l) + ")";
      case Family::Trace: return "Trace";
    }
    return "?";
  }
};

/// Value, gradient and Hessian of f at one point.
struct FJet {
  double value = 0.0;
  RVec grad;
  RMat hess;
};

namespace detail {

/// log(sigma_k/sigma_l) with gradient and Hessian; sigma_l == 1 when l == 0.
inline FJet log_quotient_jet(const RVec& x, int k, int l, bool with_hess) {
  const int m = static_cast<int>(x.size());
  FJet out{0.0, RVec::Zero(m), RMat()};
  if (with_hess) out.hess = RMat::Zero(m, m);
  auto add_log_sigma = [&](int kk, double sign) {
    if (kk == 0) return;
    const double sk = sigma(kk, x);
    out.value += sign * std::log(sk);
    RVec g(m);
    for (int i = 0; i < m; ++i) g(i) = sigma_partial(kk - 1, x, {i}) / sk;
    out.grad += sign * g;
    if (with_hess) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          const double s2 = (i == j) ? 0.0 : sigma_partial(kk - 2, x, {i, j}) / sk;
          out.hess(i, j) += sign * (s2 - g(i) * g(j));
        }
    }
  };
  add_log_sigma(k, 1.0);
  add_log_sigma(l, -1.0);
  return out;
}

inline RMat t_jacobian(int m) {
  RMat j(m, m);
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < m; ++c) j(i, c) = (i == c) ? 0.0 : 1.0 / (m - 1);
  return j;
}

}  // namespace detail

inline void require_in_cone(const SymmetricFunctionSpec& s, const RVec& lambda) {
  if (lambda.size() != s.m) fail(ErrorCode::InvalidArgument, "lambda has wrong length");
  if (!cone_contains(s.cone(), lambda)) fail(ErrorCode::OutsideCone, "lambda outside the cone of " + s.name());
}

/// Value, gradient and (optionally) Hessian in one call.
inline FJet f_jet(const SymmetricFunctionSpec& s, const RVec& lambda, bool with_hess = true) {
  require_in_cone(s, lambda);
  const int m = s.m;
  switch (s.family) {
    case Family::LogSigma: return detail::log_quotient_jet(lambda, s.k, 0, with_hess);
    case Family::QuotientSigma: {
      FJet g = detail::log_quotient_jet(lambda, s.k, s.l, with_hess);
      const double d = s.k - s.l;
      FJet out;
      out.value = std::exp(g.value / d);
      out.grad = out.value / d * g.grad;
      if (with_hess) out.hess = out.value * (g.grad * g.grad.transpose() / (d * d) + g.hess / d);
      return out;
    }
    case Family::LogQuotientT: {
      const RMat j = detail::t_jacobian(m);
      FJet g = detail::log_quotient_jet(t_map(lambda), s.k, s.l, with_hess);
      FJet out;
      out.value = g.value;
      out.grad = j.transpose() * g.grad;
      if (with_hess) out.hess = j.transpose() * g.hess * j;
      return out;
    }
    case Family::Trace: {
      FJet out{lambda.sum(), RVec::Ones(m), RMat()};
      if (with_hess) out.hess = RMat::Zero(m, m);
      return out;
    }
  }
  return {};
}

inline double f_eval(const SymmetricFunctionSpec& s, const RVec& lambda) {
  require_in_cone(s, lambda);
  switch (s.family) {
    case Family::LogSigma: return std::log(sigma(s.k, lambda));
    case Family::QuotientSigma:
      return std::pow(sigma(s.k, lambda) / sigma(s.l, lambda), 1.0 / (s.k - s.l));
    case Family::LogQuotientT: {
      const RVec mu = t_map(lambda);
      return std::log(sigma(s.k, mu) / sigma(s.l, mu));
    }
    case Family::Trace: return lambda.sum();
  }
  return 0.0;
}

inline RVec f_grad(const SymmetricFunctionSpec& s, const RVec& lambda) { return f_jet(s, lambda, false).grad; }
inline RMat f_hess(const SymmetricFunctionSpec& s, const RVec& lambda) { return f_jet(s, lambda, true).hess; }

/// Infimum of f over the cone (its boundary value): -inf for log families, 0 otherwise.
inline double boundary_value(const SymmetricFunctionSpec& s) {
  switch (s.family) {
    case Family::LogSigma:
    case Family::LogQuotientT: return -std::numeric_limits<double>::infinity();
    default: return 0.0;
  }
}

/// Whether lambda' (length m-1) lies in the projected cone Gamma_infinity.
inline bool gamma_infinity_contains(const SymmetricFunctionSpec& s, const RVec& lp) {
  if (lp.size() != s.m - 1) fail(ErrorCode::InvalidArgument, "lambda' must have length m-1");
  const ConeSpec c = s.cone();
  if (c.kind == ConeKind::GammaK) return c.k == 1 || gamma_contains(c.k - 1, lp);
  RVec x(s.m);
  x.head(s.m - 1) = lp;
  x(s.m - 1) = 1e8 * (1.0 + lp.norm());
  return cone_contains(c, x);
}

/// lim_{t -> inf} f(lambda', t), possibly +infinity.
inline double f_infinity(const SymmetricFunctionSpec& s, const RVec& lp) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (s.m < 2) fail(ErrorCode::DimensionTooSmall, "f_infinity needs m >= 2");
  if (!gamma_infinity_contains(s, lp)) fail(ErrorCode::OutsideGammaInfinity, "lambda' outside Gamma_infinity");
  switch (s.family) {
    case Family::LogSigma:
    case Family::Trace: return inf;
    case Family::QuotientSigma:
      if (s.l == 0) return inf;
      return std::pow(sigma(s.k - 1, lp) / sigma(s.l - 1, lp), 1.0 / (s.k - s.l));
    case Family::LogQuotientT: {
      auto at = [&](double t) {
        RVec x(s.m);
        x.head(s.m - 1) = lp;
        x(s.m - 1) = t;
        return f_eval(s, x);
      };
      const double v1 = at(1e6), v2 = at(1e8);
      if (std::abs(v1 - v2) <= 1e-4 * std::max(1.0, std::abs(v2))) return v2;
      return inf;
    }
  }
  return inf;
}

}  // namespace chq
