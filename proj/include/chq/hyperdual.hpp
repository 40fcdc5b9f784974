#pragma once

#include <cmath>
#include <vector>

#include "chq/error.hpp"

namespace chq {

/// Hyper-dual number a + b e1 + c e2 + d e1 e2 with e1^2 = e2^2 = 0.
/// Evaluating f at x + e1 u + e2 w gives f, f'u, f'w and u^T f'' w exactly.
struct HyperDual {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  HyperDual() = default;
  HyperDual(double v) : a(v) {}  // NOLINT(google-explicit-constructor)
  HyperDual(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  HyperDual& operator+=(const HyperDual& o) { return *this = *this + o; }
  HyperDual& operator-=(const HyperDual& o) { return *this = *this - o; }
  HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }
  HyperDual& operator/=(const HyperDual& o) { return *this = *this / o; }

  friend HyperDual operator+(const HyperDual& x, const HyperDual& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
  }
  friend HyperDual operator-(const HyperDual& x, const HyperDual& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
  friend HyperDual operator-(const HyperDual& x) { return {-x.a, -x.b, -x.c, -x.d}; }
  friend HyperDual operator*(const HyperDual& x, const HyperDual& y) {
    return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a, x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
  }
  friend HyperDual operator/(const HyperDual& x, const HyperDual& y) { return x * inverse(y); }

  friend bool operator<(const HyperDual& x, const HyperDual& y) { return x.a < y.a; }
  friend bool operator>(const HyperDual& x, const HyperDual& y) { return x.a > y.a; }

  /// Lift of a scalar function with value f0 and derivatives f1, f2 at a.
  static HyperDual lift(const HyperDual& x, double f0, double f1, double f2) {
    return {f0, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c};
  }

  friend HyperDual inverse(const HyperDual& x) {
    const double i = 1.0 / x.a;
    return lift(x, i, -i * i, 2.0 * i * i * i);
  }
  friend HyperDual exp(const HyperDual& x) {
    const double e = std::exp(x.a);
    return lift(x, e, e, e);
  }
  friend HyperDual log(const HyperDual& x) { return lift(x, std::log(x.a), 1.0 / x.a, -1.0 / (x.a * x.a)); }
  friend HyperDual sqrt(const HyperDual& x) {
    const double s = std::sqrt(x.a);
    return lift(x, s, 0.5 / s, -0.25 / (s * x.a));
  }
  friend HyperDual sin(const HyperDual& x) { return lift(x, std::sin(x.a), std::cos(x.a), -std::sin(x.a)); }
  friend HyperDual cos(const HyperDual& x) { return lift(x, std::cos(x.a), -std::sin(x.a), -std::cos(x.a)); }
  friend HyperDual pow(const HyperDual& x, double p) {
    if (p == 0.0) return HyperDual(1.0);
    if (p == 1.0) return x;
    if (p == 2.0) return x * x;
    const double v = std::pow(x.a, p);
    return lift(x, v, p * std::pow(x.a, p - 1.0), p * (p - 1.0) * std::pow(x.a, p - 2.0));
  }
};

inline double value_of(double x) { return x; }
inline double value_of(const HyperDual& x) { return x.a; }

/// Integer power by repeated multiplication, valid for any scalar type.
template <class T>
T ipow(const T& x, int n) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "ipow needs n >= 0");
  T r(1.0);
  for (int i = 0; i < n; ++i) r = r * x;
  return r;
}

/// Value, gradient and Hessian of a real function of n variables.
struct RealJet {
  double value = 0.0;
  std::vector<double> grad;
  std::vector<double> hess;  ///< row-major n x n
  double h(int i, int j) const { return hess[static_cast<std::size_t>(i) * grad.size() + j]; }
};

/// Exact second-order jet of f: R^n -> R, where f is callable on std::vector<HyperDual>.
template <class F>
RealJet real_jet(F&& f, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  RealJet out;
  out.grad.assign(n, 0.0);
  out.hess.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<HyperDual> hx(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = 0; k < n; ++k) hx[k] = HyperDual(x[k], k == i ? 1.0 : 0.0, k == j ? 1.0 : 0.0, 0.0);
      const HyperDual r = f(hx);
      out.value = r.a;
      out.grad[i] = r.b;
      out.grad[j] = r.c;
      out.hess[static_cast<std::size_t>(i) * n + j] = r.d;
      out.hess[static_cast<std::size_t>(j) * n + i] = r.d;
    }
  }
  if (n == 0) {
    out.value = value_of(f(hx));
  }
  return out;
}

}  // namespace chq
