#pragma once

#include <Eigen/Householder>
#include <Eigen/QR>
#include <cctype>
#include <string>
#include <vector>

#include "chq/catalog.hpp"
#include "chq/hermitian.hpp"
#include "chq/hyperdual.hpp"

namespace chq {

/// c * prod_a x_a^{e_a} over the real axes (x_1, y_1, ..., x_m, y_m).
struct Monomial {
  double coef = 0.0;
  std::vector<int> exps;
  bool operator==(const Monomial&) const = default;
};

enum class DefiningKind { Ball, Polydisc, HalfSpace, Polynomial };

/// Built-in defining functions rho; the domain is {rho < 0}.
struct DefiningFunction {
  DefiningKind kind = DefiningKind::Ball;
  int m = 2;
  double radius = 1.0;            ///< ball and polydisc
  int power = 4;                  ///< polydisc: sum |z_i|^{2p} - r^{2p}
  std::vector<Monomial> terms;    ///< polynomial
  bool operator==(const DefiningFunction&) const = default;

  static DefiningFunction ball(int m, double r = 1.0) { return {DefiningKind::Ball, m, r, 4, {}}; }
  static DefiningFunction polydisc(int m, int p = 4, double r = 1.0) { return {DefiningKind::Polydisc, m, r, p, {}}; }
  static DefiningFunction half_space(int m) { return {DefiningKind::HalfSpace, m, 1.0, 4, {}}; }
  static DefiningFunction polynomial(int m, std::vector<Monomial> t) {
    return {DefiningKind::Polynomial, m, 1.0, 4, std::move(t)};
  }

  void validate() const {
    if (m < 1 || m > kMaxDim) fail(ErrorCode::ValidationError, "defining function needs 1 <= m <= 4");
    if (kind == DefiningKind::Ball || kind == DefiningKind::Polydisc)
      if (!(radius > 0.0)) fail(ErrorCode::ValidationError, "radius must be positive");
    if (kind == DefiningKind::Polydisc && power < 1) fail(ErrorCode::ValidationError, "polydisc power must be >= 1");
    if (kind == DefiningKind::Polynomial) {
      if (terms.empty()) fail(ErrorCode::ValidationError, "polynomial has no terms");
      for (const auto& t : terms)
        if (static_cast<int>(t.exps.size()) != 2 * m) fail(ErrorCode::ValidationError, "monomial has wrong arity");
    }
  }

  template <class T>
  T operator()(const std::vector<T>& x) const {
    switch (kind) {
      case DefiningKind::Ball: {
        T s(-radius * radius);
        for (int a = 0; a < 2 * m; ++a) s = s + x[a] * x[a];
        return s;
      }
      case DefiningKind::Polydisc: {
        T s(-std::pow(radius, 2.0 * power));
        for (int i = 0; i < m; ++i) s = s + ipow(x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1], power);
        return s;
      }
      case DefiningKind::HalfSpace: return x[2 * (m - 1)];
      case DefiningKind::Polynomial: {
        T s(0.0);
        for (const auto& t : terms) {
          T p(t.coef);
          for (int a = 0; a < 2 * m; ++a) p = p * ipow(x[a], t.exps[a]);
          s = s + p;
        }
        return s;
      }
    }
    return T(0.0);
  }
};

namespace detail {

inline std::string axis_name(int a) { return std::string(a % 2 == 0 ? "x" : "y") + std::to_string(a / 2 + 1); }

}  // namespace detail

/// Parse a real polynomial such as "x1^2 + y1^2 + 0.5*x1*x2 - 1" in the axes x1..x4, y1..y4.
inline std::vector<Monomial> parse_polynomial(const std::string& text, int m) {
  std::vector<Monomial> out;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto error = [&](const std::string& what) {
    fail(ErrorCode::ParseError, what + " at offset " + std::to_string(i) + " in '" + text + "'");
  };
  skip();
  bool first = true;
  while (i < text.size()) {
    double sign = 1.0;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1.0 : 1.0;
      ++i;
      skip();
    } else if (!first) {
      error("expected '+' or '-'");
    }
    first = false;
    Monomial mono{sign, std::vector<int>(2 * m, 0)};
    for (;;) {
      skip();
      if (i >= text.size()) error("expected a factor");
      const char c = text[i];
      if (c == 'x' || c == 'y') {
        const std::size_t start = i++;
        int idx = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) idx = idx * 10 + (text[i++] - '0');
        if (idx < 1 || idx > m) {
          i = start;
          error("unknown variable");
        }
        int e = 1;
        skip();
        if (i < text.size() && text[i] == '^') {
          ++i;
          skip();
          const std::size_t s = i;
          e = 0;
          while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) e = e * 10 + (text[i++] - '0');
          if (i == s) error("expected an integer exponent");
        }
        mono.exps[2 * (idx - 1) + (c == 'y' ? 1 : 0)] += e;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::size_t s = i;
        while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' || text[i] == 'e' ||
                                   text[i] == 'E' ||
                                   ((text[i] == '+' || text[i] == '-') && (text[i - 1] == 'e' || text[i - 1] == 'E'))))
          ++i;
        mono.coef *= detail::parse_double(text.substr(s, i - s));
      } else {
        error("unexpected character");
      }
      skip();
      if (i < text.size() && text[i] == '*') {
        ++i;
        continue;
      }
      break;
    }
    out.push_back(std::move(mono));
    skip();
  }
  if (out.empty()) fail(ErrorCode::ParseError, "empty polynomial");
  return out;
}

inline std::string to_string(const std::vector<Monomial>& poly) {
  std::string out;
  for (std::size_t t = 0; t < poly.size(); ++t) {
    const double c = poly[t].coef;
    if (t) out += c < 0 ? " - " : " + ";
    else if (c < 0) out += "-";
    out += detail::format_double(std::abs(c));
    for (std::size_t a = 0; a < poly[t].exps.size(); ++a) {
      const int e = poly[t].exps[a];
      if (e == 0) continue;
      out += "*" + detail::axis_name(static_cast<int>(a));
      if (e > 1) out += "^" + std::to_string(e);
    }
  }
  return out;
}

/// Jet of a defining function at a boundary point.
struct DefiningFunctionSample {
  CVec z;
  double value = 0.0;
  Eigen::VectorXd real_grad;  ///< (d/dx_1, d/dy_1, ...)
  CVec dz;                    ///< rho_{z_i}
  CMat ddbar;                 ///< rho_{z_i zbar_j}
};

namespace detail {

inline std::vector<double> real_coords(const CVec& z) {
  std::vector<double> x(2 * z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    x[2 * i] = z(i).real();
    x[2 * i + 1] = z(i).imag();
  }
  return x;
}

template <class F>
DefiningFunctionSample jet_of(const F& rho, const CVec& z) {
  const int m = static_cast<int>(z.size());
  const RealJet j = real_jet([&](const std::vector<HyperDual>& v) { return rho(v); }, real_coords(z));
  const NodeJet w = wirtinger_from_real([&](int a) { return j.grad[a]; }, [&](int a, int b) { return j.h(a, b); }, m);
  DefiningFunctionSample s;
  s.z = z;
  s.value = j.value;
  s.real_grad = Eigen::Map<const Eigen::VectorXd>(j.grad.data(), 2 * m);
  s.dz = w.du;
  s.ddbar = w.ddbar;
  return s;
}

}  // namespace detail

/// Sample rho (callable on std::vector<HyperDual>) at z, which must lie on {rho = 0}.
template <class F>
DefiningFunctionSample sample_defining_function(const F& rho, const CVec& z) {
  if (z.size() < 1 || z.size() > kMaxDim) fail(ErrorCode::InvalidArgument, "point must have 1..4 coordinates");
  DefiningFunctionSample s = detail::jet_of(rho, z);
  if (!(std::abs(s.value) < 1e-10)) fail(ErrorCode::InvalidArgument, "point is not on the boundary: |rho| >= 1e-10");
  if (!(s.real_grad.norm() > 1e-8)) fail(ErrorCode::DegenerateGradient, "gradient of rho vanishes");
  return s;
}

inline DefiningFunctionSample sample_defining_function(const DefiningFunction& rho, const CVec& z) {
  rho.validate();
  if (z.size() != rho.m) fail(ErrorCode::InvalidArgument, "point dimension differs from defining function");
  return sample_defining_function([&](const std::vector<HyperDual>& x) { return rho(x); }, z);
}

/// Newton steps along the gradient until |rho| < tol.
template <class F>
CVec project_to_boundary(const F& rho, CVec z, double tol = 1e-13, int max_iter = 100) {
  for (int it = 0; it < max_iter; ++it) {
    const DefiningFunctionSample s = detail::jet_of(rho, z);
    if (std::abs(s.value) < tol) return z;
    const double g2 = s.real_grad.squaredNorm();
    if (!(g2 > 1e-16)) fail(ErrorCode::DegenerateGradient, "gradient of rho vanishes during projection");
    for (Eigen::Index i = 0; i < z.size(); ++i)
      z(i) -= s.value / g2 * cplx(s.real_grad(2 * i), s.real_grad(2 * i + 1));
  }
  fail(ErrorCode::InvalidArgument, "projection onto the boundary did not converge");
}

inline CVec project_to_boundary(const DefiningFunction& rho, const CVec& z) {
  rho.validate();
  return project_to_boundary([&](const std::vector<HyperDual>& x) { return rho(x); }, z);
}

/// Orthonormal columns spanning {xi : sum_i rho_{z_i} xi_i = 0}.
inline CMat holomorphic_tangent(const DefiningFunctionSample& s) {
  const Eigen::Index m = s.dz.size();
  const double n = s.dz.norm();
  if (!(n > 1e-8) || !(s.real_grad.norm() > 1e-8)) fail(ErrorCode::DegenerateGradient, "gradient of rho vanishes");
  Eigen::MatrixXcd v(m, 1);
  v.col(0) = s.dz.conjugate() / n;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(v);
  const Eigen::MatrixXcd q = qr.householderQ();
  return q.rightCols(m - 1);
}

enum class LeviClass { StrictlyPseudoconvex, WeaklyPseudoconvex, Pseudoconcave, Indefinite };

inline std::string to_string(LeviClass c) {
  switch (c) {
    case LeviClass::StrictlyPseudoconvex: return "strictly_pseudoconvex";
    case LeviClass::WeaklyPseudoconvex: return "weakly_pseudoconvex";
    case LeviClass::Pseudoconcave: return "pseudoconcave";
    case LeviClass::Indefinite: return "indefinite";
  }
  return "unknown";
}

struct LeviReport {
  CMat matrix;          ///< (m-1) x (m-1) in the tangent basis
  RVec eigenvalues;     ///< ascending
  CMat tangent;         ///< m x (m-1) basis used
  double grad_norm = 0.0;
  LeviClass classification = LeviClass::WeaklyPseudoconvex;
  bool weakly_pseudoconvex = false;  ///< all eigenvalues >= -tol
  bool pseudoconcave = false;        ///< all eigenvalues <= tol
};

/// Levi form rho_{i jbar} xi^i conj(xi^j) / |d rho| on the holomorphic tangent space,
/// with |d rho| the Euclidean norm of the real gradient.
inline LeviReport levi_form(const DefiningFunctionSample& s, double tol = 1e-10) {
  LeviReport r;
  r.tangent = holomorphic_tangent(s);
  r.grad_norm = s.real_grad.norm();
  const Eigen::Index k = r.tangent.cols();
  const Eigen::MatrixXcd h = s.ddbar;
  const Eigen::MatrixXcd l = r.tangent.transpose() * h * r.tangent.conjugate() / r.grad_norm;
  r.matrix = CMat(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) r.matrix(a, b) = 0.5 * (l(a, b) + std::conj(l(b, a)));
  r.eigenvalues = k > 0 ? hermitian_eigen(r.matrix).values : RVec(0);
  const double lo = k > 0 ? r.eigenvalues.minCoeff() : 0.0;
  const double hi = k > 0 ? r.eigenvalues.maxCoeff() : 0.0;
  r.weakly_pseudoconvex = lo >= -tol;
  r.pseudoconcave = hi <= tol;
  if (k > 0 && lo > tol) r.classification = LeviClass::StrictlyPseudoconvex;
  else if (r.weakly_pseudoconvex) r.classification = LeviClass::WeaklyPseudoconvex;
  else if (r.pseudoconcave) r.classification = LeviClass::Pseudoconcave;
  else r.classification = LeviClass::Indefinite;
  return r;
}

/// Derivatives at 0 of v restricted to {r = 0}, parameterized by the first n-1 real axes.
struct TangentialJet {
  Eigen::VectorXd first;
  Eigen::MatrixXd second;
};

/// Inputs are real jets at the origin of R^n; r must satisfy r(0) = 0, r_n = -1, r_i = 0 (i < n).
inline TangentialJet tangential_second_derivative(const Eigen::VectorXd& v_grad, const Eigen::MatrixXd& v_hess,
                                                  double r_value, const Eigen::VectorXd& r_grad,
                                                  const Eigen::MatrixXd& r_hess, double tol = 1e-12) {
  const Eigen::Index n = v_grad.size();
  if (n < 2) fail(ErrorCode::DimensionTooSmall, "need at least two real variables");
  if (r_grad.size() != n || v_hess.rows() != n || v_hess.cols() != n || r_hess.rows() != n || r_hess.cols() != n)
    fail(ErrorCode::InvalidArgument, "jet sizes disagree");
  if (std::abs(r_value) > tol) fail(ErrorCode::NormalizationViolated, "r(0) must vanish");
  if (std::abs(r_grad(n - 1) + 1.0) > tol) fail(ErrorCode::NormalizationViolated, "r_n(0) must equal -1");
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (std::abs(r_grad(i)) > tol) fail(ErrorCode::NormalizationViolated, "tangential gradient of r must vanish");
  const double vn = v_grad(n - 1);
  TangentialJet out;
  out.first = v_grad.head(n - 1) + vn * r_grad.head(n - 1);
  out.second = v_hess.topLeftCorner(n - 1, n - 1) + vn * r_hess.topLeftCorner(n - 1, n - 1);
  return out;
}

}  // namespace chq
