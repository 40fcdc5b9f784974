#pragma once

#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "chq/calibration.hpp"
#include "chq/field.hpp"
#include "chq/hermitian.hpp"
#include "chq/matrix_calculus.hpp"

namespace chq {

/// One row of the identity suite.
struct VerifyCheck {
  std::string name;
  long samples = 0;
  long failures = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass() const { return failures == 0; }
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int samples = 1000;  ///< per family (derivative and cone checks) or total (matrix checks)
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass()) return false;
    return true;
  }
};

namespace detail {

inline CMat random_gaussian_matrix(int m, Rng& rng) {
  std::normal_distribution<double> nd;
  CMat a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  return a;
}

inline CMat random_hermitian(int m, Rng& rng) { return hermitian_part(random_gaussian_matrix(m, rng)); }

inline CMat random_unitary(int m, Rng& rng) {
  const Eigen::HouseholderQR<CMat> qr(random_gaussian_matrix(m, rng));
  return qr.householderQ() * CMat::Identity(m, m);
}

inline CMat random_metric_matrix(int m, Rng& rng) {
  const CMat b = random_gaussian_matrix(m, rng);
  return hermitian_part(b * b.adjoint() + 0.5 * static_cast<double>(m) * CMat::Identity(m, m));
}

/// Matrix whose spectrum relative to g is lambda, in a random frame.
inline CMat with_relative_spectrum(const RVec& lambda, const Metric& g, Rng& rng) {
  const CMat u = random_unitary(static_cast<int>(lambda.size()), rng);
  const CMat d = u * lambda.cast<cplx>().asDiagonal() * u.adjoint();
  return hermitian_part(g.factor() * d * g.factor().adjoint());
}

/// Unit Hermitian direction in an orthonormal frame of g.
inline CMat frame_direction(const Metric& g, Rng& rng) {
  const CMat b = random_hermitian(g.dim(), rng);
  return hermitian_part(g.factor() * b * g.factor().adjoint() / b.norm());
}

/// Fourth-order central differences.
inline double diff1(const std::function<double(double)>& f, double h) {
  return (8.0 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12.0 * h);
}

inline double diff2_mixed(const std::function<double(double, double)>& f, double h) {
  auto inner = [&](double y) { return diff1([&](double x) { return f(x, y); }, h); };
  return diff1(inner, h);
}

/// Largest s with lambda - s 1 in the closed cone.
inline double diagonal_distance(const SymmetricFunctionSpec& s, const RVec& lambda) {
  double lo = 0.0, hi = lambda.cwiseAbs().maxCoeff() + 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cone_contains(s.cone(), RVec(lambda - RVec::Constant(s.m, mid))) ? lo : hi) = mid;
  }
  return lo;
}

inline RVec interior_cone_point(const SymmetricFunctionSpec& s, Rng& rng) {
  for (;;) {
    const RVec x = random_cone_point(s, rng);
    if (cone_contains(s.cone(), RVec(x - RVec::Constant(s.m, 0.02 * x.norm())))) return x;
  }
}

inline std::vector<SymmetricFunctionSpec> verify_families(int m) {
  std::vector<SymmetricFunctionSpec> out;
  for (int k = 1; k <= m; ++k) out.push_back(SymmetricFunctionSpec::log_sigma(m, k));
  for (int k = 1; k <= m; ++k)
    for (int l = 0; l < k; ++l) out.push_back(SymmetricFunctionSpec::quotient_sigma(m, k, l));
  for (int k = 1; k <= m; ++k)
    for (int l = 0; l < k; ++l) out.push_back(SymmetricFunctionSpec::log_quotient_t(m, k, l));
  return out;
}

inline double relative(double a, double b, double floor) { return std::abs(a - b) / std::max(floor, std::abs(b)); }

class CheckAccumulator {
 public:
  CheckAccumulator(std::string name, double tol) { c_.name = std::move(name), c_.tolerance = tol; }
  void add(double err) {
    ++c_.samples;
    if (!(err <= c_.tolerance)) ++c_.failures;
    if (!std::isfinite(err) || err > c_.max_error) c_.max_error = std::isfinite(err) ? err : INFINITY;
  }
  void add_bool(bool ok) {
    ++c_.samples;
    if (!ok) ++c_.failures;
  }
  VerifyCheck done() const { return c_; }

 private:
  VerifyCheck c_;
};

}  // namespace detail

inline constexpr double kStep = 0.01;

/// Matrix derivative formulas against central differences along random Hermitian directions.
inline VerifyCheck verify_first_derivative(const VerifyOptions& o) {
  detail::CheckAccumulator acc("first_derivative_fd", 1e-6);
  Rng rng(o.seed + 101);
  for (int m = 2; m <= 3; ++m)
    for (const auto& s : detail::verify_families(m))
      for (int rep = 0; rep < o.samples; ++rep) {
        const Metric g(detail::random_metric_matrix(m, rng));
        const RVec lam = detail::interior_cone_point(s, rng);
        const CMat a = detail::with_relative_spectrum(lam, g, rng);
        const CMat e = detail::frame_direction(g, rng);
        const double eps = kStep * detail::diagonal_distance(s, lam);
        auto f = [&](double t) { return f_eval(s, eigen_rel(CMat(a + t * e), g).lambda); };
        const double fd = detail::diff1(f, eps);
        const double an = f_first_matrix(s, a, g).first.cwiseProduct(e).sum().real();
        acc.add(detail::relative(fd, an, 1e-2));
      }
  return acc.done();
}

inline VerifyCheck verify_second_derivative(const VerifyOptions& o) {
  detail::CheckAccumulator acc("second_derivative_fd", 1e-5);
  Rng rng(o.seed + 102);
  for (int m = 2; m <= 3; ++m)
    for (const auto& s : detail::verify_families(m))
      for (int rep = 0; rep < o.samples; ++rep) {
        const Metric g(detail::random_metric_matrix(m, rng));
        const RVec lam = detail::interior_cone_point(s, rng);
        const CMat a = detail::with_relative_spectrum(lam, g, rng);
        const CMat b1 = detail::frame_direction(g, rng), b2 = detail::frame_direction(g, rng);
        const double eps = kStep * detail::diagonal_distance(s, lam);
        auto f = [&](double x, double y) { return f_eval(s, eigen_rel(CMat(a + x * b1 + y * b2), g).lambda); };
        const double fd = detail::diff2_mixed(f, eps);
        const double an = f_second_tensor(s, a, g).second->contract(b1, b2).real();
        acc.add(detail::relative(fd, an, 1e-1));
      }
  return acc.done();
}

inline VerifyCheck verify_trace_identities(const VerifyOptions& o) {
  detail::CheckAccumulator acc("trace_identities", 1e-9);
  Rng rng(o.seed + 103);
  for (int rep = 0; rep < 10 * o.samples; ++rep) {
    const int m = 1 + rep % 3;
    const auto s = m == 1 ? SymmetricFunctionSpec::log_sigma(1, 1) : SymmetricFunctionSpec::quotient_sigma(m, m, 1);
    const Metric g(detail::random_metric_matrix(m, rng));
    const CMat a = detail::with_relative_spectrum(random_cone_point(s, rng), g, rng);
    const auto r = trace_identities(s, a, g);
    acc.add(std::max(r.rel1(), r.rel2()));
  }
  return acc.done();
}

inline VerifyCheck verify_commuting_trace(const VerifyOptions& o) {
  detail::CheckAccumulator acc("commuting_trace", 0.0);
  Rng rng(o.seed + 104);
  std::uniform_real_distribution<double> fpos(0.1, 3.0);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10 * o.samples; ++rep) {
    const CMat u = detail::random_unitary(3, rng);
    RVec f(3), lam(3);
    for (int i = 0; i < 3; ++i) f(i) = fpos(rng), lam(i) = nd(rng);
    const CMat fm = hermitian_part(u * f.cast<cplx>().asDiagonal() * u.adjoint());
    const CMat am = hermitian_part(u * lam.cast<cplx>().asDiagonal() * u.adjoint());
    acc.add_bool(commuting_trace_check(fm, am).pass);
  }
  return acc.done();
}

inline VerifyCheck verify_interlacing(const VerifyOptions& o) {
  detail::CheckAccumulator acc("interlacing", 0.0);
  Rng rng(o.seed + 105);
  for (int rep = 0; rep < 10 * o.samples; ++rep) acc.add_bool(interlace_check(detail::random_hermitian(3, rng)).ok);
  return acc.done();
}

inline std::vector<VerifyCheck> verify_roundtrips(const VerifyOptions& o) {
  detail::CheckAccumulator tmap("t_map_roundtrip", 1e-12), wz("w_z_roundtrip", 1e-12),
      pt("p_omega_t_compatibility", 1e-10);
  Rng rng(o.seed + 106);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10 * o.samples; ++rep) {
    const int m = 2 + rep % 3;
    RVec x(m);
    for (int i = 0; i < m; ++i) x(i) = nd(rng);
    const double sx = std::max(1.0, x.cwiseAbs().maxCoeff());
    tmap.add(std::max((t_inverse(t_map(x)) - x).cwiseAbs().maxCoeff(), (t_map(t_inverse(x)) - x).cwiseAbs().maxCoeff()) /
             sx);
    const Metric g(detail::random_metric_matrix(m, rng));
    WTensor w;
    for (int p = 0; p < m; ++p) w.w.push_back(detail::random_gaussian_matrix(m, rng));
    const WTensor back = z_to_w(w_to_z(w, g), g);
    double err = 0.0, scale = 1.0;
    for (int p = 0; p < m; ++p) {
      err = std::max(err, max_abs(back.w[p] - w.w[p]));
      scale = std::max(scale, max_abs(w.w[p]));
    }
    wz.add(err / scale);
    const CMat theta = detail::random_hermitian(m, rng);
    const RVec lam = eigen_rel(theta, g).lambda;
    RVec mu = t_map(lam);
    std::sort(mu.data(), mu.data() + m);
    const RVec pl = eigen_rel(hermitian_part(p_omega(theta, g)), g).lambda;
    pt.add((pl - mu).cwiseAbs().maxCoeff() / std::max(1.0, lam.cwiseAbs().maxCoeff()));
  }
  return {tmap.done(), wz.done(), pt.done()};
}

/// Structural properties of every family on sampled cone points.
inline std::vector<VerifyCheck> verify_cone_properties(const VerifyOptions& o) {
  detail::CheckAccumulator mono("gradient_positive", 0.0), conc("midpoint_concavity", 1e-12),
      euler("euler_lower_bound", 1e-12), sorted("gradient_sorting", 1e-12), tilde("tilde_relation", 1e-10),
      recip("reciprocal_identity", 1e-8);
  Rng rng(o.seed + 107);
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  for (int m = 2; m <= 3; ++m)
    for (const auto& s : detail::verify_families(m))
      for (int rep = 0; rep < o.samples; ++rep) {
        const RVec x = random_cone_point(s, rng), y = random_cone_point(s, rng);
        const FJet jx = f_jet(s, x, false);
        mono.add_bool(jx.grad.minCoeff() > 0.0);
        euler.add(std::max(0.0, -jx.grad.dot(x)));
        const double lo = 0.5 * (jx.value + f_eval(s, y)), mid = f_eval(s, RVec(0.5 * (x + y)));
        conc.add(std::max(0.0, lo - mid) / std::max(1.0, std::abs(lo)));
        RVec xs = x;
        std::sort(xs.data(), xs.data() + m);
        const RVec gs = f_grad(s, xs);
        double viol = 0.0;
        for (int i = 0; i + 1 < m; ++i) viol = std::max(viol, gs(i + 1) - gs(i));
        sorted.add(viol / std::max(1.0, gs.cwiseAbs().maxCoeff()));
        if (s.family == Family::LogQuotientT) {
          const RVec mu = t_map(x);
          RVec ft(m);
          for (int i = 0; i < m; ++i)
            ft(i) = sigma_partial(s.k - 1, mu, {i}) / sigma(s.k, mu) -
                    (s.l > 0 ? sigma_partial(s.l - 1, mu, {i}) / sigma(s.l, mu) : 0.0);
          double err = 0.0;
          for (int i = 0; i < m; ++i) {
            const double expect = (ft.sum() - ft(i)) / (m - 1);
            err = std::max(err, std::abs(jx.grad(i) - expect) / std::max(1.0, std::abs(expect)));
          }
          tilde.add(err);
        }
        if (s.family == Family::QuotientSigma && s.k == m) {
          RVec p(m), inv(m);
          for (int i = 0; i < m; ++i) p(i) = pos(rng), inv(i) = 1.0 / p(i);
          const FJet jp = f_jet(s, p, false);
          double err = 0.0;
          for (int i = 0; i < m; ++i) {
            const double rhs =
                std::pow(jp.value, m - s.l + 1) * inv(i) * inv(i) * sigma_partial(m - s.l - 1, inv, {i}) / (m - s.l);
            err = std::max(err, std::abs(jp.grad(i) - rhs) / std::max(1.0, std::abs(rhs)));
          }
          recip.add(err);
        }
      }
  return {mono.done(), conc.done(), euler.done(), sorted.done(), tilde.done(), recip.done()};
}

inline VerifyReport run_identity_suite(const VerifyOptions& o) {
  VerifyReport r;
  r.checks.push_back(verify_first_derivative(o));
  r.checks.push_back(verify_second_derivative(o));
  r.checks.push_back(verify_trace_identities(o));
  r.checks.push_back(verify_commuting_trace(o));
  r.checks.push_back(verify_interlacing(o));
  for (auto& c : verify_roundtrips(o)) r.checks.push_back(std::move(c));
  for (auto& c : verify_cone_properties(o)) r.checks.push_back(std::move(c));
  return r;
}

inline void print_table(std::ostream& os, const VerifyReport& r) {
  os << std::left << std::setw(26) << "check" << std::right << std::setw(9) << "samples" << std::setw(9) << "failed"
     << std::setw(13) << "max_error" << std::setw(11) << "tolerance" << "  result\n";
  for (const auto& c : r.checks) {
    os << std::left << std::setw(26) << c.name << std::right << std::setw(9) << c.samples << std::setw(9) << c.failures
       << std::setw(13) << std::setprecision(3) << std::scientific << c.max_error << std::setw(11) << c.tolerance
       << std::defaultfloat << "  " << (c.pass() ? "PASS" : "FAIL") << '\n';
  }
}

}  // namespace chq
