#pragma once

#include <array>
#include <numeric>
#include <vector>

#include "chq/linalg.hpp"

namespace chq {

namespace detail {

/// Cyclic complex Jacobi. On return `b` is diagonal (up to roundoff) and
/// b_in = v * diag(b) * v^*.
inline void jacobi_sweeps(CMat& b, CMat& v) {
  const Eigen::Index m = b.rows();
  v = CMat::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) b(i, i) = b(i, i).real();
  if (m == 1) return;
  double fro2 = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) fro2 += std::norm(b(i, j));
  if (fro2 == 0.0) return;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < m; ++p)
      for (Eigen::Index q = p + 1; q < m; ++q) off += std::norm(b(p, q));
    if (off <= 1e-34 * fro2) break;
    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double mag = std::abs(b(p, q));
        if (mag == 0.0) continue;
        const cplx phase = b(p, q) / mag;  // e^{i phi}
        const double a = b(p, p).real(), d = b(q, q).real();
        const double tau = (d - a) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx em = std::conj(phase);  // e^{-i phi}
        // columns: U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
        for (Eigen::Index r = 0; r < m; ++r) {
          const cplx bp = b(r, p), bq = b(r, q);
          b(r, p) = c * bp - s * em * bq;
          b(r, q) = s * bp + c * em * bq;
          const cplx vp = v(r, p), vq = v(r, q);
          v(r, p) = c * vp - s * em * vq;
          v(r, q) = s * vp + c * em * vq;
        }
        for (Eigen::Index r = 0; r < m; ++r) {
          const cplx bp = b(p, r), bq = b(q, r);
          b(p, r) = c * bp - s * phase * bq;
          b(q, r) = s * bp + c * phase * bq;
        }
        b(p, q) = 0.0;
        b(q, p) = 0.0;
        b(p, p) = b(p, p).real();
        b(q, q) = b(q, q).real();
      }
    }
  }
}

}  // namespace detail

/// Ascending eigenvalues and unitary eigenvectors (columns) of a Hermitian matrix.
struct HermitianEigen {
  RVec values;
  CMat vectors;
};

inline HermitianEigen hermitian_eigen(const CMat& a) {
  require_hermitian(a, "A");
  CMat b = hermitian_part(a);
  CMat v;
  detail::jacobi_sweeps(b, v);
  const Eigen::Index m = a.rows();
  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + m, 0);
  std::stable_sort(order.begin(), order.begin() + m,
                   [&](int i, int j) { return b(i, i).real() < b(j, j).real(); });
  HermitianEigen out{RVec(m), CMat(m, m)};
  for (Eigen::Index k = 0; k < m; ++k) {
    out.values(k) = b(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// Positive-definite Hermitian metric g with a cached factorization g = L L^*.
class Metric {
 public:
  Metric() = default;

  explicit Metric(const CMat& g) : g_(g) {
    require_hermitian(g, "metric");
    const auto eig = hermitian_eigen(g);
    if (eig.values(0) < 1e-12) fail(ErrorCode::SingularMetric, "metric eigenvalue below 1e-12");
    const Eigen::Index m = g.rows();
    identity_ = (g - CMat::Identity(m, m)).cwiseAbs().maxCoeff() == 0.0;
    RVec sq = eig.values.cwiseSqrt();
    l_ = eig.vectors * sq.cast<cplx>().asDiagonal();
    l_inv_ = sq.cwiseInverse().cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    g_inv_ = l_inv_.adjoint() * l_inv_;
  }

  static Metric identity(int m) { return Metric(CMat::Identity(m, m)); }

  int dim() const { return static_cast<int>(g_.rows()); }
  bool is_identity() const { return identity_; }
  const CMat& matrix() const { return g_; }
  /// Any factor with L L^* = g.
  const CMat& factor() const { return l_; }
  const CMat& factor_inverse() const { return l_inv_; }
  /// Inverse matrix G^{-1}; g^{j-bar i} = G^{-1}(j, i).
  const CMat& inverse() const { return g_inv_; }

  /// tr_g(theta) = sum g^{j-bar i} theta_{i j-bar}.
  double trace(const CMat& theta) const {
    if (identity_) return trace_real(theta);
    return (g_inv_ * theta).trace().real();
  }

 private:
  CMat g_, l_, l_inv_, g_inv_;
  bool identity_ = false;
};

/// Relative spectrum of A with respect to g.
///   lambda : ascending eigenvalues
///   xi     : frame, row p is the eigenvector xi_p, so xi A xi^* = diag(lambda), xi g xi^* = I
///   zeta   : inverse frame xi^{-1}; A = zeta diag(lambda) zeta^*
struct EigenPair {
  RVec lambda;
  CMat xi;
  CMat zeta;
};

inline EigenPair eigen_rel(const CMat& a, const Metric& g) {
  require_hermitian(a, "A");
  if (a.rows() != g.dim()) fail(ErrorCode::InvalidArgument, "dimension mismatch between A and g");
  if (g.is_identity()) {
    auto e = hermitian_eigen(a);
    return EigenPair{e.values, e.vectors.adjoint(), e.vectors};
  }
  const CMat b = g.factor_inverse() * a * g.factor_inverse().adjoint();
  auto e = hermitian_eigen(hermitian_part(b));
  return EigenPair{e.values, e.vectors.adjoint() * g.factor_inverse(), g.factor() * e.vectors};
}

inline EigenPair eigen_rel(const CMat& a, const CMat& g) { return eigen_rel(a, Metric(g)); }

inline RVec eigenvalues(const CMat& a) { return hermitian_eigen(a).values; }

struct InterlaceReport {
  bool ok = true;
  int witness = -1;  ///< first violated index, or -1
  RVec lambda;       ///< spectrum of A
  RVec lambda_minor; ///< spectrum of A with last row/column deleted
};

/// lambda_j(A) <= lambda_j(A') <= lambda_{j+1}(A) for the trailing deletion A'.
inline InterlaceReport interlace_check(const CMat& a, double tol = 1e-12) {
  require_hermitian(a, "A");
  const Eigen::Index m = a.rows();
  if (m < 2) fail(ErrorCode::DimensionTooSmall, "interlacing needs m >= 2");
  InterlaceReport r;
  r.lambda = eigenvalues(a);
  r.lambda_minor = eigenvalues(a.topLeftCorner(m - 1, m - 1));
  const double slack = tol * std::max(1.0, max_abs(a));
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    if (r.lambda(j) > r.lambda_minor(j) + slack || r.lambda_minor(j) > r.lambda(j + 1) + slack) {
      r.ok = false;
      r.witness = static_cast<int>(j);
      break;
    }
  }
  return r;
}

struct CornerGrowthReport {
  double t = 0.0;
  RVec lambda;        ///< spectrum of A_t
  RVec lambda_minor;  ///< spectrum of A'
  RVec deviation;     ///< lambda_j(A_t) - lambda_j(A'), j < m
  double top_ratio = 0.0;  ///< lambda_m(A_t) / t
};

/// Plants t in the last diagonal slot and compares the spectrum with the minor.
inline CornerGrowthReport corner_growth_check(const CMat& a, double t) {
  require_hermitian(a, "A");
  const Eigen::Index m = a.rows();
  if (m < 2) fail(ErrorCode::DimensionTooSmall, "needs m >= 2");
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorCode::InvalidArgument, "t must be positive and finite");
  CMat at = a;
  at(m - 1, m - 1) = t;
  CornerGrowthReport r;
  r.t = t;
  r.lambda = eigenvalues(at);
  r.lambda_minor = eigenvalues(a.topLeftCorner(m - 1, m - 1));
  r.deviation = r.lambda.head(m - 1) - r.lambda_minor;
  r.top_ratio = r.lambda(m - 1) / t;
  return r;
}

}  // namespace chq
