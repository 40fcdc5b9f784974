#pragma once

#include <optional>
#include <vector>

#include "chq/hermitian.hpp"
#include "chq/symmetric.hpp"

namespace chq {

/// Dense rank-4 complex tensor T(i, j, p, q) with i, j, p, q < m.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int m) : m_(m), data_(static_cast<std::size_t>(m * m * m * m), cplx(0.0)) {}

  int dim() const { return m_; }
  cplx& operator()(int i, int j, int p, int q) { return data_[idx(i, j, p, q)]; }
  const cplx& operator()(int i, int j, int p, int q) const { return data_[idx(i, j, p, q)]; }

  /// sum T(i,j,p,q) X(i,j) Y(p,q)
  cplx contract(const CMat& x, const CMat& y) const {
    cplx s = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        if (x(i, j) == 0.0) continue;
        cplx inner = 0.0;
        for (int p = 0; p < m_; ++p)
          for (int q = 0; q < m_; ++q) inner += (*this)(i, j, p, q) * y(p, q);
        s += x(i, j) * inner;
      }
    return s;
  }

 private:
  std::size_t idx(int i, int j, int p, int q) const {
    return static_cast<std::size_t>(((i * m_ + j) * m_ + p) * m_ + q);
  }
  int m_ = 0;
  std::vector<cplx> data_;
};

/// Derivatives of F(A) = f(lambda(A rel g)) with respect to the entries A_{i j-bar}.
///   first(i, j)          = F^{i j-bar},   dF = sum first(i,j) dA(i,j)
///   second(i, j, p, q)   = d^2 F / dA(i,j) dA(p,q)
struct FDerivative {
  CMat first;
  std::optional<Tensor4> second;
  EigenPair eigen;
  FJet jet;

  /// The matrix commuting with A when g = I: first^T.
  CMat codiagonal() const { return first.transpose(); }
};

inline CMat first_from_frame(const CMat& xi, const RVec& f) {
  return xi.transpose() * f.cast<cplx>().asDiagonal() * xi.conjugate();
}

inline FDerivative f_first_matrix(const SymmetricFunctionSpec& s, const CMat& a, const Metric& g) {
  FDerivative d;
  d.eigen = eigen_rel(a, g);
  d.jet = f_jet(s, d.eigen.lambda, false);
  d.first = first_from_frame(d.eigen.xi, d.jet.grad);
  return d;
}

inline FDerivative f_first_matrix(const SymmetricFunctionSpec& s, const CMat& a, const CMat& g) {
  return f_first_matrix(s, a, Metric(g));
}

/// (f_k - f_r)/(lambda_k - lambda_r), or its limit f_kk - f_kr at the averaged point.
inline double divided_difference(const SymmetricFunctionSpec& s, const RVec& lambda, const FJet& jet, int k,
                                 int r) {
  const double gap = lambda(k) - lambda(r);
  if (std::abs(gap) >= 1e-7 * (1.0 + lambda.cwiseAbs().maxCoeff()))
    return (jet.grad(k) - jet.grad(r)) / gap;
  RVec sym = lambda;
  sym(k) = sym(r) = 0.5 * (lambda(k) + lambda(r));
  const RMat h = f_hess(s, sym);
  return h(k, k) - h(k, r);
}

inline FDerivative f_second_tensor(const SymmetricFunctionSpec& s, const CMat& a, const Metric& g) {
  FDerivative d;
  d.eigen = eigen_rel(a, g);
  d.jet = f_jet(s, d.eigen.lambda, true);
  d.first = first_from_frame(d.eigen.xi, d.jet.grad);
  const int m = static_cast<int>(a.rows());
  const CMat& x = d.eigen.xi;
  const CMat xc = x.conjugate();
  RMat dd = RMat::Zero(m, m);
  for (int k = 0; k < m; ++k)
    for (int r = 0; r < m; ++r)
      if (k != r) dd(k, r) = divided_difference(s, d.eigen.lambda, d.jet, k, r);
  Tensor4 t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
          cplx v = 0.0;
          for (int k = 0; k < m; ++k) {
            const cplx ak = x(k, i) * xc(k, j);
            for (int l = 0; l < m; ++l) v += d.jet.hess(k, l) * ak * x(l, p) * xc(l, q);
            for (int r = 0; r < m; ++r)
              if (r != k) v += dd(k, r) * x(r, i) * xc(k, j) * x(k, p) * xc(r, q);
          }
          t(i, j, p, q) = v;
        }
  d.second = std::move(t);
  return d;
}

inline FDerivative f_second_tensor(const SymmetricFunctionSpec& s, const CMat& a, const CMat& g) {
  return f_second_tensor(s, a, Metric(g));
}

struct TraceIdentityReport {
  double r1 = 0.0;  ///< sum F^{i j-bar} A_{i j-bar} - sum f_k lambda_k
  double r2 = 0.0;  ///< sum F^{i j-bar} g^{q-bar p} A_{i q-bar} A_{p j-bar} - sum f_k lambda_k^2
  double scale1 = 0.0;
  double scale2 = 0.0;
  double rel1() const { return std::abs(r1) / std::max(scale1, 1e-300); }
  double rel2() const { return std::abs(r2) / std::max(scale2, 1e-300); }
};

inline TraceIdentityReport trace_identities(const SymmetricFunctionSpec& s, const CMat& a, const Metric& g) {
  const FDerivative d = f_first_matrix(s, a, g);
  const RVec& lam = d.eigen.lambda;
  const RVec& f = d.jet.grad;
  const CMat aga = a * g.inverse() * a;
  cplx c1 = 0.0, c2 = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      c1 += d.first(i, j) * a(i, j);
      c2 += d.first(i, j) * aga(i, j);
    }
  TraceIdentityReport r;
  r.r1 = c1.real() - f.dot(lam);
  r.r2 = c2.real() - f.dot(lam.cwiseProduct(lam));
  r.scale1 = f.cwiseAbs().dot(lam.cwiseAbs());
  r.scale2 = f.cwiseAbs().dot(lam.cwiseProduct(lam));
  return r;
}

inline TraceIdentityReport trace_identities(const SymmetricFunctionSpec& s, const CMat& a, const CMat& g) {
  return trace_identities(s, a, Metric(g));
}

struct CommutingTraceReport {
  int r = -1;  ///< witnessing index (0-based)
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  RVec f;       ///< eigenvalues of F in the common frame
  RVec lambda;  ///< eigenvalues of A in the common frame
};

/// Unitary U diagonalizing both commuting Hermitian matrices.
inline CMat common_frame(const CMat& f, const CMat& a) {
  const Eigen::Index m = a.rows();
  const double scale = std::max({1.0, max_abs(a), max_abs(f)});
  if (max_abs(f * a - a * f) > 1e-10 * scale * scale)
    fail(ErrorCode::NotCodiagonalizable, "F and A do not commute");
  const HermitianEigen ea = hermitian_eigen(a);
  CMat u = ea.vectors;
  const double tol = 1e-8 * std::max(1.0, max_abs(a));
  Eigen::Index start = 0;
  while (start < m) {
    Eigen::Index end = start + 1;
    while (end < m && ea.values(end) - ea.values(end - 1) <= tol) ++end;
    const Eigen::Index n = end - start;
    if (n > 1) {
      const CMat block = u.middleCols(start, n);
      const CMat fb = hermitian_part(block.adjoint() * f * block);
      const HermitianEigen ef = hermitian_eigen(fb);
      u.middleCols(start, n) = block * ef.vectors;
    }
    start = end;
  }
  const double off_f = max_abs((u.adjoint() * f * u) - CMat((u.adjoint() * f * u).diagonal().asDiagonal()));
  if (off_f > 1e-8 * scale) fail(ErrorCode::NotCodiagonalizable, "no common eigenframe found");
  return u;
}

/// F must commute with A (F A = A F) and be positive definite; the contraction is
/// sum_{l < m} F^{i j-bar} A_{i l-bar} A_{l j-bar} with F^{i j-bar} = F(j, i).
inline CommutingTraceReport commuting_trace_check(const CMat& f, const CMat& a) {
  require_hermitian(f, "F");
  require_hermitian(a, "A");
  const Eigen::Index m = a.rows();
  if (f.rows() != m) fail(ErrorCode::InvalidArgument, "dimension mismatch");
  const CMat u = common_frame(f, a);
  CommutingTraceReport out;
  out.f = (u.adjoint() * f * u).diagonal().real();
  out.lambda = (u.adjoint() * a * u).diagonal().real();
  if (out.f.minCoeff() <= 0.0) fail(ErrorCode::InvalidArgument, "F must be positive definite");
  double best = -1.0;
  for (Eigen::Index p = 0; p < m; ++p) {
    const double w = std::norm(u(m - 1, p));
    if (w > best + 1e-14) {
      best = w;
      out.r = static_cast<int>(p);
    }
  }
  const CMat afa = a * f * a;
  for (Eigen::Index l = 0; l + 1 < m; ++l) out.lhs += afa(l, l).real();
  for (Eigen::Index k = 0; k < m; ++k)
    if (k != out.r) out.rhs += 0.5 * out.f(k) * out.lambda(k) * out.lambda(k);
  const double scale = out.f.cwiseAbs().dot(out.lambda.cwiseProduct(out.lambda));
  out.pass = out.lhs >= out.rhs - 1e-12 * std::max(1.0, scale);
  return out;
}

}  // namespace chq
