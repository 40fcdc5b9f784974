#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "chq/error.hpp"

namespace chq {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 4;

/// Small dense types. m never exceeds kMaxDim, so storage stays on the stack.
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

inline double max_abs(const CMat& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) s = std::max(s, std::abs(a(i, j)));
  return s;
}

/// Largest |A_ij - conj(A_ji)|.
inline double hermitian_defect(const CMat& a) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
  return d;
}

inline void require_dim(const CMat& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1 || a.rows() > kMaxDim)
    fail(ErrorCode::InvalidArgument, std::string(what) + ": matrix must be square with 1 <= m <= 4");
}

/// Hermitian check at 1e-14 on unit-scaled entries.
inline void require_hermitian(const CMat& a, const char* what = "matrix") {
  require_dim(a, what);
  const double scale = std::max(1.0, max_abs(a));
  if (hermitian_defect(a) > 1e-14 * scale)
    fail(ErrorCode::NonHermitianInput, std::string(what) + " is not Hermitian");
}

/// Exact symmetrization: (A + A*)/2.
inline CMat hermitian_part(const CMat& a) { return (a + a.adjoint()) * 0.5; }

inline double trace_real(const CMat& a) { return a.trace().real(); }

}  // namespace chq
