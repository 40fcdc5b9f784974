#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#include <string>
#include <vector>

#include "chq/problem.hpp"

namespace chq {

using SparseMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Real second- and first-order coefficients of a linear operator at one node:
/// L(v) = sum_ab second[a][b] v_ab + sum_a first[a] v_a over the real axes.
struct NodeOperator {
  std::array<std::array<double, kMaxAxes>, kMaxAxes> second{};
  std::array<double, kMaxAxes> first{};
};

/// Coefficients of v -> sum_ij F_ij (ddbar v + W(dv))_ij for a Hermitian F.
inline NodeOperator node_operator(const CMat& f, const WTensor* w) {
  const int m = static_cast<int>(f.rows());
  NodeOperator op;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double re = 0.25 * f(i, j).real(), im = 0.25 * f(i, j).imag();
      const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
      op.second[xi][xj] += re;
      op.second[yi][yj] += re;
      op.second[xi][yj] -= im;
      op.second[yi][xj] += im;
    }
  if (w) {
    for (int p = 0; p < m; ++p) {
      cplx beta = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) beta += f(i, j) * w->w[p](i, j);
      op.first[2 * p] = beta.real();
      op.first[2 * p + 1] = beta.imag();
    }
  }
  return op;
}

/// Append the finite-difference row of op at node idx (row index row).
inline void add_stencil_row(Triplets& t, const GridGeometry& geo, Eigen::Index row, std::size_t idx,
                            const NodeOperator& op) {
  const int n = geo.axes();
  auto put = [&](long long col, double v) {
    if (v != 0.0) t.emplace_back(row, static_cast<Eigen::Index>(col), v);
  };
  for (int a = 0; a < n; ++a) {
    const double h = geo.spacing(a);
    const long long up = geo.neighbor(idx, a, 1), um = geo.neighbor(idx, a, -1);
    const double caa = op.second[a][a] / (h * h);
    put(up, caa + op.first[a] / (2.0 * h));
    put(um, caa - op.first[a] / (2.0 * h));
    put(static_cast<long long>(idx), -2.0 * caa);
    for (int b = a + 1; b < n; ++b) {
      const double c = (op.second[a][b] + op.second[b][a]) / (4.0 * h * geo.spacing(b));
      if (c == 0.0) continue;
      put(geo.neighbor2(idx, a, 1, b, 1), c);
      put(geo.neighbor2(idx, a, 1, b, -1), -c);
      put(geo.neighbor2(idx, a, -1, b, 1), -c);
      put(geo.neighbor2(idx, a, -1, b, -1), c);
    }
  }
}

enum class LinearMethod { SparseLU, BiCGSTAB, GMRES };

inline std::string to_string(LinearMethod m) {
  switch (m) {
    case LinearMethod::SparseLU: return "sparse_lu";
    case LinearMethod::BiCGSTAB: return "bicgstab";
    case LinearMethod::GMRES: return "gmres";
  }
  return "unknown";
}

struct LinearSolveInfo {
  LinearMethod method = LinearMethod::SparseLU;
  int iterations = 0;
  double relative_residual = 0.0;
};

struct LinearSolveOptions {
  double tol = 1e-12;              ///< relative residual target for Krylov methods
  int max_iterations = 5000;
  std::size_t direct_limit = 100000;
  bool direct_only_planar = true;  ///< restrict factorization to two real axes
  int restart = 60;
};

/// Solve a x = b: sparse LU on small planar grids, otherwise BiCGSTAB then GMRES, diagonal preconditioning.
inline Eigen::VectorXd solve_linear(const SparseMat& a, const Eigen::VectorXd& b, int real_axes,
                                    const LinearSolveOptions& opt = {}, LinearSolveInfo* info = nullptr) {
  LinearSolveInfo local;
  LinearSolveInfo& inf = info ? *info : local;
  const double bnorm = std::max(b.norm(), 1e-300);
  const bool direct =
      static_cast<std::size_t>(a.rows()) <= opt.direct_limit && (!opt.direct_only_planar || real_axes <= 2);
  if (direct) {
    Eigen::SparseLU<SparseMat> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) fail(ErrorCode::LinearSolveFailed, "sparse LU factorization failed");
    Eigen::VectorXd x = lu.solve(b);
    inf = {LinearMethod::SparseLU, 1, (a * x - b).norm() / bnorm};
    if (!std::isfinite(inf.relative_residual) || inf.relative_residual > 1e-8)
      fail(ErrorCode::LinearSolveFailed, "sparse LU solve is inaccurate");
    return x;
  }
  {
    Eigen::BiCGSTAB<SparseMat, Eigen::DiagonalPreconditioner<double>> it;
    it.setTolerance(opt.tol);
    it.setMaxIterations(opt.max_iterations);
    it.compute(a);
    Eigen::VectorXd x = it.solve(b);
    inf = {LinearMethod::BiCGSTAB, static_cast<int>(it.iterations()), (a * x - b).norm() / bnorm};
    if (it.info() == Eigen::Success && std::isfinite(inf.relative_residual) && inf.relative_residual <= 10 * opt.tol)
      return x;
  }
  Eigen::GMRES<SparseMat, Eigen::DiagonalPreconditioner<double>> it;
  it.setTolerance(opt.tol);
  it.setMaxIterations(opt.max_iterations);
  it.set_restart(opt.restart);
  it.compute(a);
  Eigen::VectorXd x = it.solve(b);
  inf = {LinearMethod::GMRES, static_cast<int>(it.iterations()), (a * x - b).norm() / bnorm};
  if (!std::isfinite(inf.relative_residual) || inf.relative_residual > 10 * opt.tol)
    fail(ErrorCode::LinearSolveFailed, "Krylov solvers did not reach the tolerance (relative residual " +
                                           std::to_string(inf.relative_residual) + ")");
  return x;
}

/// Jacobian of u -> f(lambda(theta_u)) over all nodes; box boundary rows are identity.
inline SparseMat linearized_assemble(const ScalarField& u, const FieldProblem& p) {
  const std::size_t n = p.geo.size();
  if (u.size() != n) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  Triplets t;
  t.reserve(n * (1 + 2 * p.geo.axes() + 2 * p.geo.axes() * (p.geo.axes() - 1)));
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (p.geo.is_boundary(idx)) {
      t.emplace_back(idx, idx, 1.0);
      continue;
    }
    const NodeEval e = evaluate_node(u, p, idx, true);
    if (!e.in_cone) fail(ErrorCode::OutsideCone, "theta leaves the cone at node " + std::to_string(idx));
    const WTensor* w = p.w.active() ? &p.w.w_at(idx) : nullptr;
    add_stencil_row(t, p.geo, static_cast<Eigen::Index>(idx), idx, node_operator(e.deriv.first, w));
  }
  SparseMat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

}  // namespace chq
