#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chq/sparse_solve.hpp"
#include "chq/subsolution.hpp"

namespace chq {

/// Size quantities tracked by the a priori estimates; box boundary nodes are skipped for derivatives.
struct MonitorBlock {
  double sup_abs_u = 0.0;
  double sup_grad_u = 0.0;  ///< sup |du|_g
  double K = 1.0;           ///< 1 + sup |du|_g^2
  double sup_ddbar_u = 0.0; ///< sup |ddbar u|_g (metric Frobenius norm)
  double ratio = 0.0;       ///< sup_ddbar_u / K
  double lambda_min = 0.0;  ///< eigenvalue range of theta_u relative to omega
  double lambda_max = 0.0;
  std::optional<double> min_u_minus_sub;      ///< min(u - subsolution)
  std::optional<double> min_barrier_minus_u;  ///< min(barrier - u)
};

inline MonitorBlock monitor(const ScalarField& u, const FieldProblem& p) {
  if (u.size() != p.geo.size()) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  MonitorBlock mb;
  for (double v : u) mb.sup_abs_u = std::max(mb.sup_abs_u, std::abs(v));
  double grad2 = 0.0;
  bool first = true;
  for (std::size_t idx : p.geo.interior()) {
    NodeJet jet;
    const CMat theta = theta_at(u, p.geo, p.chi, p.w, idx, &jet);
    const Metric& g = p.omega[idx];
    grad2 = std::max(grad2, std::abs(jet.du.dot(g.inverse().transpose() * jet.du)));
    const CMat hn = g.factor_inverse() * jet.ddbar * g.factor_inverse().adjoint();
    mb.sup_ddbar_u = std::max(mb.sup_ddbar_u, hn.norm());
    const RVec lam = eigen_rel(theta, g).lambda;
    mb.lambda_min = first ? lam(0) : std::min(mb.lambda_min, lam(0));
    mb.lambda_max = first ? lam(lam.size() - 1) : std::max(mb.lambda_max, lam(lam.size() - 1));
    first = false;
  }
  mb.sup_grad_u = std::sqrt(grad2);
  mb.K = 1.0 + grad2;
  mb.ratio = mb.sup_ddbar_u / mb.K;
  return mb;
}

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 50;
  double armijo = 1e-4;
  int max_halvings = 20;
  LinearSolveOptions linear;
};

struct NewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
  std::vector<double> history;  ///< max-norm residual per accepted iterate
  int cone_rejections = 0;
  LinearSolveInfo linear;
};

/// Residual evaluation: in_cone false aborts the trial point.
struct ResidualEval {
  bool in_cone = false;
  Eigen::VectorXd r;
  double max_abs = 0.0;
};

/// Damped Newton with Armijo backtracking on the max-norm residual, keeping iterates in the cone.
inline NewtonResult newton_solve(Eigen::VectorXd x, const std::function<ResidualEval(const Eigen::VectorXd&)>& eval,
                                 const std::function<SparseMat(const Eigen::VectorXd&)>& jacobian, int real_axes,
                                 const NewtonOptions& opt) {
  NewtonResult res;
  ResidualEval cur = eval(x);
  if (!cur.in_cone) fail(ErrorCode::ConeEscape, "initial iterate lies outside the cone");
  res.history.push_back(cur.max_abs);
  while (cur.max_abs >= opt.tol) {
    if (res.iterations >= opt.max_iter)
      fail(ErrorCode::NewtonStalled, "no convergence within " + std::to_string(opt.max_iter) + " iterations (residual " +
                                         std::to_string(cur.max_abs) + ")");
    const Eigen::VectorXd step = solve_linear(jacobian(x), -cur.r, real_axes, opt.linear, &res.linear);
    double alpha = 1.0;
    bool any_in_cone = false, accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, alpha *= 0.5) {
      const Eigen::VectorXd trial = x + alpha * step;
      ResidualEval e = eval(trial);
      if (!e.in_cone) {
        ++res.cone_rejections;
        continue;
      }
      any_in_cone = true;
      if (e.max_abs <= (1.0 - opt.armijo * alpha) * cur.max_abs) {
        x = trial;
        cur = std::move(e);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!any_in_cone) fail(ErrorCode::ConeEscape, "every trial step left the cone");
      fail(ErrorCode::NewtonStalled, "line search reached the step floor (residual " + std::to_string(cur.max_abs) + ")");
    }
    ++res.iterations;
    res.history.push_back(cur.max_abs);
  }
  res.x = std::move(x);
  return res;
}

struct PathStep {
  double t = 0.0;
  double dt = 0.0;
  double b = 0.0;
  int newton_iterations = 0;
  double residual = 0.0;
  double upper_gap = 0.0;  ///< bound - b at the argmax of u; must be >= -tol
  double lower_gap = 0.0;  ///< b - bound at the argmin of u; must be >= -tol
  bool monitors_ok = true;
};

struct SolveReport {
  ScalarField u;
  double b = 0.0;
  bool closed = false;
  int iterations = 0;
  std::vector<double> residual_history;
  int cone_rejections = 0;
  double final_residual = 0.0;
  LinearSolveInfo linear;
  MonitorBlock monitor;
  bool sandwich_ok = true;
  std::vector<PathStep> path;
  double max_abs_b = 0.0;
  bool path_monitors_ok = true;
  std::optional<SubsolutionReport> precondition;
};

namespace detail {

inline Eigen::VectorXd to_vec(const ScalarField& u) { return Eigen::Map<const Eigen::VectorXd>(u.data(), u.size()); }

inline ScalarField to_field(const Eigen::VectorXd& x, std::size_t n) { return ScalarField(x.data(), x.data() + n); }

}  // namespace detail

/// Solves tr_g(chi + ddbar v + W(dv)) = 0 with v = phi on the box boundary.
inline ScalarField linear_barrier_solve(const FieldProblem& p, double* residual_out = nullptr) {
  p.validate();
  if (p.geo.is_torus()) fail(ErrorCode::InvalidArgument, "the barrier solve needs a box");
  const std::size_t n = p.geo.size();
  Triplets t;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (p.geo.is_boundary(idx)) {
      t.emplace_back(idx, idx, 1.0);
      rhs(idx) = p.phi[idx];
      continue;
    }
    const Metric& g = p.omega[idx];
    const WTensor* w = p.w.active() ? &p.w.w_at(idx) : nullptr;
    add_stencil_row(t, p.geo, static_cast<Eigen::Index>(idx), idx, node_operator(g.inverse().transpose(), w));
    rhs(idx) = -g.trace(p.chi[idx]);
  }
  SparseMat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(t.begin(), t.end());
  LinearSolveOptions opt;
  opt.tol = 1e-14;
  Eigen::VectorXd x = solve_linear(a, rhs, p.geo.axes(), opt);
  auto max_res = [&](const Eigen::VectorXd& v) { return (a * v - rhs).cwiseAbs().maxCoeff(); };
  for (int refine = 0; refine < 3 && max_res(x) >= 1e-10; ++refine) x += solve_linear(a, rhs - a * x, p.geo.axes(), opt);
  const double r = max_res(x);
  if (residual_out) *residual_out = r;
  if (!(r < 1e-10)) fail(ErrorCode::LinearSolveFailed, "barrier residual " + std::to_string(r) + " above 1e-10");
  return detail::to_field(x, n);
}

struct DirichletOptions {
  NewtonOptions newton;
  bool compute_barrier = true;
  double sandwich_tol = 1e-8;
};

/// Damped Newton from an admissible subsolution for f(lambda(theta_u)) = h, u = phi on the boundary.
inline SolveReport dirichlet_solve(const FieldProblem& p, const ScalarField& sub, const DirichletOptions& opt = {}) {
  p.validate();
  if (p.geo.is_torus()) fail(ErrorCode::InvalidArgument, "the Dirichlet solve needs a box");
  const SubsolutionReport adm = check_admissible_subsolution(sub, p, p.phi);
  if (!adm.pass)
    fail(ErrorCode::HypothesisUnverifiable,
         "initial guess is not an admissible subsolution (worst margin " + std::to_string(adm.worst_margin) + ")");
  const std::size_t n = p.geo.size();
  auto eval = [&](const Eigen::VectorXd& x) {
    ResidualEval e;
    e.r.resize(static_cast<Eigen::Index>(n));
    const ScalarField u = detail::to_field(x, n);
    for (std::size_t idx = 0; idx < n; ++idx) {
      if (p.geo.is_boundary(idx)) {
        e.r(idx) = u[idx] - p.phi[idx];
      } else {
        const NodeEval ne = evaluate_node(u, p, idx, false);
        if (!ne.in_cone) return e;
        e.r(idx) = ne.f - p.h[idx];
      }
      e.max_abs = std::max(e.max_abs, std::abs(e.r(idx)));
    }
    e.in_cone = true;
    return e;
  };
  auto jac = [&](const Eigen::VectorXd& x) { return linearized_assemble(detail::to_field(x, n), p); };
  const NewtonResult nr = newton_solve(detail::to_vec(sub), eval, jac, p.geo.axes(), opt.newton);
  SolveReport rep;
  rep.u = detail::to_field(nr.x, n);
  rep.iterations = nr.iterations;
  rep.residual_history = nr.history;
  rep.cone_rejections = nr.cone_rejections;
  rep.final_residual = nr.history.back();
  rep.linear = nr.linear;
  rep.monitor = monitor(rep.u, p);
  double lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) lower = std::min(lower, rep.u[i] - sub[i]);
  rep.monitor.min_u_minus_sub = lower;
  rep.sandwich_ok = lower >= -opt.sandwich_tol;
  if (opt.compute_barrier) {
    const ScalarField barrier = linear_barrier_solve(p);
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) upper = std::min(upper, barrier[i] - rep.u[i]);
    rep.monitor.min_barrier_minus_u = upper;
    rep.sandwich_ok = rep.sandwich_ok && upper >= -opt.sandwich_tol;
  }
  return rep;
}

/// Target along the path: additive in the level for log families, multiplicative otherwise.
inline bool additive_path(const SymmetricFunctionSpec& s) {
  return s.family == Family::LogSigma || s.family == Family::LogQuotientT;
}

/// The path condition of the closed problem for u = 0, in the quotient normalization.
inline std::optional<SubsolutionReport> path_precondition(const FieldProblem& p, const ScalarField& h0) {
  const auto& s = p.spec;
  if (s.m < 2 || (s.family != Family::QuotientSigma && s.family != Family::LogQuotientT)) return std::nullopt;
  PathConditionInput in;
  in.k = s.k;
  in.l = s.l;
  in.variant = s.family == Family::QuotientSigma ? PathVariant::HessianQuotient : PathVariant::M1Quotient;
  in.require_path_coverage = true;
  const double c = binomial(s.m, s.k) / binomial(s.m, s.l);
  auto to_quotient = [&](double v) {
    return s.family == Family::QuotientSigma ? c * std::pow(v, -(s.k - s.l)) : c * std::exp(-v);
  };
  for (std::size_t idx = 0; idx < p.geo.size(); ++idx) {
    in.chi_eigenvalues.push_back(eigen_rel(p.chi[idx], p.omega[idx]).lambda);
    in.h.push_back(to_quotient(p.h[idx]));
    in.h0.push_back(to_quotient(h0[idx]));
  }
  return check_path_condition(in);
}

struct ContinuityOptions {
  NewtonOptions newton;
  int path_steps = 20;
  double min_dt = 1e-4;
  int easy_iterations = 3;
  double monitor_tol = 1e-6;
  bool strict_precondition = false;
};

/// Continuity method on a torus: f(lambda(theta_{u_t})) = path(t, b_t) from t = 0 (u = 0) to t = 1.
inline SolveReport continuity_solve(const FieldProblem& p, const ContinuityOptions& opt = {}) {
  p.validate();
  if (!p.geo.is_torus()) fail(ErrorCode::InvalidArgument, "the continuity method needs a torus");
  if (opt.path_steps < 1) fail(ErrorCode::InvalidArgument, "path_steps must be positive");
  const std::size_t n = p.geo.size();
  const bool additive = additive_path(p.spec);
  ScalarField h0(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const RVec lam = eigen_rel(p.chi[idx], p.omega[idx]).lambda;
    if (!cone_contains(p.spec.cone(), lam)) fail(ErrorCode::ConeEscape, "chi lies outside the cone; u = 0 is not admissible");
    h0[idx] = f_eval(p.spec, lam);
    if (!additive && !(h0[idx] > 0.0 && p.h[idx] > 0.0))
      fail(ErrorCode::ValidationError, "multiplicative path needs positive h and f(chi)");
  }
  SolveReport rep;
  rep.closed = true;
  rep.precondition = path_precondition(p, h0);
  if (opt.strict_precondition && rep.precondition && !rep.precondition->pass)
    fail(ErrorCode::HypothesisUnverifiable, "u = 0 fails the path condition for the closed problem");

  auto level = [&](std::size_t idx, double t) {
    return additive ? (1.0 - t) * h0[idx] + t * p.h[idx]
                    : std::pow(h0[idx], 1.0 - t) * std::pow(p.h[idx], t);
  };
  auto bound = [&](std::size_t idx, double t) {
    return additive ? t * (h0[idx] - p.h[idx]) : t * std::log(h0[idx] / p.h[idx]);
  };
  const double inv_n = 1.0 / static_cast<double>(n);

  auto solve_at = [&](double t, const Eigen::VectorXd& x0) {
    auto eval = [&](const Eigen::VectorXd& x) {
      ResidualEval e;
      e.r.resize(static_cast<Eigen::Index>(n + 1));
      const ScalarField u = detail::to_field(x, n);
      const double b = x(n);
      for (std::size_t idx = 0; idx < n; ++idx) {
        const NodeEval ne = evaluate_node(u, p, idx, false);
        if (!ne.in_cone) return e;
        const double target = additive ? level(idx, t) + b : level(idx, t) * std::exp(b);
        e.r(idx) = ne.f - target;
        e.max_abs = std::max(e.max_abs, std::abs(e.r(idx)));
      }
      e.r(n) = x.head(n).mean();
      e.max_abs = std::max(e.max_abs, std::abs(e.r(n)));
      e.in_cone = true;
      return e;
    };
    auto jac = [&](const Eigen::VectorXd& x) {
      const ScalarField u = detail::to_field(x, n);
      const SparseMat j = linearized_assemble(u, p);
      Triplets tr;
      tr.reserve(static_cast<std::size_t>(j.nonZeros()) + 2 * n);
      for (int k = 0; k < j.outerSize(); ++k)
        for (SparseMat::InnerIterator it(j, k); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
      for (std::size_t idx = 0; idx < n; ++idx) {
        const double dtarget = additive ? 1.0 : level(idx, t) * std::exp(x(n));
        tr.emplace_back(idx, n, -dtarget);
        tr.emplace_back(n, idx, inv_n);
      }
      SparseMat a(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
      a.setFromTriplets(tr.begin(), tr.end());
      return a;
    };
    return newton_solve(x0, eval, jac, p.geo.axes(), opt.newton);
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1));
  const double dt0 = 1.0 / opt.path_steps;
  double t = 0.0, dt = dt0;
  int easy_streak = 0;
  ErrorCode last_failure = ErrorCode::PathStalled;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    NewtonResult nr;
    try {
      nr = solve_at(t_next, x);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NewtonStalled && e.code() != ErrorCode::ConeEscape &&
          e.code() != ErrorCode::LinearSolveFailed)
        throw;
      last_failure = e.code() == ErrorCode::ConeEscape ? ErrorCode::ConeEscape : ErrorCode::PathStalled;
      dt *= 0.5;
      easy_streak = 0;
      if (dt < opt.min_dt)
        fail(last_failure, "path step fell below " + std::to_string(opt.min_dt) + " at t = " + std::to_string(t) + ": " +
                               e.what());
      continue;
    }
    x = nr.x;
    t = t_next;
    PathStep ps;
    ps.t = t;
    ps.dt = dt;
    ps.b = x(n);
    ps.newton_iterations = nr.iterations;
    ps.residual = nr.history.back();
    std::size_t imax = 0, imin = 0;
    for (std::size_t idx = 1; idx < n; ++idx) {
      if (x(idx) > x(imax)) imax = idx;
      if (x(idx) < x(imin)) imin = idx;
    }
    ps.upper_gap = bound(imax, t) - ps.b;
    ps.lower_gap = ps.b - bound(imin, t);
    ps.monitors_ok = ps.upper_gap >= -opt.monitor_tol && ps.lower_gap >= -opt.monitor_tol;
    rep.path_monitors_ok = rep.path_monitors_ok && ps.monitors_ok;
    rep.max_abs_b = std::max(rep.max_abs_b, std::abs(ps.b));
    rep.iterations += nr.iterations;
    rep.cone_rejections += nr.cone_rejections;
    rep.residual_history.insert(rep.residual_history.end(), nr.history.begin(), nr.history.end());
    rep.linear = nr.linear;
    rep.path.push_back(ps);
    easy_streak = nr.iterations <= opt.easy_iterations ? easy_streak + 1 : 0;
    if (easy_streak >= 2) {
      dt = std::min(2.0 * dt, dt0);
      easy_streak = 0;
    }
  }
  const double top = x.head(n).maxCoeff();
  rep.u = detail::to_field(x, n);
  for (double& v : rep.u) v -= top;
  rep.b = x(n);
  rep.final_residual = rep.path.empty() ? 0.0 : rep.path.back().residual;
  rep.monitor = monitor(rep.u, p);
  return rep;
}

}  // namespace chq
