#pragma once

#include <limits>
#include <vector>

#include "chq/field.hpp"
#include "chq/matrix_calculus.hpp"
#include "chq/symmetric.hpp"

namespace chq {

/// Discretized equation f(lambda(theta_u rel omega)) = h with theta_u = chi + ddbar u + W(du).
struct FieldProblem {
  GridGeometry geo;
  MetricField omega;
  HermitianFormField chi;
  GradientTermSpec w;
  SymmetricFunctionSpec spec;
  ScalarField h;
  ScalarField phi;  ///< boundary data (box); ignored on a torus

  void validate() const {
    const std::size_t n = geo.size();
    if (spec.m != geo.m()) fail(ErrorCode::ValidationError, "spec dimension differs from grid dimension");
    if (omega.size() != n || chi.size() != n) fail(ErrorCode::ValidationError, "form fields do not match grid");
    if (chi.dim() != geo.m()) fail(ErrorCode::ValidationError, "chi has wrong matrix size");
    if (h.size() != n) fail(ErrorCode::ValidationError, "h does not match grid");
    if (!geo.is_torus() && phi.size() != n) fail(ErrorCode::ValidationError, "boundary data missing");
    if (w.active()) {
      if (w.w.size() != 1 && w.w.size() != n) fail(ErrorCode::ValidationError, "gradient term size mismatch");
      if (w.w.front().dim() != geo.m()) fail(ErrorCode::ValidationError, "gradient term dimension mismatch");
      if (w.kind == GradientKind::ZStructured) {
        for (const WTensor& z : w.z)
          if (!GradientTermSpec::z_condition_holds(z))
            fail(ErrorCode::ValidationError, "Z tensor violates Z^j_{i j-bar} = 0");
      }
    }
    double inf_h = std::numeric_limits<double>::infinity();
    for (double v : h) {
      if (!std::isfinite(v)) fail(ErrorCode::ValidationError, "h must be finite");
      inf_h = std::min(inf_h, v);
    }
    if (!(inf_h > boundary_value(spec)))
      fail(ErrorCode::ValidationError, "inf h must exceed the boundary value of f");
    for (double v : phi)
      if (!std::isfinite(v)) fail(ErrorCode::ValidationError, "boundary data must be finite");
  }
};

/// Everything the solver needs at one interior node.
struct NodeEval {
  bool in_cone = false;
  double f = 0.0;
  CMat theta;
  NodeJet jet;
  FDerivative deriv;  ///< filled when in_cone and derivatives were requested
};

inline NodeEval evaluate_node(const ScalarField& u, const FieldProblem& p, std::size_t idx, bool with_first) {
  NodeEval e;
  e.theta = theta_at(u, p.geo, p.chi, p.w, idx, &e.jet);
  const Metric& g = p.omega[idx];
  EigenPair eig = eigen_rel(e.theta, g);
  e.in_cone = cone_contains(p.spec.cone(), eig.lambda);
  if (!e.in_cone) return e;
  if (with_first) {
    e.deriv = f_first_matrix(p.spec, e.theta, g);
    e.f = e.deriv.jet.value;
  } else {
    e.f = f_eval(p.spec, eig.lambda);
    e.deriv.eigen = std::move(eig);
  }
  return e;
}

struct ResidualReport {
  ScalarField r;                          ///< f - h at interior nodes, 0 elsewhere
  std::vector<std::size_t> violations;    ///< interior nodes outside the cone
  double max_abs = 0.0;                   ///< over in-cone interior nodes
  bool in_cone() const { return violations.empty(); }
};

/// Pointwise f(lambda(theta_u)) - target; cone violations are reported, not thrown.
inline ResidualReport residual_against(const ScalarField& u, const FieldProblem& p, const ScalarField& target) {
  if (u.size() != p.geo.size()) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  ResidualReport rep;
  rep.r.assign(p.geo.size(), 0.0);
  for (std::size_t idx : p.geo.interior()) {
    const NodeEval e = evaluate_node(u, p, idx, false);
    if (!e.in_cone) {
      rep.violations.push_back(idx);
      rep.r[idx] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    rep.r[idx] = e.f - target[idx];
    rep.max_abs = std::max(rep.max_abs, std::abs(rep.r[idx]));
  }
  return rep;
}

inline ResidualReport residual(const ScalarField& u, const FieldProblem& p) { return residual_against(u, p, p.h); }

/// h = f(lambda(theta)) for an exactly known u: useful for manufactured problems.
inline ScalarField rhs_from_exact_theta(const FieldProblem& p, const std::vector<CMat>& theta_exact) {
  ScalarField h(p.geo.size(), 0.0);
  for (std::size_t idx = 0; idx < p.geo.size(); ++idx) {
    const EigenPair e = eigen_rel(theta_exact[idx], p.omega[idx]);
    if (!cone_contains(p.spec.cone(), e.lambda)) fail(ErrorCode::OutsideCone, "exact solution leaves the cone");
    h[idx] = f_eval(p.spec, e.lambda);
  }
  return h;
}

}  // namespace chq
