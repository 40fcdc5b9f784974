#pragma once

#include "chq/catalog.hpp"
#include "chq/problem.hpp"

namespace chq {

/// h = f(lambda(chi + ddbar u* + W(du*))) with the derivatives of u* taken exactly.
inline ScalarField manufactured_rhs(const FieldProblem& p, const Expression& u_star) {
  std::vector<CMat> theta(p.geo.size());
  for (std::size_t idx = 0; idx < p.geo.size(); ++idx) {
    const NodeJet jet = exact_jet(u_star, p.geo, idx);
    theta[idx] = p.chi[idx] + jet.ddbar;
    if (p.w.active()) theta[idx] += p.w.w_at(idx).apply(jet.du);
  }
  return rhs_from_exact_theta(p, theta);
}

/// Samples an initial guess and pins it to the boundary data.
inline ScalarField pinned_sample(const Expression& e, const GridGeometry& geo, const ScalarField& phi) {
  ScalarField u = sample(e, geo);
  if (!geo.is_torus())
    for (std::size_t idx = 0; idx < geo.size(); ++idx)
      if (geo.is_boundary(idx)) u[idx] = phi[idx];
  return u;
}

inline double max_abs_difference(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "fields differ in size");
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace chq
