#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "chq/calibration.hpp"
#include "chq/problem.hpp"

namespace chq {

enum class SubsolutionKind { CSubsolution, Admissible, PathHessianQuotient, PathM1Quotient };

inline std::string to_string(SubsolutionKind k) {
  switch (k) {
    case SubsolutionKind::CSubsolution: return "c_subsolution";
    case SubsolutionKind::Admissible: return "admissible";
    case SubsolutionKind::PathHessianQuotient: return "path_hessian_quotient";
    case SubsolutionKind::PathM1Quotient: return "path_m1_quotient";
  }
  return "unknown";
}

struct NodeMargin {
  std::size_t node = 0;
  double margin = 0.0;
};

/// Result of a subsolution check. pass holds exactly when worst_margin > 0.
struct SubsolutionReport {
  SubsolutionKind kind = SubsolutionKind::CSubsolution;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  long long worst_node = -1;
  std::vector<NodeMargin> details;
  std::string note;

  void record(std::size_t node, double margin, bool keep_detail) {
    if (keep_detail) details.push_back({node, margin});
    if (worst_node < 0 || margin < worst_margin) {
      worst_margin = margin;
      worst_node = static_cast<long long>(node);
    }
  }
  void finish() { pass = worst_margin > 0.0; }
};

namespace detail {

inline constexpr double kEqualityTol = 1e-12;

inline RVec drop_slot(const RVec& x, int i) {
  RVec out(x.size() - 1);
  for (int a = 0, b = 0; a < x.size(); ++a)
    if (a != i) out(b++) = x(a);
  return out;
}

inline std::vector<std::size_t> checked_nodes(const GridGeometry& geo) {
  if (geo.is_torus()) {
    std::vector<std::size_t> all(geo.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  return geo.interior();
}

inline RVec node_eigenvalues(const ScalarField& u, const FieldProblem& p, std::size_t idx) {
  return eigen_rel(theta_at(u, p.geo, p.chi, p.w, idx), p.omega[idx]).lambda;
}

}  // namespace detail

/// Whether lambda lies in {mu : mu + t e_i in Gamma for all i and some t > 0}.
inline bool cone_tilde_contains(const SymmetricFunctionSpec& s, const RVec& lambda) {
  if (s.m == 1) return true;
  for (int i = 0; i < s.m; ++i)
    if (!gamma_infinity_contains(s, detail::drop_slot(lambda, i))) return false;
  return true;
}

/// Smallest gap lim_t f(lambda + t e_i) - level over the slots i; +inf when every limit diverges.
inline double c_subsolution_margin(const SymmetricFunctionSpec& s, const RVec& lambda, double level) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!cone_tilde_contains(s, lambda)) fail(ErrorCode::OutsideConeTilde, "eigenvalues outside the cone tilde");
  if (s.m == 1) return inf;
  double worst = inf;
  for (int i = 0; i < s.m; ++i) {
    const double lim = f_infinity(s, detail::drop_slot(lambda, i));
    if (std::isfinite(lim)) worst = std::min(worst, lim - level);
  }
  return worst;
}

inline SubsolutionReport check_c_subsolution(const ScalarField& u, const FieldProblem& p, bool keep_details = false) {
  p.validate();
  if (u.size() != p.geo.size()) fail(ErrorCode::ValidationError, "field does not match grid");
  SubsolutionReport rep;
  rep.kind = SubsolutionKind::CSubsolution;
  for (std::size_t idx : detail::checked_nodes(p.geo)) {
    const RVec lambda = detail::node_eigenvalues(u, p, idx);
    if (!cone_tilde_contains(p.spec, lambda))
      fail(ErrorCode::OutsideConeTilde, "eigenvalues outside the cone tilde at node " + std::to_string(idx));
    rep.record(idx, c_subsolution_margin(p.spec, lambda, p.h[idx]), keep_details);
  }
  rep.finish();
  return rep;
}

/// Cone membership and f >= h at interior nodes, exact agreement with phi on the boundary.
inline SubsolutionReport check_admissible_subsolution(const ScalarField& u, const FieldProblem& p,
                                                      const ScalarField& phi, bool keep_details = false) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  p.validate();
  if (u.size() != p.geo.size()) fail(ErrorCode::ValidationError, "field does not match grid");
  SubsolutionReport rep;
  rep.kind = SubsolutionKind::Admissible;
  for (std::size_t idx : detail::checked_nodes(p.geo)) {
    const RVec lambda = detail::node_eigenvalues(u, p, idx);
    if (!cone_contains(p.spec.cone(), lambda)) {
      rep.record(idx, ninf, keep_details);
      if (rep.note.empty()) rep.note = "outside the cone at node " + std::to_string(idx);
      continue;
    }
    rep.record(idx, f_eval(p.spec, lambda) - p.h[idx] + detail::kEqualityTol, keep_details);
  }
  if (!p.geo.is_torus()) {
    if (phi.size() != p.geo.size()) fail(ErrorCode::ValidationError, "boundary data does not match grid");
    for (std::size_t idx = 0; idx < p.geo.size(); ++idx) {
      if (!p.geo.is_boundary(idx) || u[idx] == phi[idx]) continue;
      rep.record(idx, -std::abs(u[idx] - phi[idx]), keep_details);
      if (rep.note.empty()) rep.note = "boundary mismatch at node " + std::to_string(idx);
    }
  }
  rep.finish();
  return rep;
}

enum class PathVariant { HessianQuotient, M1Quotient };

struct PathConditionInput {
  std::vector<RVec> chi_eigenvalues;  ///< per node, relative to omega
  ScalarField h;
  ScalarField h0;
  double b = 0.0;
  double t = 0.0;
  int k = 2;
  int l = 1;
  PathVariant variant = PathVariant::HessianQuotient;
  bool require_path_coverage = false;  ///< also demand h0 >= h everywhere
};

/// Left side C(m,l)^-1 sigma_{l-1}(mu') / (C(m,k)^-1 sigma_{k-1}(mu')) for one (m-1)-tuple.
inline double path_condition_lhs(const RVec& mu_prime, int m, int k, int l) {
  const double num = sigma(l - 1, mu_prime) / binomial(m, l);
  const double den = sigma(k - 1, mu_prime) / binomial(m, k);
  return num / den;
}

inline SubsolutionReport check_path_condition(const PathConditionInput& in, bool keep_details = false) {
  const std::size_t n = in.chi_eigenvalues.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "no nodes");
  if (in.h.size() != n || in.h0.size() != n) fail(ErrorCode::ValidationError, "h and h0 must match the node count");
  const int m = static_cast<int>(in.chi_eigenvalues.front().size());
  if (m < 2 || m > kMaxDim) fail(ErrorCode::DimensionTooSmall, "check needs 2 <= m <= 4");
  if (in.k < 1 || in.k > m || in.l < 0 || in.l >= in.k) fail(ErrorCode::InvalidArgument, "need 0 <= l < k <= m");
  if (!(in.t >= 0.0 && in.t <= 1.0)) fail(ErrorCode::InvalidArgument, "t must lie in [0, 1]");
  SubsolutionReport rep;
  rep.kind = in.variant == PathVariant::HessianQuotient ? SubsolutionKind::PathHessianQuotient
                                                          : SubsolutionKind::PathM1Quotient;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const RVec& lam = in.chi_eigenvalues[idx];
    if (lam.size() != m) fail(ErrorCode::ValidationError, "eigenvalue vectors must share one length");
    if (!(in.h[idx] > 0.0 && in.h0[idx] > 0.0)) fail(ErrorCode::ValidationError, "h and h0 must be positive");
    const RVec mu = in.variant == PathVariant::HessianQuotient ? lam : t_map(lam);
    if (!gamma_contains(in.k, mu)) fail(ErrorCode::OutsideGammaK, "eigenvalues outside Gamma_k at node " + std::to_string(idx));
    const double rhs = std::pow(in.h0[idx], 1.0 - in.t) * std::pow(in.h[idx], in.t) * std::exp(in.b);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
      margin = std::min(margin, rhs - path_condition_lhs(detail::drop_slot(mu, i), m, in.k, in.l) + detail::kEqualityTol);
    if (in.require_path_coverage) margin = std::min(margin, in.h0[idx] - in.h[idx] + detail::kEqualityTol);
    rep.record(idx, margin, keep_details);
  }
  rep.finish();
  return rep;
}

}  // namespace chq
