#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "chq/boundary.hpp"
#include "chq/config.hpp"
#include "chq/field_io.hpp"
#include "chq/manufactured.hpp"
#include "chq/solver.hpp"
#include "chq/verify.hpp"

namespace chq {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitHypothesis = 3 };

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::IoError: return kExitConfig;
    case ErrorCode::HypothesisUnverifiable:
    case ErrorCode::OutsideConeTilde:
    case ErrorCode::OutsideGammaInfinity:
    case ErrorCode::OutsideGammaK: return kExitHypothesis;
    default: return kExitSolver;
  }
}

/// A problem assembled from a config, with the exact solution when one was given.
struct BuiltProblem {
  FieldProblem problem;
  std::optional<ScalarField> exact;
  std::optional<ScalarField> subsolution;
};

namespace run_detail {

inline std::vector<int> expand(const std::vector<int>& v, int axes) {
  return v.size() == 1 ? std::vector<int>(axes, v.front()) : v;
}

inline std::vector<double> expand(const std::vector<double>& v, int axes) {
  return v.size() == 1 ? std::vector<double>(axes, v.front()) : v;
}

inline ScalarField load_field(const std::string& path, const GridGeometry& geo) {
  LoadedScalarField f = load_scalar_csv(path);
  if (!(f.geo == geo)) fail(ErrorCode::ValidationError, "grid in " + path + " differs from the configured grid");
  return f.values;
}

inline HermitianFormField load_form(const std::string& path, const GridGeometry& geo) {
  LoadedFormField f = load_form_csv(path);
  if (!(f.geo == geo)) fail(ErrorCode::ValidationError, "grid in " + path + " differs from the configured grid");
  if (f.values.dim() != geo.m()) fail(ErrorCode::ValidationError, "form in " + path + " has the wrong size");
  return f.values;
}

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline Json numbers(const RVec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

inline Json to_json(const SubsolutionReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["pass"] = r.pass;
  j["worst_margin"] = number(r.worst_margin);
  j["worst_node"] = r.worst_node;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json to_json(const MonitorBlock& m) {
  Json j;
  j["sup_abs_u"] = number(m.sup_abs_u);
  j["sup_grad_u"] = number(m.sup_grad_u);
  j["K"] = number(m.K);
  j["sup_ddbar_u"] = number(m.sup_ddbar_u);
  j["ratio"] = number(m.ratio);
  j["lambda_min"] = number(m.lambda_min);
  j["lambda_max"] = number(m.lambda_max);
  if (m.min_u_minus_sub) j["min_u_minus_sub"] = number(*m.min_u_minus_sub);
  if (m.min_barrier_minus_u) j["min_barrier_minus_u"] = number(*m.min_barrier_minus_u);
  return j;
}

inline Json to_json(const SolveReport& r) {
  Json j;
  j["iterations"] = r.iterations;
  j["residual_history"] = numbers(r.residual_history);
  j["final_residual"] = number(r.final_residual);
  j["cone_rejections"] = r.cone_rejections;
  j["linear"] = {{"method", to_string(r.linear.method)},
                 {"iterations", r.linear.iterations},
                 {"relative_residual", number(r.linear.relative_residual)}};
  j["monitor"] = to_json(r.monitor);
  if (r.closed) {
    j["b"] = number(r.b);
    j["max_abs_b"] = number(r.max_abs_b);
    j["path_monitors_ok"] = r.path_monitors_ok;
    Json steps = Json::array();
    for (const auto& s : r.path)
      steps.push_back({{"t", number(s.t)},
                       {"dt", number(s.dt)},
                       {"b", number(s.b)},
                       {"newton_iterations", s.newton_iterations},
                       {"residual", number(s.residual)},
                       {"upper_gap", number(s.upper_gap)},
                       {"lower_gap", number(s.lower_gap)},
                       {"monitors_ok", s.monitors_ok}});
    j["path"] = steps;
    if (r.precondition) j["precondition"] = to_json(*r.precondition);
  } else {
    j["sandwich_ok"] = r.sandwich_ok;
  }
  return j;
}

inline DefiningFunction defining_function(const RunConfig& c) {
  const int m = c.geometry.m;
  const auto& l = c.levi;
  if (l.domain == "ball") return DefiningFunction::ball(m, l.radius);
  if (l.domain == "polydisc") return DefiningFunction::polydisc(m, l.power, l.radius);
  if (l.domain == "half_space") return DefiningFunction::half_space(m);
  return DefiningFunction::polynomial(m, parse_polynomial(l.polynomial, m));
}

}  // namespace run_detail

inline GridGeometry build_geometry(const RunConfig& c) {
  const int axes = 2 * c.geometry.m;
  const auto nodes = run_detail::expand(c.geometry.nodes, axes);
  const auto lengths = run_detail::expand(c.geometry.lengths, axes);
  return c.geometry.topology == "torus" ? GridGeometry::torus(c.geometry.m, nodes, lengths)
                                        : GridGeometry::box(c.geometry.m, nodes, lengths);
}

inline BuiltProblem build_problem(const RunConfig& c) {
  BuiltProblem out;
  FieldProblem& p = out.problem;
  const int m = c.geometry.m;
  p.geo = build_geometry(c);
  const std::size_t n = p.geo.size();
  p.spec = c.spec();
  const auto& d = c.data;
  p.omega = d.omega.kind == FormSpec::Kind::File
                ? MetricField(run_detail::load_form(d.omega.path, p.geo))
                : MetricField(HermitianFormField::uniform(d.omega.scale * CMat::Identity(m, m), n));
  p.chi = d.chi.kind == FormSpec::Kind::File ? run_detail::load_form(d.chi.path, p.geo)
                                             : HermitianFormField::uniform(d.chi.scale * CMat::Identity(m, m), n);
  if (d.gradient == "one_form") {
    CVec a(m);
    for (int i = 0; i < m; ++i) a(i) = cplx(d.one_form[2 * i], d.one_form[2 * i + 1]);
    p.w = GradientTermSpec::one_form({a});
  } else {
    p.w = GradientTermSpec::none();
  }
  auto field = [&](const FieldSpec& s) -> ScalarField {
    if (s.kind == FieldSpec::Kind::File) return run_detail::load_field(s.path, p.geo);
    return sample(s.expr, p.geo);
  };
  if (!d.exact.empty()) out.exact = field(d.exact);
  if (d.h.kind == FieldSpec::Kind::Manufactured) {
    if (d.exact.kind != FieldSpec::Kind::Expression)
      fail(ErrorCode::ValidationError, "manufactured h needs an analytic exact solution");
    p.h = manufactured_rhs(p, d.exact.expr);
  } else if (!d.h.empty()) {
    p.h = field(d.h);
  } else {
    p.h.assign(n, f_eval(p.spec, RVec::Ones(m)));
  }
  if (!p.geo.is_torus()) {
    if (d.phi.kind == FieldSpec::Kind::Manufactured || (d.phi.empty() && out.exact)) p.phi = *out.exact;
    else if (d.phi.empty()) p.phi.assign(n, 0.0);
    else p.phi = field(d.phi);
  }
  if (!d.subsolution.empty()) {
    ScalarField u = field(d.subsolution);
    if (!p.geo.is_torus() && d.subsolution.kind == FieldSpec::Kind::Expression)
      u = pinned_sample(d.subsolution.expr, p.geo, p.phi);
    out.subsolution = std::move(u);
  }
  p.validate();
  return out;
}

inline NewtonOptions newton_options(const RunConfig& c) {
  NewtonOptions o;
  o.tol = c.solver.tol;
  o.max_iter = c.solver.max_iter;
  o.linear.tol = c.solver.linear_tol;
  return o;
}

/// Result of one dispatched command: exit code, JSON report and optional fields to write.
struct RunOutcome {
  int exit_code = kExitOk;
  Json report;
  std::optional<std::pair<GridGeometry, ScalarField>> field;
  std::string table;  ///< human-readable summary
};

inline RunOutcome run_solve_dirichlet(const RunConfig& c) {
  RunOutcome o;
  BuiltProblem b = build_problem(c);
  DirichletOptions opt;
  opt.newton = newton_options(c);
  const SolveReport r = dirichlet_solve(b.problem, *b.subsolution, opt);
  o.report["result"] = run_detail::to_json(r);
  if (b.exact) o.report["result"]["error_vs_exact"] = run_detail::number(max_abs_difference(r.u, *b.exact));
  o.field = std::make_pair(b.problem.geo, r.u);
  o.exit_code = r.sandwich_ok ? kExitOk : kExitHypothesis;
  o.table = "newton iterations " + std::to_string(r.iterations) + ", residual " + std::to_string(r.final_residual) +
            ", sandwich " + (r.sandwich_ok ? "ok" : "violated");
  return o;
}

inline RunOutcome run_solve_closed(const RunConfig& c) {
  RunOutcome o;
  BuiltProblem b = build_problem(c);
  ContinuityOptions opt;
  opt.newton = newton_options(c);
  opt.path_steps = c.solver.path_steps;
  opt.min_dt = c.solver.min_dt;
  opt.strict_precondition = c.solver.strict_precondition;
  const SolveReport r = continuity_solve(b.problem, opt);
  o.report["result"] = run_detail::to_json(r);
  if (b.exact) {
    ScalarField e = *b.exact;
    const double top = *std::max_element(e.begin(), e.end());
    for (double& v : e) v -= top;
    o.report["result"]["error_vs_exact"] = run_detail::number(max_abs_difference(r.u, e));
  }
  o.field = std::make_pair(b.problem.geo, r.u);
  o.exit_code = r.path_monitors_ok ? kExitOk : kExitHypothesis;
  o.table = "path steps " + std::to_string(r.path.size()) + ", b = " + std::to_string(r.b) + ", monitors " +
            (r.path_monitors_ok ? "ok" : "violated");
  return o;
}

inline RunOutcome run_check_subsolution(const RunConfig& c) {
  RunOutcome o;
  BuiltProblem b = build_problem(c);
  const FieldProblem& p = b.problem;
  std::optional<SubsolutionReport> r;
  if (c.check.kind == "c_subsolution") {
    r = check_c_subsolution(*b.subsolution, p);
  } else if (c.check.kind == "admissible") {
    r = check_admissible_subsolution(*b.subsolution, p, p.phi);
  } else {
    ScalarField h0(p.geo.size());
    for (std::size_t idx = 0; idx < p.geo.size(); ++idx) h0[idx] = f_eval(p.spec, eigen_rel(p.chi[idx], p.omega[idx]).lambda);
    r = path_precondition(p, h0);
  }
  o.report["result"] = run_detail::to_json(*r);
  o.exit_code = r->pass ? kExitOk : kExitHypothesis;
  o.table = c.check.kind + ": " + (r->pass ? "pass" : "fail") + " (worst margin " + std::to_string(r->worst_margin) +
            " at node " + std::to_string(r->worst_node) + ")";
  return o;
}

inline RunOutcome run_verify(const RunConfig& c) {
  RunOutcome o;
  const VerifyReport r = run_identity_suite({c.seed, c.verify.samples});
  Json checks = Json::array();
  for (const auto& k : r.checks)
    checks.push_back({{"name", k.name},
                      {"samples", k.samples},
                      {"failures", k.failures},
                      {"max_error", run_detail::number(k.max_error)},
                      {"tolerance", k.tolerance},
                      {"pass", k.pass()}});
  o.report["result"] = {{"pass", r.pass()}, {"checks", checks}};
  std::ostringstream os;
  print_table(os, r);
  o.table = os.str();
  o.exit_code = r.pass() ? kExitOk : kExitHypothesis;
  return o;
}

inline RunOutcome run_levi(const RunConfig& c) {
  RunOutcome o;
  const DefiningFunction rho = run_detail::defining_function(c);
  const int m = c.geometry.m;
  CVec z = CVec::Zero(m);
  if (!c.levi.point.empty()) {
    for (int i = 0; i < m; ++i) z(i) = cplx(c.levi.point[2 * i], c.levi.point[2 * i + 1]);
  } else if (c.levi.domain == "ball" || c.levi.domain == "polydisc") {
    z(0) = c.levi.radius;
  }
  if (c.levi.project) z = project_to_boundary(rho, z);
  const LeviReport r = levi_form(sample_defining_function(rho, z));
  Json point = Json::array();
  for (int i = 0; i < m; ++i) point.push_back({z(i).real(), z(i).imag()});
  o.report["result"] = {{"point", point},
                        {"grad_norm", r.grad_norm},
                        {"eigenvalues", run_detail::numbers(r.eigenvalues)},
                        {"classification", to_string(r.classification)},
                        {"weakly_pseudoconvex", r.weakly_pseudoconvex},
                        {"pseudoconcave", r.pseudoconcave}};
  std::ostringstream os;
  os << "levi eigenvalues";
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) os << ' ' << r.eigenvalues(i);
  os << " (" << to_string(r.classification) << ")";
  o.table = os.str();
  return o;
}

inline RunOutcome run_calibrate(const RunConfig& c) {
  RunOutcome o;
  const SymmetricFunctionSpec s = c.spec();
  std::optional<RVec> mu;
  if (!c.calibrate.mu.empty()) mu = Eigen::Map<const Eigen::VectorXd>(c.calibrate.mu.data(), s.m);
  const ConeCalibration cal =
      cone_calibrate(s, c.calibrate.level, c.calibrate.samples, c.calibrate.delta, c.calibrate.radius, c.seed, mu);
  o.report["result"] = {{"family", s.name()},
                        {"sigma", cal.sigma},
                        {"N", run_detail::number(cal.N)},
                        {"tau", run_detail::number(cal.tau)},
                        {"kappa", run_detail::number(cal.kappa)},
                        {"kappa_verified", cal.kappa_verified},
                        {"samples", cal.samples}};
  o.table = s.name() + ": N = " + std::to_string(cal.N) + ", tau = " + std::to_string(cal.tau) +
            ", kappa = " + std::to_string(cal.kappa);
  return o;
}

/// Dispatches the configured command; library errors become exit codes inside the report.
inline RunOutcome run(const RunConfig& c) {
  RunOutcome o;
  try {
    if (c.command == "solve-dirichlet") o = run_solve_dirichlet(c);
    else if (c.command == "solve-closed") o = run_solve_closed(c);
    else if (c.command == "check-subsolution") o = run_check_subsolution(c);
    else if (c.command == "verify") o = run_verify(c);
    else if (c.command == "levi") o = run_levi(c);
    else if (c.command == "calibrate-cone") o = run_calibrate(c);
    else fail(ErrorCode::ValidationError, "unknown command '" + c.command + "'");
    o.report["status"] = o.exit_code == kExitOk ? "ok" : "check_failed";
  } catch (const Error& e) {
    o = {};
    o.exit_code = exit_code_for(e.code());
    o.report["status"] = "error";
    o.report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    o.table = e.what();
  }
  Json full;
  full["schema"] = kReportSchema;
  full["command"] = c.command;
  full["seed"] = c.seed;
  full["exit_code"] = o.exit_code;
  for (auto it = o.report.begin(); it != o.report.end(); ++it) full[it.key()] = it.value();
  full["config"] = to_text(c);
  o.report = std::move(full);
  return o;
}

/// Writes the JSON report (and the solution field when requested) under c.output.dir.
inline std::filesystem::path write_outputs(const RunConfig& c, const RunOutcome& o) {
  const std::filesystem::path dir(c.output.dir);
  std::filesystem::create_directories(dir);
  const std::filesystem::path report = dir / c.output.report;
  std::ofstream os(report);
  if (!os) fail(ErrorCode::IoError, "cannot write " + report.string());
  os << o.report.dump(2) << '\n';
  if (c.output.fields && o.field) save_scalar_csv((dir / "u.csv").string(), o.field->first, o.field->second);
  return report;
}

}  // namespace chq
