#pragma once

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chq/field.hpp"
#include "chq/hyperdual.hpp"

namespace chq {

/// One built-in analytic field with its numeric parameters, e.g. poly24(1, 0.25).
struct ExprTerm {
  std::string id;
  std::vector<double> params;
  bool operator==(const ExprTerm&) const = default;
};

/// Sum of built-in terms, written "poly24(1, 0.25) + bump(3)".
struct Expression {
  std::vector<ExprTerm> terms;
  bool operator==(const Expression&) const = default;
};

struct CatalogEntry {
  std::string id;
  int min_params;
  int max_params;
  const char* doc;
};

/// Built-in analytic fields; coordinates x = (x_1, y_1, ..., x_m, y_m), r2 = |z|^2.
inline const std::vector<CatalogEntry>& expression_catalog() {
  static const std::vector<CatalogEntry> c{
      {"zero", 0, 0, "0"},
      {"const", 1, 1, "c"},
      {"abs2", 0, 1, "s |z|^2"},
      {"poly24", 2, 2, "a |z|^2 + b |z|^4"},
      {"re_z1_sq", 0, 1, "s Re(z_1^2)"},
      {"linear", 1, 12, "sum c_k x_k over real axes"},
      {"cos2", 1, 1, "e (cos 2 pi x_1 + cos 2 pi y_1) - 2 e"},
      {"bump", 1, 2, "-A prod_k (1 - (x_k / L)^2), default L = 1"},
      {"log1p_abs2", 0, 0, "log(1 + |z|^2)"},
  };
  return c;
}

inline const CatalogEntry* find_catalog_entry(const std::string& id) {
  for (const auto& e : expression_catalog())
    if (e.id == id) return &e;
  return nullptr;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(ErrorCode::ParseError, "not a number: '" + t + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline Expression parse_expression(const std::string& text) {
  Expression e;
  int depth = 0;
  std::string cur;
  auto flush = [&]() {
    const std::string t = detail::trim(cur);
    cur.clear();
    if (t.empty()) fail(ErrorCode::ParseError, "empty term in expression '" + text + "'");
    ExprTerm term;
    const auto open = t.find('(');
    if (open == std::string::npos) {
      term.id = t;
    } else {
      if (t.back() != ')') fail(ErrorCode::ParseError, "missing ')' in '" + t + "'");
      term.id = detail::trim(t.substr(0, open));
      const std::string args = t.substr(open + 1, t.size() - open - 2);
      if (!detail::trim(args).empty()) {
        std::stringstream ss(args);
        std::string item;
        while (std::getline(ss, item, ',')) term.params.push_back(detail::parse_double(item));
      }
    }
    const CatalogEntry* entry = find_catalog_entry(term.id);
    if (!entry) fail(ErrorCode::ValidationError, "unknown expression id '" + term.id + "'");
    const int n = static_cast<int>(term.params.size());
    if (n < entry->min_params || n > entry->max_params)
      fail(ErrorCode::ValidationError, "wrong parameter count for '" + term.id + "'");
    e.terms.push_back(std::move(term));
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == '+' && depth == 0) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return e;
}

inline std::string to_string(const Expression& e) {
  std::string out;
  for (std::size_t t = 0; t < e.terms.size(); ++t) {
    if (t) out += " + ";
    out += e.terms[t].id;
    if (!e.terms[t].params.empty()) {
      out += "(";
      for (std::size_t i = 0; i < e.terms[t].params.size(); ++i) {
        if (i) out += ", ";
        out += detail::format_double(e.terms[t].params[i]);
      }
      out += ")";
    }
  }
  return out;
}

/// Evaluate one term; T is double or HyperDual.
template <class T>
T eval_term(const ExprTerm& t, const std::vector<T>& x) {
  const int n = static_cast<int>(x.size());
  auto p = [&](std::size_t i, double def) { return i < t.params.size() ? t.params[i] : def; };
  T r2(0.0);
  for (int k = 0; k < n; ++k) r2 = r2 + x[k] * x[k];
  if (t.id == "zero") return T(0.0);
  if (t.id == "const") return T(p(0, 0.0));
  if (t.id == "abs2") return p(0, 1.0) * r2;
  if (t.id == "poly24") return p(0, 0.0) * r2 + p(1, 0.0) * r2 * r2;
  if (t.id == "re_z1_sq") return p(0, 1.0) * (x[0] * x[0] - x[1] * x[1]);
  if (t.id == "linear") {
    T s(0.0);
    for (int k = 0; k < n && static_cast<std::size_t>(k) < t.params.size(); ++k) s = s + t.params[k] * x[k];
    return s;
  }
  if (t.id == "cos2") {
    const double tp = 2.0 * 3.14159265358979323846;
    const double e = p(0, 0.0);
    using std::cos;
    return e * (cos(tp * x[0]) + cos(tp * x[1])) - 2.0 * e;
  }
  if (t.id == "bump") {
    const double l = p(1, 1.0);
    T prod(1.0);
    for (int k = 0; k < n; ++k) prod = prod * (1.0 - (x[k] / l) * (x[k] / l));
    return -p(0, 0.0) * prod;
  }
  if (t.id == "log1p_abs2") {
    using std::log;
    return log(1.0 + r2);
  }
  fail(ErrorCode::ValidationError, "unknown expression id '" + t.id + "'");
}

template <class T>
T eval_expression(const Expression& e, const std::vector<T>& x) {
  T s(0.0);
  for (const auto& t : e.terms) s = s + eval_term(t, x);
  return s;
}

inline double eval_at(const Expression& e, const GridGeometry& geo, std::size_t idx) {
  const auto pos = geo.position(idx);
  return eval_expression(e, std::vector<double>(pos.begin(), pos.begin() + geo.axes()));
}

/// Sample an expression on every node.
inline ScalarField sample(const Expression& e, const GridGeometry& geo) {
  ScalarField f(geo.size());
  for (std::size_t i = 0; i < geo.size(); ++i) f[i] = eval_at(e, geo, i);
  return f;
}

/// Exact Wirtinger jet of an expression at a node.
inline NodeJet exact_jet(const Expression& e, const GridGeometry& geo, std::size_t idx) {
  const auto pos = geo.position(idx);
  const std::vector<double> x(pos.begin(), pos.begin() + geo.axes());
  const RealJet j = real_jet([&](const std::vector<HyperDual>& v) { return eval_expression(e, v); }, x);
  return wirtinger_from_real([&](int a) { return j.grad[a]; }, [&](int a, int b) { return j.h(a, b); }, geo.m());
}

}  // namespace chq
