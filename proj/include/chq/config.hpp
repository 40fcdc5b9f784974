#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chq/catalog.hpp"
#include "chq/symmetric.hpp"

namespace chq {

/// Scalar field source: a catalog expression, a CSV file, or h computed from the exact solution.
struct FieldSpec {
  enum class Kind { Expression, File, Manufactured };
  Kind kind = Kind::Expression;
  Expression expr;
  std::string path;
  bool operator==(const FieldSpec&) const = default;

  static FieldSpec expression(const std::string& text) { return {Kind::Expression, parse_expression(text), {}}; }
  bool empty() const { return kind == Kind::Expression && expr.terms.empty(); }
};

/// Form field source: s * I (s * omega for chi) or a CSV file.
struct FormSpec {
  enum class Kind { Scale, File };
  Kind kind = Kind::Scale;
  double scale = 1.0;
  std::string path;
  bool operator==(const FormSpec&) const = default;
};

struct GeometryConfig {
  std::string topology = "box";
  int m = 1;
  std::vector<int> nodes{17};
  std::vector<double> lengths{2.0};
  bool operator==(const GeometryConfig&) const = default;
};

struct EquationConfig {
  std::string family = "log_sigma";
  int k = 1;
  int l = 0;
  bool operator==(const EquationConfig&) const = default;
};

struct DataConfig {
  FieldSpec h;
  FieldSpec phi;
  FormSpec chi{FormSpec::Kind::Scale, 0.0, {}};
  FormSpec omega;
  std::string gradient = "none";
  std::vector<double> one_form;  ///< re, im pairs, one per complex direction
  FieldSpec exact;
  FieldSpec subsolution;
  bool operator==(const DataConfig&) const = default;
};

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 50;
  int path_steps = 20;
  double min_dt = 1e-4;
  bool strict_precondition = false;
  double linear_tol = 1e-12;
  bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  std::string report = "report.json";
  bool fields = false;
  int verbosity = 1;
  bool operator==(const OutputConfig&) const = default;
};

struct CheckConfig {
  std::string kind = "c_subsolution";
  bool operator==(const CheckConfig&) const = default;
};

struct LeviConfig {
  std::string domain = "ball";
  double radius = 1.0;
  int power = 4;
  std::string polynomial;
  std::vector<double> point;  ///< real coordinates x1, y1, ...; empty picks a default point
  bool project = true;
  bool operator==(const LeviConfig&) const = default;
};

struct VerifyConfig {
  int samples = 1000;
  bool operator==(const VerifyConfig&) const = default;
};

struct CalibrateConfig {
  double level = 0.0;
  int samples = 200;
  double delta = 0.1;
  double radius = 10.0;
  std::vector<double> mu;
  bool operator==(const CalibrateConfig&) const = default;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> c{"solve-dirichlet", "solve-closed", "check-subsolution",
                                          "verify",          "levi",         "calibrate-cone"};
  return c;
}

struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  GeometryConfig geometry;
  EquationConfig equation;
  DataConfig data;
  SolverConfig solver;
  OutputConfig output;
  CheckConfig check;
  LeviConfig levi;
  VerifyConfig verify;
  CalibrateConfig calibrate;
  bool operator==(const RunConfig&) const = default;

  SymmetricFunctionSpec spec() const {
    if (equation.family == "log_sigma") return SymmetricFunctionSpec::log_sigma(geometry.m, equation.k);
    if (equation.family == "quotient_sigma")
      return SymmetricFunctionSpec::quotient_sigma(geometry.m, equation.k, equation.l);
    return SymmetricFunctionSpec::log_quotient_t(geometry.m, equation.k, equation.l);
  }
};

/// One problem found while reading a config; path is "section.key".
struct ConfigDiagnostic {
  ErrorCode code = ErrorCode::ParseError;
  std::string path;
  int line = 0;
  int column = 0;
  std::string message;

  std::string describe() const {
    std::string out = std::string(to_string(code));
    if (line > 0) out += " at " + std::to_string(line) + ":" + std::to_string(column);
    if (!path.empty()) out += " (" + path + ")";
    return out + ": " + message;
  }
};

/// Thrown with every diagnostic of a config, not only the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigDiagnostic> d)
      : Error(d.empty() ? ErrorCode::ValidationError : d.front().code, join(d)), diagnostics_(std::move(d)) {}
  const std::vector<ConfigDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string join(const std::vector<ConfigDiagnostic>& d) {
    std::string s = std::to_string(d.size()) + " config error(s)";
    for (const auto& x : d) s += "\n  " + x.describe();
    return s;
  }
  std::vector<ConfigDiagnostic> diagnostics_;
};

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Closest candidate, or empty when nothing is within half the word length.
inline std::string nearest_name(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d < best_d) best_d = d, best = c;
  }
  if (best.empty() || best_d > std::max<std::size_t>(2, word.size() / 2)) return {};
  return best;
}

namespace config_detail {

struct RawValue {
  std::string text;  ///< unquoted scalar text
  bool quoted = false;
  bool array = false;
  std::vector<RawValue> items;
  int line = 0;
  int column = 0;
};

struct RawEntry {
  std::string section;
  std::string key;
  RawValue value;
};

class Cursor {
 public:
  Cursor(const std::string& s, int line) : s_(s), line_(line) {}
  bool done() const { return i_ >= s_.size() || s_[i_] == '#'; }
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) ++i_;
  }
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  char get() { return s_[i_++]; }
  int column() const { return static_cast<int>(i_) + 1; }
  int line() const { return line_; }

 private:
  const std::string& s_;
  std::size_t i_ = 0;
  int line_;
};

inline std::optional<RawValue> read_scalar(Cursor& c, bool in_array, std::vector<ConfigDiagnostic>& errs) {
  RawValue v;
  v.line = c.line();
  v.column = c.column();
  if (c.peek() == '"') {
    c.get();
    v.quoted = true;
    for (;;) {
      if (c.peek() == '\0') {
        errs.push_back({ErrorCode::ParseError, {}, v.line, v.column, "unterminated string"});
        return std::nullopt;
      }
      char ch = c.get();
      if (ch == '"') break;
      if (ch == '\\') {
        if (c.peek() == '\0') continue;
        const char e = c.get();
        ch = e == 'n' ? '\n' : e == 't' ? '\t' : e;
      }
      v.text += ch;
    }
    return v;
  }
  while (!c.done() && !(in_array && (c.peek() == ',' || c.peek() == ']'))) v.text += c.get();
  v.text = detail::trim(v.text);
  if (v.text.empty()) {
    errs.push_back({ErrorCode::ParseError, {}, v.line, v.column, "missing value"});
    return std::nullopt;
  }
  return v;
}

inline std::optional<RawValue> read_value(Cursor& c, std::vector<ConfigDiagnostic>& errs) {
  c.skip_ws();
  if (c.peek() != '[') return read_scalar(c, false, errs);
  RawValue v;
  v.array = true;
  v.line = c.line();
  v.column = c.column();
  c.get();
  c.skip_ws();
  if (c.peek() == ']') {
    c.get();
    return v;
  }
  for (;;) {
    c.skip_ws();
    auto item = read_scalar(c, true, errs);
    if (!item) return std::nullopt;
    v.items.push_back(*item);
    c.skip_ws();
    if (c.peek() == ',') {
      c.get();
      continue;
    }
    if (c.peek() == ']') {
      c.get();
      return v;
    }
    errs.push_back({ErrorCode::ParseError, {}, c.line(), c.column(), "expected ',' or ']' in array"});
    return std::nullopt;
  }
}

inline bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
  });
}

inline std::vector<RawEntry> tokenize(const std::string& text, std::vector<ConfigDiagnostic>& errs) {
  std::vector<RawEntry> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    Cursor c(line, lineno);
    c.skip_ws();
    if (c.done()) continue;
    if (c.peek() == '[') {
      const int col = c.column();
      c.get();
      std::string name;
      while (!c.done() && c.peek() != ']') name += c.get();
      if (c.peek() != ']') {
        errs.push_back({ErrorCode::ParseError, {}, lineno, col, "unterminated section header"});
        continue;
      }
      c.get();
      c.skip_ws();
      name = detail::trim(name);
      if (!valid_name(name)) {
        errs.push_back({ErrorCode::ParseError, {}, lineno, col, "invalid section name '" + name + "'"});
        continue;
      }
      if (!c.done()) errs.push_back({ErrorCode::ParseError, {}, lineno, c.column(), "unexpected text after section"});
      section = name;
      continue;
    }
    const int key_col = c.column();
    std::string key;
    while (!c.done() && c.peek() != '=') key += c.get();
    if (c.peek() != '=') {
      errs.push_back({ErrorCode::ParseError, {}, lineno, key_col, "expected 'key = value'"});
      continue;
    }
    c.get();
    key = detail::trim(key);
    if (!valid_name(key)) {
      errs.push_back({ErrorCode::ParseError, {}, lineno, key_col, "invalid key '" + key + "'"});
      continue;
    }
    auto value = read_value(c, errs);
    if (!value) continue;
    c.skip_ws();
    if (!c.done()) {
      errs.push_back({ErrorCode::ParseError, {}, lineno, c.column(), "unexpected text after value"});
      continue;
    }
    out.push_back({section, key, *value});
  }
  return out;
}

/// Collects diagnostics while converting raw values into typed fields.
class Reader {
 public:
  Reader(std::vector<ConfigDiagnostic>& errs, std::filesystem::path base) : errs_(errs), base_(std::move(base)) {}

  void error(ErrorCode code, const std::string& path, const RawValue* v, const std::string& msg) {
    errs_.push_back({code, path, v ? v->line : 0, v ? v->column : 0, msg});
  }

  bool scalar(const std::string& path, const RawValue& v) {
    if (!v.array) return true;
    error(ErrorCode::ValidationError, path, &v, "expected a single value, got an array");
    return false;
  }

  void to_int(const std::string& path, const RawValue& v, int& out) {
    if (!scalar(path, v)) return;
    int x = 0;
    auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
    if (ec != std::errc() || p != v.text.data() + v.text.size())
      return error(ErrorCode::ValidationError, path, &v, "expected an integer, got '" + v.text + "'");
    out = x;
  }

  void to_u64(const std::string& path, const RawValue& v, std::uint64_t& out) {
    if (!scalar(path, v)) return;
    std::uint64_t x = 0;
    auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
    if (ec != std::errc() || p != v.text.data() + v.text.size())
      return error(ErrorCode::ValidationError, path, &v, "expected a non-negative integer, got '" + v.text + "'");
    out = x;
  }

  void to_double(const std::string& path, const RawValue& v, double& out) {
    if (!scalar(path, v)) return;
    try {
      out = detail::parse_double(v.text);
      if (!std::isfinite(out)) error(ErrorCode::ValidationError, path, &v, "value must be finite");
    } catch (const Error&) {
      error(ErrorCode::ValidationError, path, &v, "expected a number, got '" + v.text + "'");
    }
  }

  void to_bool(const std::string& path, const RawValue& v, bool& out) {
    if (!scalar(path, v)) return;
    if (v.text == "true") out = true;
    else if (v.text == "false") out = false;
    else error(ErrorCode::ValidationError, path, &v, "expected true or false, got '" + v.text + "'");
  }

  void to_text(const std::string& path, const RawValue& v, std::string& out) {
    if (scalar(path, v)) out = v.text;
  }

  void to_choice(const std::string& path, const RawValue& v, const std::vector<std::string>& allowed, std::string& out) {
    if (!scalar(path, v)) return;
    if (std::find(allowed.begin(), allowed.end(), v.text) != allowed.end()) {
      out = v.text;
      return;
    }
    std::string msg = "invalid value '" + v.text + "'; expected one of";
    for (const auto& a : allowed) msg += " " + a;
    const std::string near = nearest_name(v.text, allowed);
    if (!near.empty()) msg += " (did you mean '" + near + "'?)";
    error(ErrorCode::ValidationError, path, &v, msg);
  }

  template <class T>
  void to_array(const std::string& path, const RawValue& v, std::vector<T>& out) {
    std::vector<RawValue> items = v.array ? v.items : std::vector<RawValue>{v};
    std::vector<T> tmp;
    const std::size_t before = errs_.size();
    for (const auto& it : items) {
      T x{};
      if constexpr (std::is_same_v<T, int>) to_int(path, it, x);
      else to_double(path, it, x);
      tmp.push_back(x);
    }
    if (errs_.size() == before) out = std::move(tmp);
  }

  /// "file(path)" -> path, else nullopt.
  static std::optional<std::string> file_argument(const std::string& t) {
    if (t.rfind("file(", 0) != 0 || t.back() != ')') return std::nullopt;
    return detail::trim(t.substr(5, t.size() - 6));
  }

  void check_file(const std::string& path, const RawValue& v, std::string& file) {
    std::filesystem::path p(file);
    if (p.is_relative()) p = base_ / p;
    file = p.lexically_normal().string();
    if (!std::filesystem::is_regular_file(p)) error(ErrorCode::IoError, path, &v, "file not found: " + file);
  }

  void to_field(const std::string& path, const RawValue& v, FieldSpec& out) {
    if (!scalar(path, v)) return;
    const std::string t = detail::trim(v.text);
    if (auto f = file_argument(t)) {
      out = {FieldSpec::Kind::File, {}, *f};
      check_file(path, v, out.path);
      return;
    }
    if (t == "manufactured") {
      out = {FieldSpec::Kind::Manufactured, {}, {}};
      return;
    }
    if (t.empty() || t == "none") {
      out = {};
      return;
    }
    try {
      double c = 0.0;
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), c);
      if (ec == std::errc() && p == t.data() + t.size()) out = {FieldSpec::Kind::Expression, {{{"const", {c}}}}, {}};
      else out = FieldSpec::expression(t);
    } catch (const Error& e) {
      error(ErrorCode::ValidationError, path, &v, e.what());
    }
  }

  void to_form(const std::string& path, const RawValue& v, FormSpec& out) {
    if (!scalar(path, v)) return;
    const std::string t = detail::trim(v.text);
    if (auto f = file_argument(t)) {
      out = {FormSpec::Kind::File, 0.0, *f};
      check_file(path, v, out.path);
      return;
    }
    if (t == "identity") {
      out = {FormSpec::Kind::Scale, 1.0, {}};
      return;
    }
    double s = 0.0;
    to_double(path, v, s);
    out = {FormSpec::Kind::Scale, s, {}};
  }

 private:
  std::vector<ConfigDiagnostic>& errs_;
  std::filesystem::path base_;
};

using Setter = std::function<void(Reader&, const std::string&, const RawValue&, RunConfig&)>;

struct KeySpec {
  std::string section;
  std::string key;
  Setter set;
};

inline const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = [] {
    std::vector<KeySpec> k;
    auto add = [&](std::string sec, std::string key, Setter f) { k.push_back({std::move(sec), std::move(key), f}); };
    add("", "command", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_choice(p, v, command_names(), c.command); });
    add("", "seed", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_u64(p, v, c.seed); });
    add("geometry", "topology",
        [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_choice(p, v, {"box", "torus"}, c.geometry.topology); });
    add("geometry", "m", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.geometry.m); });
    add("geometry", "nodes", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_array(p, v, c.geometry.nodes); });
    add("geometry", "lengths", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_array(p, v, c.geometry.lengths); });
    add("equation", "family", [](Reader& r, auto& p, auto& v, RunConfig& c) {
      r.to_choice(p, v, {"log_sigma", "quotient_sigma", "log_quotient_t"}, c.equation.family);
    });
    add("equation", "k", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.equation.k); });
    add("equation", "l", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.equation.l); });
    add("data", "h", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_field(p, v, c.data.h); });
    add("data", "phi", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_field(p, v, c.data.phi); });
    add("data", "chi", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_form(p, v, c.data.chi); });
    add("data", "omega", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_form(p, v, c.data.omega); });
    add("data", "gradient",
        [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_choice(p, v, {"none", "one_form"}, c.data.gradient); });
    add("data", "one_form", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_array(p, v, c.data.one_form); });
    add("data", "exact", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_field(p, v, c.data.exact); });
    add("data", "subsolution", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_field(p, v, c.data.subsolution); });
    add("solver", "tol", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_double(p, v, c.solver.tol); });
    add("solver", "max_iter", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.solver.max_iter); });
    add("solver", "path_steps", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.solver.path_steps); });
    add("solver", "min_dt", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_double(p, v, c.solver.min_dt); });
    add("solver", "strict_precondition",
        [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_bool(p, v, c.solver.strict_precondition); });
    add("solver", "linear_tol", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_double(p, v, c.solver.linear_tol); });
    add("output", "dir", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_text(p, v, c.output.dir); });
    add("output", "report", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_text(p, v, c.output.report); });
    add("output", "fields", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_bool(p, v, c.output.fields); });
    add("output", "verbosity", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.output.verbosity); });
    add("check", "kind", [](Reader& r, auto& p, auto& v, RunConfig& c) {
      r.to_choice(p, v, {"c_subsolution", "admissible", "path"}, c.check.kind);
    });
    add("levi", "domain", [](Reader& r, auto& p, auto& v, RunConfig& c) {
      r.to_choice(p, v, {"ball", "polydisc", "half_space", "polynomial"}, c.levi.domain);
    });
    add("levi", "radius", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_double(p, v, c.levi.radius); });
    add("levi", "power", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.levi.power); });
    add("levi", "polynomial", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_text(p, v, c.levi.polynomial); });
    add("levi", "point", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_array(p, v, c.levi.point); });
    add("levi", "project", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_bool(p, v, c.levi.project); });
    add("verify", "samples", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.verify.samples); });
    add("calibrate", "level", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_double(p, v, c.calibrate.level); });
    add("calibrate", "samples", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_int(p, v, c.calibrate.samples); });
    add("calibrate", "delta", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_double(p, v, c.calibrate.delta); });
    add("calibrate", "radius", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_double(p, v, c.calibrate.radius); });
    add("calibrate", "mu", [](Reader& r, auto& p, auto& v, RunConfig& c) { r.to_array(p, v, c.calibrate.mu); });
    return k;
  }();
  return s;
}

inline std::string key_path(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

/// Cross-field checks; runs after every key has been read.
inline void validate(const RunConfig& c, std::vector<ConfigDiagnostic>& errs) {
  auto err = [&](const std::string& path, const std::string& msg) {
    errs.push_back({ErrorCode::ValidationError, path, 0, 0, msg});
  };
  const int m = c.geometry.m;
  if (m < 1 || m > kMaxGridDim) err("geometry.m", "m must satisfy 1 <= m <= " + std::to_string(kMaxGridDim));
  const std::size_t axes = 2 * static_cast<std::size_t>(std::max(m, 1));
  if (c.geometry.nodes.size() != 1 && c.geometry.nodes.size() != axes)
    err("geometry.nodes", "expected 1 or 2m = " + std::to_string(axes) + " entries");
  for (int n : c.geometry.nodes)
    if (n < 8) err("geometry.nodes", "every axis needs at least 8 nodes");
  if (c.geometry.lengths.size() != 1 && c.geometry.lengths.size() != axes)
    err("geometry.lengths", "expected 1 or 2m = " + std::to_string(axes) + " entries");
  for (double l : c.geometry.lengths)
    if (!(l > 0.0)) err("geometry.lengths", "lengths must be positive");

  const auto& e = c.equation;
  if (e.family == "log_sigma") {
    if (!(1 <= e.k && e.k <= m)) err("equation.k", "log_sigma needs 1 <= k <= m");
    if (e.l != 0) err("equation.l", "log_sigma takes no l; leave it at 0");
  } else {
    if (!(0 <= e.l && e.l < e.k && e.k <= m))
      err("equation", "(k, l) = (" + std::to_string(e.k) + ", " + std::to_string(e.l) +
                          ") violates 0 <= l < k <= m with m = " + std::to_string(m));
    if (e.family == "log_quotient_t" && m < 2) err("equation.family", "log_quotient_t needs m >= 2");
  }

  const auto& d = c.data;
  if (d.gradient == "one_form" && d.one_form.size() != axes)
    err("data.one_form", "expected 2m = " + std::to_string(axes) + " entries (re, im per direction)");
  if (d.gradient == "none" && !d.one_form.empty()) err("data.one_form", "set gradient = one_form to use coefficients");
  if (d.omega.kind == FormSpec::Kind::Scale && !(d.omega.scale > 0.0)) err("data.omega", "metric scale must be positive");
  if ((d.h.kind == FieldSpec::Kind::Manufactured || d.phi.kind == FieldSpec::Kind::Manufactured) && d.exact.empty())
    err("data.exact", "manufactured data needs an exact solution");
  if (d.exact.kind == FieldSpec::Kind::Manufactured || d.subsolution.kind == FieldSpec::Kind::Manufactured)
    err("data", "only h and phi may be manufactured");

  if (c.solver.tol <= 0.0) err("solver.tol", "tolerance must be positive");
  if (c.solver.max_iter < 1) err("solver.max_iter", "needs at least one iteration");
  if (c.solver.path_steps < 1) err("solver.path_steps", "needs at least one step");
  if (!(c.solver.min_dt > 0.0 && c.solver.min_dt < 1.0)) err("solver.min_dt", "must lie in (0, 1)");
  if (!(c.solver.linear_tol > 0.0)) err("solver.linear_tol", "tolerance must be positive");
  if (c.output.report.empty()) err("output.report", "report name must not be empty");

  const auto& cmd = c.command;
  if (cmd == "solve-dirichlet" || cmd == "solve-closed" || cmd == "check-subsolution") {
    if (d.h.empty()) err("data.h", "the command needs a right-hand side");
  }
  if (cmd == "solve-dirichlet") {
    if (c.geometry.topology != "box") err("geometry.topology", "solve-dirichlet needs topology = box");
    if (d.subsolution.empty()) err("data.subsolution", "solve-dirichlet starts from a subsolution");
  }
  if (cmd == "solve-closed" && c.geometry.topology != "torus")
    err("geometry.topology", "solve-closed needs topology = torus");
  if (cmd == "check-subsolution") {
    if (c.check.kind != "path" && d.subsolution.empty()) err("data.subsolution", "nothing to check");
    if (c.check.kind == "path" && (m < 2 || e.family == "log_sigma"))
      err("check.kind", "the path check needs a quotient family with m >= 2");
  }
  if (cmd == "levi") {
    if (!c.levi.point.empty() && c.levi.point.size() != axes)
      err("levi.point", "expected 2m = " + std::to_string(axes) + " coordinates");
    if (c.levi.domain == "polynomial" && c.levi.polynomial.empty()) err("levi.polynomial", "polynomial text missing");
    if (!(c.levi.radius > 0.0)) err("levi.radius", "radius must be positive");
    if (c.levi.power < 2) err("levi.power", "power must be at least 2");
  }
  if (cmd == "verify" && c.verify.samples < 1) err("verify.samples", "needs at least one sample");
  if (cmd == "calibrate-cone") {
    if (c.calibrate.samples < 1) err("calibrate.samples", "needs at least one sample");
    if (!(c.calibrate.delta > 0.0)) err("calibrate.delta", "delta must be positive");
    if (!(c.calibrate.radius > 0.0)) err("calibrate.radius", "radius must be positive");
    if (!c.calibrate.mu.empty() && c.calibrate.mu.size() != static_cast<std::size_t>(m))
      err("calibrate.mu", "expected m = " + std::to_string(m) + " entries");
  }
}

}  // namespace config_detail

struct ConfigParse {
  std::optional<RunConfig> config;
  std::vector<ConfigDiagnostic> diagnostics;
};

/// Parses and validates; every problem is collected. Relative file paths resolve against base_dir.
/// A command given here (from the command line) must agree with the one in the text, if any.
inline ConfigParse parse_config_collect(const std::string& text, const std::filesystem::path& base_dir = ".",
                                        const std::optional<std::string>& command = std::nullopt) {
  using namespace config_detail;
  ConfigParse out;
  auto& errs = out.diagnostics;
  const std::vector<RawEntry> entries = tokenize(text, errs);
  RunConfig cfg;
  Reader reader(errs, base_dir);
  std::vector<std::string> seen, sections;
  for (const auto& k : schema())
    if (std::find(sections.begin(), sections.end(), k.section) == sections.end()) sections.push_back(k.section);
  for (const auto& e : entries) {
    const std::string path = key_path(e.section, e.key);
    if (std::find(seen.begin(), seen.end(), path) != seen.end()) {
      errs.push_back({ErrorCode::ParseError, path, e.value.line, e.value.column, "duplicate key"});
      continue;
    }
    seen.push_back(path);
    if (std::find(sections.begin(), sections.end(), e.section) == sections.end()) {
      std::string msg = "unknown section [" + e.section + "]";
      const std::string near = nearest_name(e.section, sections);
      if (!near.empty()) msg += "; did you mean [" + near + "]?";
      errs.push_back({ErrorCode::ValidationError, path, e.value.line, 1, msg});
      continue;
    }
    const KeySpec* spec = nullptr;
    std::vector<std::string> keys;
    for (const auto& k : schema()) {
      if (k.section != e.section) continue;
      keys.push_back(k.key);
      if (k.key == e.key) spec = &k;
    }
    if (!spec) {
      std::string msg = "unknown key '" + e.key + "'";
      const std::string near = nearest_name(e.key, keys);
      if (!near.empty()) msg += "; did you mean '" + key_path(e.section, near) + "'?";
      errs.push_back({ErrorCode::ValidationError, path, e.value.line, 1, msg});
      continue;
    }
    spec->set(reader, path, e.value, cfg);
  }
  if (command) {
    if (!cfg.command.empty() && cfg.command != *command)
      errs.push_back({ErrorCode::ValidationError, "command", 0, 0,
                      "config is for '" + cfg.command + "' but '" + *command + "' was requested"});
    cfg.command = *command;
  }
  validate(cfg, errs);
  if (errs.empty()) out.config = std::move(cfg);
  return out;
}

inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".",
                              const std::optional<std::string>& command = std::nullopt) {
  ConfigParse p = parse_config_collect(text, base_dir, command);
  if (!p.config) throw ConfigError(std::move(p.diagnostics));
  return *p.config;
}

inline RunConfig load_config(const std::string& path, const std::optional<std::string>& command = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{ErrorCode::IoError, {}, 0, 0, "cannot open config file " + path}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path(), command);
}

inline std::string to_text(const FieldSpec& f) {
  switch (f.kind) {
    case FieldSpec::Kind::File: return "file(" + f.path + ")";
    case FieldSpec::Kind::Manufactured: return "manufactured";
    case FieldSpec::Kind::Expression: return f.expr.terms.empty() ? "none" : to_string(f.expr);
  }
  return {};
}

inline std::string to_text(const FormSpec& f) {
  return f.kind == FormSpec::Kind::File ? "file(" + f.path + ")" : detail::format_double(f.scale);
}

/// Canonical text; parse_config(to_text(c)) == c.
inline std::string to_text(const RunConfig& c) {
  auto q = [](const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') out += '\\';
      if (ch == '\n') {
        out += "\\n";
        continue;
      }
      out += ch;
    }
    return out + "\"";
  };
  auto num = [](double v) { return detail::format_double(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  auto arr = [](const auto& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, double>) out += detail::format_double(v[i]);
      else out += std::to_string(v[i]);
    }
    return out + "]";
  };
  std::ostringstream os;
  if (!c.command.empty()) os << "command = " << c.command << '\n';
  os << "seed = " << c.seed << "\n\n[geometry]\n"
     << "topology = " << c.geometry.topology << "\nm = " << c.geometry.m << "\nnodes = " << arr(c.geometry.nodes)
     << "\nlengths = " << arr(c.geometry.lengths) << "\n\n[equation]\n"
     << "family = " << c.equation.family << "\nk = " << c.equation.k << "\nl = " << c.equation.l << "\n\n[data]\n"
     << "h = " << q(to_text(c.data.h)) << "\nphi = " << q(to_text(c.data.phi)) << "\nchi = " << q(to_text(c.data.chi))
     << "\nomega = " << q(to_text(c.data.omega)) << "\ngradient = " << c.data.gradient
     << "\none_form = " << arr(c.data.one_form) << "\nexact = " << q(to_text(c.data.exact))
     << "\nsubsolution = " << q(to_text(c.data.subsolution)) << "\n\n[solver]\n"
     << "tol = " << num(c.solver.tol) << "\nmax_iter = " << c.solver.max_iter << "\npath_steps = " << c.solver.path_steps
     << "\nmin_dt = " << num(c.solver.min_dt) << "\nstrict_precondition = " << b(c.solver.strict_precondition)
     << "\nlinear_tol = " << num(c.solver.linear_tol) << "\n\n[output]\n"
     << "dir = " << q(c.output.dir) << "\nreport = " << q(c.output.report) << "\nfields = " << b(c.output.fields)
     << "\nverbosity = " << c.output.verbosity << "\n\n[check]\nkind = " << c.check.kind << "\n\n[levi]\n"
     << "domain = " << c.levi.domain << "\nradius = " << num(c.levi.radius) << "\npower = " << c.levi.power
     << "\npolynomial = " << q(c.levi.polynomial) << "\npoint = " << arr(c.levi.point)
     << "\nproject = " << b(c.levi.project) << "\n\n[verify]\nsamples = " << c.verify.samples << "\n\n[calibrate]\n"
     << "level = " << num(c.calibrate.level) << "\nsamples = " << c.calibrate.samples
     << "\ndelta = " << num(c.calibrate.delta) << "\nradius = " << num(c.calibrate.radius)
     << "\nmu = " << arr(c.calibrate.mu) << '\n';
  return os.str();
}

}  // namespace chq
