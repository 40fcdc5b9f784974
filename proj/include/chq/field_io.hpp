#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "chq/field.hpp"

namespace chq {

namespace csv {

inline void put(std::ostream& os, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, ptr - buf);
}

inline double get(const std::string& tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(ErrorCode::IoError, "bad number '" + tok + "'");
  return v;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>) {
      put(os, v[i]);
    } else {
      os << v[i];
    }
  }
  return os.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline void write_header(std::ostream& os, const GridGeometry& geo, const std::string& kind) {
  os << "# m=" << geo.m() << " topology=" << topology_name(geo.topology()) << " nodes=" << join(geo.nodes())
     << " lengths=" << join(geo.lengths()) << " origin=" << join(geo.origin()) << " kind=" << kind << '\n';
}

inline void write_coords(std::ostream& os, const GridGeometry& geo, std::size_t idx) {
  const NodeCoords c = geo.coords(idx);
  for (int a = 0; a < geo.axes(); ++a) os << c[a] << ',';
}

struct Header {
  GridGeometry geo;
  std::string kind;
};

inline Header read_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) fail(ErrorCode::IoError, "missing field header");
  std::map<std::string, std::string> kv;
  std::stringstream ss(line.substr(2));
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) fail(ErrorCode::IoError, "bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"m", "topology", "nodes", "lengths", "origin", "kind"})
    if (!kv.count(key)) fail(ErrorCode::IoError, std::string("header lacks '") + key + "'");
  const int m = std::stoi(kv["m"]);
  std::vector<int> nodes;
  for (const auto& s : split(kv["nodes"], ',')) nodes.push_back(std::stoi(s));
  std::vector<double> lengths, origin;
  for (const auto& s : split(kv["lengths"], ',')) lengths.push_back(get(s));
  for (const auto& s : split(kv["origin"], ',')) origin.push_back(get(s));
  Header h;
  if (kv["topology"] == "box") {
    h.geo = GridGeometry::box(m, nodes, lengths, origin);
  } else if (kv["topology"] == "torus") {
    h.geo = GridGeometry::torus(m, nodes, lengths, origin);
  } else {
    fail(ErrorCode::IoError, "unknown topology '" + kv["topology"] + "'");
  }
  h.kind = kv["kind"];
  return h;
}

/// Reads the remaining rows; returns the value columns per node.
inline std::vector<std::vector<double>> read_rows(std::istream& is, const GridGeometry& geo, std::size_t ncols) {
  std::vector<std::vector<double>> rows(geo.size());
  std::vector<bool> seen(geo.size(), false);
  std::string line;
  std::size_t count = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tok = split(line, ',');
    if (tok.size() != static_cast<std::size_t>(geo.axes()) + ncols) fail(ErrorCode::IoError, "wrong column count");
    NodeCoords c{};
    for (int a = 0; a < geo.axes(); ++a) {
      c[a] = std::stoi(tok[a]);
      if (c[a] < 0 || c[a] >= geo.nodes()[a]) fail(ErrorCode::IoError, "node coordinate out of range");
    }
    const std::size_t idx = geo.index(c);
    if (seen[idx]) fail(ErrorCode::IoError, "duplicate node row");
    seen[idx] = true;
    for (std::size_t k = 0; k < ncols; ++k) rows[idx].push_back(get(tok[geo.axes() + k]));
    ++count;
  }
  if (count != geo.size()) fail(ErrorCode::IoError, "field file does not cover every node");
  return rows;
}

}  // namespace csv

inline void write_scalar_csv(std::ostream& os, const GridGeometry& geo, const ScalarField& f) {
  if (f.size() != geo.size()) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  csv::write_header(os, geo, "scalar");
  for (std::size_t i = 0; i < geo.size(); ++i) {
    csv::write_coords(os, geo, i);
    csv::put(os, f[i]);
    os << '\n';
  }
}

inline void write_form_csv(std::ostream& os, const GridGeometry& geo, const HermitianFormField& f) {
  if (f.size() != geo.size()) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  csv::write_header(os, geo, "form");
  const int m = geo.m();
  for (std::size_t i = 0; i < geo.size(); ++i) {
    csv::write_coords(os, geo, i);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        csv::put(os, f[i](r, c).real());
        os << ',';
        csv::put(os, f[i](r, c).imag());
        if (r != m - 1 || c != m - 1) os << ',';
      }
    os << '\n';
  }
}

struct LoadedScalarField {
  GridGeometry geo;
  ScalarField values;
};

struct LoadedFormField {
  GridGeometry geo;
  HermitianFormField values;
};

inline LoadedScalarField read_scalar_csv(std::istream& is) {
  auto h = csv::read_header(is);
  if (h.kind != "scalar") fail(ErrorCode::IoError, "expected a scalar field");
  auto rows = csv::read_rows(is, h.geo, 1);
  LoadedScalarField out{h.geo, ScalarField(h.geo.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) out.values[i] = rows[i][0];
  return out;
}

inline LoadedFormField read_form_csv(std::istream& is) {
  auto h = csv::read_header(is);
  if (h.kind != "form") fail(ErrorCode::IoError, "expected a form field");
  const int m = h.geo.m();
  auto rows = csv::read_rows(is, h.geo, static_cast<std::size_t>(2 * m * m));
  std::vector<CMat> mats(h.geo.size(), CMat(m, m));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) mats[i](r, c) = cplx(rows[i][2 * (r * m + c)], rows[i][2 * (r * m + c) + 1]);
  return LoadedFormField{h.geo, HermitianFormField::per_node(std::move(mats))};
}

inline void save_scalar_csv(const std::string& path, const GridGeometry& geo, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot write " + path);
  write_scalar_csv(os, geo, f);
}

inline LoadedScalarField load_scalar_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot read " + path);
  return read_scalar_csv(is);
}

inline void save_form_csv(const std::string& path, const GridGeometry& geo, const HermitianFormField& f) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot write " + path);
  write_form_csv(os, geo, f);
}

inline LoadedFormField load_form_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot read " + path);
  return read_form_csv(is);
}

}  // namespace chq
