#pragma once

#include <optional>
#include <vector>

#include "chq/grid.hpp"
#include "chq/hermitian.hpp"

namespace chq {

/// Per-node real values (u, h, boundary data, residuals).
using ScalarField = std::vector<double>;

/// Per-node complex matrices; a uniform field stores a single value.
class HermitianFormField {
 public:
  HermitianFormField() = default;
  static HermitianFormField uniform(const CMat& v, std::size_t nodes) {
    HermitianFormField f;
    f.values_.push_back(v);
    f.nodes_ = nodes;
    return f;
  }
  static HermitianFormField per_node(std::vector<CMat> v) {
    HermitianFormField f;
    f.nodes_ = v.size();
    f.values_ = std::move(v);
    return f;
  }

  bool is_uniform() const { return values_.size() == 1; }
  std::size_t size() const { return nodes_; }
  int dim() const { return values_.empty() ? 0 : static_cast<int>(values_.front().rows()); }
  const CMat& operator[](std::size_t i) const { return values_.size() == 1 ? values_.front() : values_[i]; }
  CMat& mutable_at(std::size_t i) { return values_[i]; }
  const std::vector<CMat>& storage() const { return values_; }

 private:
  std::vector<CMat> values_;
  std::size_t nodes_ = 0;
};

/// Per-node positive-definite metric with cached factorizations.
class MetricField {
 public:
  MetricField() = default;
  explicit MetricField(const HermitianFormField& f) : nodes_(f.size()) {
    for (const CMat& g : f.storage()) metrics_.emplace_back(g);
  }
  static MetricField identity(int m, std::size_t nodes) {
    return MetricField(HermitianFormField::uniform(CMat::Identity(m, m), nodes));
  }
  bool is_uniform() const { return metrics_.size() == 1; }
  std::size_t size() const { return nodes_; }
  const Metric& operator[](std::size_t i) const { return metrics_.size() == 1 ? metrics_.front() : metrics_[i]; }
  HermitianFormField as_form_field() const {
    std::vector<CMat> v;
    for (const Metric& g : metrics_) v.push_back(g.matrix());
    return v.size() == 1 ? HermitianFormField::uniform(v.front(), nodes_) : HermitianFormField::per_node(v);
  }

 private:
  std::vector<Metric> metrics_;
  std::size_t nodes_ = 0;
};

/// First-order coefficient tensor: W^p_{i j-bar} = w[p](i, j).
struct WTensor {
  std::vector<CMat> w;

  int dim() const { return static_cast<int>(w.size()); }
  static WTensor zero(int m) { return WTensor{std::vector<CMat>(m, CMat::Zero(m, m))}; }

  /// W_{i j-bar}(du) = W^p_{i j-bar} d_p u + conj(W^p_{j i-bar}) conj(d_p u).
  CMat apply(const CVec& du) const {
    const int m = dim();
    CMat out = CMat::Zero(m, m);
    for (int p = 0; p < m; ++p) out += w[p] * du(p) + w[p].adjoint() * std::conj(du(p));
    return out;
  }
};

/// P_g(theta) = ((tr_g theta) g - theta) / (m - 1), for any (not necessarily Hermitian) theta.
inline CMat p_omega(const CMat& theta, const Metric& g) {
  const int m = g.dim();
  if (m < 2) fail(ErrorCode::DimensionTooSmall, "P_omega needs m >= 2");
  const cplx tr = (g.inverse() * theta).trace();
  return (tr * g.matrix() - theta) / static_cast<double>(m - 1);
}

/// Z^p = P_g(W^p).
inline WTensor w_to_z(const WTensor& w, const Metric& g) {
  if (g.dim() < 2) fail(ErrorCode::DimensionTooSmall, "W/Z conversion needs m >= 2");
  WTensor z;
  for (const CMat& wp : w.w) z.w.push_back(p_omega(wp, g));
  return z;
}

/// W^p = (tr_g Z^p) g - (m - 1) Z^p.
inline WTensor z_to_w(const WTensor& z, const Metric& g) {
  const int m = g.dim();
  if (m < 2) fail(ErrorCode::DimensionTooSmall, "W/Z conversion needs m >= 2");
  WTensor w;
  for (const CMat& zp : z.w) w.w.push_back((g.inverse() * zp).trace() * g.matrix() - static_cast<double>(m - 1) * zp);
  return w;
}

/// W tensor of the one-form family: W^p_{i j-bar} = conj(a_j) delta_{ip}.
inline WTensor one_form_w(const CVec& a) {
  const int m = static_cast<int>(a.size());
  WTensor w = WTensor::zero(m);
  for (int p = 0; p < m; ++p)
    for (int j = 0; j < m; ++j) w.w[p](p, j) = std::conj(a(j));
  return w;
}

/// Z tensor of the one-form family on flat g: (conj(a_p) delta_ij - conj(a_j) delta_ip) / (m - 1).
inline WTensor one_form_z(const CVec& a) {
  const int m = static_cast<int>(a.size());
  if (m < 2) fail(ErrorCode::DimensionTooSmall, "one-form Z needs m >= 2");
  WTensor z = WTensor::zero(m);
  for (int p = 0; p < m; ++p)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        z.w[p](i, j) = ((i == j ? std::conj(a(p)) : 0.0) - (i == p ? std::conj(a(j)) : 0.0)) / double(m - 1);
  return z;
}

enum class GradientKind { None, ZStructured, OneForm };

/// The W(du) structure of a problem.
struct GradientTermSpec {
  GradientKind kind = GradientKind::None;
  std::vector<WTensor> w;  ///< one entry (uniform) or one per node
  std::vector<WTensor> z;  ///< Z tensors when kind == ZStructured
  std::vector<CVec> a;     ///< one-form coefficients when kind == OneForm

  static GradientTermSpec none() { return {}; }

  static GradientTermSpec one_form(std::vector<CVec> coeffs) {
    GradientTermSpec s;
    s.kind = GradientKind::OneForm;
    for (const CVec& c : coeffs) s.w.push_back(one_form_w(c));
    s.a = std::move(coeffs);
    return s;
  }

  /// Z-structured term; W is derived with the metric (uniform metric only when Z is uniform).
  static GradientTermSpec z_structured(std::vector<WTensor> zs, const MetricField& g) {
    GradientTermSpec s;
    s.kind = GradientKind::ZStructured;
    for (std::size_t i = 0; i < zs.size(); ++i) s.w.push_back(z_to_w(zs[i], g[zs.size() == 1 ? 0 : i]));
    s.z = std::move(zs);
    return s;
  }

  bool active() const { return kind != GradientKind::None; }
  const WTensor& w_at(std::size_t i) const { return w.size() == 1 ? w.front() : w[i]; }

  /// Z^j_{i j-bar} = 0 for all i, j (summation-free, flat metric).
  static bool z_condition_holds(const WTensor& z, double tol = 1e-12) {
    const int m = z.dim();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (std::abs(z.w[j](i, j)) > tol) return false;
    return true;
  }
};

/// Wirtinger derivatives at one node: d_j u and u_{i j-bar}.
struct NodeJet {
  CVec du;
  CMat ddbar;
};

/// Second-order central differences; throws BoundaryAccess at box boundary nodes.
inline NodeJet wirtinger_at(const ScalarField& u, const GridGeometry& geo, std::size_t idx) {
  if (geo.is_boundary(idx)) fail(ErrorCode::BoundaryAccess, "derivatives requested at a boundary node");
  const int m = geo.m(), n = geo.axes();
  const double u0 = u[idx];
  std::array<double, kMaxAxes> d1{};
  std::array<std::array<double, kMaxAxes>, kMaxAxes> d2{};
  for (int a = 0; a < n; ++a) {
    const double h = geo.spacing(a);
    const double up = u[geo.neighbor(idx, a, 1)], um = u[geo.neighbor(idx, a, -1)];
    d1[a] = (up - um) / (2.0 * h);
    d2[a][a] = (up - 2.0 * u0 + um) / (h * h);
    for (int b = a + 1; b < n; ++b) {
      const double pp = u[geo.neighbor2(idx, a, 1, b, 1)], pm = u[geo.neighbor2(idx, a, 1, b, -1)];
      const double mp = u[geo.neighbor2(idx, a, -1, b, 1)], mm = u[geo.neighbor2(idx, a, -1, b, -1)];
      d2[a][b] = d2[b][a] = (pp - pm - mp + mm) / (4.0 * h * geo.spacing(b));
    }
  }
  NodeJet jet{CVec(m), CMat(m, m)};
  for (int j = 0; j < m; ++j) jet.du(j) = 0.5 * cplx(d1[2 * j], -d1[2 * j + 1]);
  for (int i = 0; i < m; ++i) {
    const int xi = 2 * i, yi = 2 * i + 1;
    jet.ddbar(i, i) = 0.25 * (d2[xi][xi] + d2[yi][yi]);
    for (int j = i + 1; j < m; ++j) {
      const int xj = 2 * j, yj = 2 * j + 1;
      const cplx v = 0.25 * cplx(d2[xi][xj] + d2[yi][yj], d2[xi][yj] - d2[yi][xj]);
      jet.ddbar(i, j) = v;
      jet.ddbar(j, i) = std::conj(v);
    }
  }
  return jet;
}

struct WirtingerField {
  std::vector<CVec> du;    ///< valid at interior nodes
  std::vector<CMat> ddbar; ///< valid at interior nodes
};

inline WirtingerField wirtinger_derivatives(const ScalarField& u, const GridGeometry& geo) {
  if (u.size() != geo.size()) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  WirtingerField out;
  out.du.assign(geo.size(), CVec::Zero(geo.m()));
  out.ddbar.assign(geo.size(), CMat::Zero(geo.m(), geo.m()));
  for (std::size_t idx : geo.interior()) {
    NodeJet j = wirtinger_at(u, geo, idx);
    out.du[idx] = j.du;
    out.ddbar[idx] = j.ddbar;
  }
  return out;
}

/// theta = chi + ddbar u + W(du) at one interior node.
inline CMat theta_at(const ScalarField& u, const GridGeometry& geo, const HermitianFormField& chi,
                     const GradientTermSpec& w, std::size_t idx, NodeJet* jet_out = nullptr) {
  NodeJet jet = wirtinger_at(u, geo, idx);
  CMat theta = chi[idx] + jet.ddbar;
  if (w.active()) theta += w.w_at(idx).apply(jet.du);
  if (jet_out) *jet_out = std::move(jet);
  return theta;
}

/// theta_u at every interior node; box boundary entries are zero matrices.
inline HermitianFormField assemble_theta(const ScalarField& u, const HermitianFormField& chi,
                                         const GradientTermSpec& w, const GridGeometry& geo) {
  if (u.size() != geo.size()) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  std::vector<CMat> out(geo.size(), CMat::Zero(geo.m(), geo.m()));
  for (std::size_t idx : geo.interior()) {
    out[idx] = theta_at(u, geo, chi, w, idx);
    if (hermitian_defect(out[idx]) > 1e-13 * std::max(1.0, max_abs(out[idx])))
      fail(ErrorCode::NonHermitianInput, "assembled theta is not Hermitian");
  }
  return HermitianFormField::per_node(std::move(out));
}

inline HermitianFormField p_omega(const HermitianFormField& theta, const MetricField& g) {
  std::vector<CMat> out;
  out.reserve(theta.storage().size());
  if (theta.is_uniform() && g.is_uniform()) return HermitianFormField::uniform(p_omega(theta[0], g[0]), theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out.push_back(p_omega(theta[i], g[i]));
  return HermitianFormField::per_node(std::move(out));
}

}  // namespace chq

namespace chq {

/// Wirtinger jet from the real gradient and Hessian (axes x_1, y_1, x_2, ...).
template <class Grad, class Hess>
NodeJet wirtinger_from_real(const Grad& g, const Hess& h, int m) {
  NodeJet jet{CVec(m), CMat(m, m)};
  for (int j = 0; j < m; ++j) jet.du(j) = 0.5 * cplx(g(2 * j), -g(2 * j + 1));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
      jet.ddbar(i, j) = 0.25 * cplx(h(xi, xj) + h(yi, yj), h(xi, yj) - h(yi, xj));
    }
  return jet;
}

}  // namespace chq
