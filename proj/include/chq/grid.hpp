#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "chq/error.hpp"

namespace chq {

enum class Topology { Box, Torus };

inline std::string topology_name(Topology t) { return t == Topology::Box ? "box" : "torus"; }

inline constexpr int kMaxGridDim = 3;
inline constexpr int kMaxAxes = 2 * kMaxGridDim;

using NodeCoords = std::array<int, kMaxAxes>;

/// Uniform grid on a box in C^m (all faces are boundary) or on a flat torus.
/// Real axes are ordered x_1, y_1, x_2, y_2, ... with z_j = x_j + i y_j.
class GridGeometry {
 public:
  GridGeometry() = default;

  static GridGeometry box(int m, std::vector<int> nodes, std::vector<double> lengths,
                          std::vector<double> origin = {}) {
    if (origin.empty())
      for (double l : lengths) origin.push_back(-0.5 * l);
    return GridGeometry(m, Topology::Box, std::move(nodes), std::move(lengths), std::move(origin));
  }

  static GridGeometry torus(int m, std::vector<int> nodes, std::vector<double> periods,
                            std::vector<double> origin = {}) {
    if (origin.empty()) origin.assign(periods.size(), 0.0);
    return GridGeometry(m, Topology::Torus, std::move(nodes), std::move(periods), std::move(origin));
  }

  /// Uniform helper: same node count and length on every axis.
  static GridGeometry make(Topology t, int m, int n, double length) {
    std::vector<int> nodes(2 * m, n);
    std::vector<double> lengths(2 * m, length);
    return t == Topology::Box ? box(m, nodes, lengths) : torus(m, nodes, lengths);
  }

  int m() const { return m_; }
  int axes() const { return 2 * m_; }
  Topology topology() const { return topo_; }
  bool is_torus() const { return topo_ == Topology::Torus; }
  const std::vector<int>& nodes() const { return nodes_; }
  const std::vector<double>& lengths() const { return lengths_; }
  const std::vector<double>& origin() const { return origin_; }
  double spacing(int axis) const { return h_[axis]; }
  std::size_t size() const { return size_; }

  NodeCoords coords(std::size_t idx) const {
    NodeCoords c{};
    for (int a = 0; a < axes(); ++a) {
      c[a] = static_cast<int>(idx % nodes_[a]);
      idx /= nodes_[a];
    }
    return c;
  }

  std::size_t index(const NodeCoords& c) const {
    std::size_t idx = 0;
    for (int a = axes() - 1; a >= 0; --a) idx = idx * nodes_[a] + static_cast<std::size_t>(c[a]);
    return idx;
  }

  double coordinate(int axis, int i) const { return origin_[axis] + i * h_[axis]; }

  std::array<double, kMaxAxes> position(std::size_t idx) const {
    const NodeCoords c = coords(idx);
    std::array<double, kMaxAxes> x{};
    for (int a = 0; a < axes(); ++a) x[a] = coordinate(a, c[a]);
    return x;
  }

  bool is_boundary(std::size_t idx) const {
    if (is_torus()) return false;
    const NodeCoords c = coords(idx);
    for (int a = 0; a < axes(); ++a)
      if (c[a] == 0 || c[a] == nodes_[a] - 1) return true;
    return false;
  }

  /// Neighbor index offset along one axis; wraps on a torus, -1 outside a box.
  std::ptrdiff_t neighbor(std::size_t idx, int axis, int offset) const {
    const int c = static_cast<int>((idx / stride_[axis]) % nodes_[axis]);
    int t = c + offset;
    if (is_torus()) {
      t = ((t % nodes_[axis]) + nodes_[axis]) % nodes_[axis];
    } else if (t < 0 || t >= nodes_[axis]) {
      return -1;
    }
    return static_cast<std::ptrdiff_t>(idx + (static_cast<std::ptrdiff_t>(t) - c) * static_cast<std::ptrdiff_t>(stride_[axis]));
  }

  /// Neighbor offset along two axes at once.
  std::ptrdiff_t neighbor2(std::size_t idx, int a1, int o1, int a2, int o2) const {
    const std::ptrdiff_t n1 = neighbor(idx, a1, o1);
    if (n1 < 0) return -1;
    return neighbor(static_cast<std::size_t>(n1), a2, o2);
  }

  /// Nodes where the PDE is imposed: all nodes on a torus, non-boundary nodes on a box.
  const std::vector<std::size_t>& interior() const { return interior_; }

  bool operator==(const GridGeometry& o) const {
    return m_ == o.m_ && topo_ == o.topo_ && nodes_ == o.nodes_ && lengths_ == o.lengths_ && origin_ == o.origin_;
  }

 private:
  GridGeometry(int m, Topology t, std::vector<int> nodes, std::vector<double> lengths, std::vector<double> origin)
      : m_(m), topo_(t), nodes_(std::move(nodes)), lengths_(std::move(lengths)), origin_(std::move(origin)) {
    if (m_ < 1 || m_ > kMaxGridDim) fail(ErrorCode::InvalidArgument, "grid dimension must satisfy 1 <= m <= 3");
    const std::size_t n = static_cast<std::size_t>(2 * m_);
    if (nodes_.size() != n || lengths_.size() != n || origin_.size() != n)
      fail(ErrorCode::InvalidArgument, "grid needs one entry per real axis (2m)");
    size_ = 1;
    for (std::size_t a = 0; a < n; ++a) {
      if (nodes_[a] < 8) fail(ErrorCode::InvalidArgument, "grid needs at least 8 nodes per axis");
      if (!(lengths_[a] > 0.0)) fail(ErrorCode::InvalidArgument, "grid lengths must be positive");
      h_[a] = is_torus() ? lengths_[a] / nodes_[a] : lengths_[a] / (nodes_[a] - 1);
      stride_[a] = size_;
      size_ *= static_cast<std::size_t>(nodes_[a]);
    }
    interior_.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i)
      if (!is_boundary(i)) interior_.push_back(i);
  }

  int m_ = 0;
  Topology topo_ = Topology::Box;
  std::vector<int> nodes_;
  std::vector<double> lengths_, origin_;
  std::array<double, kMaxAxes> h_{};
  std::array<std::size_t, kMaxAxes> stride_{};
  std::size_t size_ = 0;
  std::vector<std::size_t> interior_;
};

}  // namespace chq
