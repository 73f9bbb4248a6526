#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracreg/common.hpp"

namespace fracreg {

enum class Topology { Box, Torus };

/// Uniform Cartesian lattice h*Z^n restricted to a box (or wrapped to a torus).
///
/// Box grids hold the nodes of [-R_box, R_box]^n; there are 2*floor(R_box/h)+1
/// nodes per axis so the origin is a node. Torus grids hold P nodes per axis
/// and identify lattice points modulo P. Nodes are stored row-major with the
/// first axis slowest.
class Grid {
 public:
  Grid() = default;

  static Grid box(int dim, double h, double box_radius) {
    check_dim_spacing(dim, h);
    if (!(box_radius >= h)) throw ConfigError("box_radius must be at least one spacing");
    Grid g;
    g.dim_ = dim;
    g.h_ = h;
    g.box_radius_ = box_radius;
    g.half_ = static_cast<int>(std::floor(box_radius / h + 1e-9));
    g.per_axis_ = 2 * g.half_ + 1;
    g.offset_ = g.half_;
    g.topology_ = Topology::Box;
    return g;
  }

  static Grid torus(int dim, double h, int nodes_per_axis) {
    check_dim_spacing(dim, h);
    if (nodes_per_axis < 2) throw ConfigError("torus needs at least two nodes per axis");
    Grid g;
    g.dim_ = dim;
    g.h_ = h;
    g.per_axis_ = nodes_per_axis;
    g.offset_ = nodes_per_axis / 2;
    g.half_ = (nodes_per_axis - 1) / 2;
    g.box_radius_ = 0.5 * nodes_per_axis * h;
    g.topology_ = Topology::Torus;
    return g;
  }

  int dim() const { return dim_; }
  double spacing() const { return h_; }
  double box_radius() const { return box_radius_; }
  int per_axis() const { return per_axis_; }
  /// Largest |i_k| of a box node (floor(R_box/h)).
  int half() const { return half_; }
  Topology topology() const { return topology_; }
  bool periodic() const { return topology_ == Topology::Torus; }
  double cell_volume() const { return std::pow(h_, dim_); }

  std::size_t size() const {
    std::size_t n = 1;
    for (int k = 0; k < dim_; ++k) n *= static_cast<std::size_t>(per_axis_);
    return n;
  }

  /// Integer coordinates of a node (origin = {0,0}).
  Lattice lattice(std::size_t idx) const {
    if (dim_ == 1) return {static_cast<int>(idx) - offset_, 0};
    return {static_cast<int>(idx / per_axis_) - offset_, static_cast<int>(idx % per_axis_) - offset_};
  }

  Point coord(const Lattice& l) const {
    Point p{0.0, 0.0};
    for (int k = 0; k < dim_; ++k) p[k] = l[k] * h_;
    return p;
  }

  Point coord(std::size_t idx) const { return coord(lattice(idx)); }

  /// Node index of a lattice point; empty outside the box. Torus grids wrap.
  std::optional<std::size_t> index(const Lattice& l) const {
    std::size_t idx = 0;
    for (int k = 0; k < dim_; ++k) {
      int i = l[k] + offset_;
      if (periodic()) {
        i %= per_axis_;
        if (i < 0) i += per_axis_;
      } else if (i < 0 || i >= per_axis_) {
        return std::nullopt;
      }
      idx = idx * per_axis_ + static_cast<std::size_t>(i);
    }
    return idx;
  }

  /// Minimal-image representative of an offset on the torus, in (-P/2, P/2].
  Lattice wrap_offset(Lattice z) const {
    if (!periodic()) return z;
    for (int k = 0; k < dim_; ++k) {
      int v = z[k] % per_axis_;
      if (v < 0) v += per_axis_;
      if (2 * v > per_axis_) v -= per_axis_;
      z[k] = v;
    }
    return z;
  }

  /// Lattice point nearest to a coordinate.
  Lattice nearest(const Point& p) const {
    Lattice l{0, 0};
    for (int k = 0; k < dim_; ++k) l[k] = static_cast<int>(std::lround(p[k] / h_));
    return l;
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && h_ == o.h_ && per_axis_ == o.per_axis_ && topology_ == o.topology_ &&
           offset_ == o.offset_;
  }

 private:
  static void check_dim_spacing(int dim, double h) {
    if (dim != 1 && dim != 2) throw ConfigError("only dimensions 1 and 2 are supported");
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
  }

  int dim_ = 1;
  double h_ = 1.0;
  double box_radius_ = 1.0;
  int half_ = 0;
  int per_axis_ = 1;
  int offset_ = 0;
  Topology topology_ = Topology::Box;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw DomainError("mismatched grids");
}

// ---------------------------------------------------------------------------

/// A set of grid nodes standing for an open set (Omega, a ball, a covering set).
class Domain {
 public:
  Domain() = default;
  explicit Domain(Grid g) : grid_(g), mask_(g.size(), 0) {}

  const Grid& grid() const { return grid_; }
  bool contains(std::size_t idx) const { return mask_[idx] != 0; }
  void insert(std::size_t idx) { mask_[idx] = 1; }
  void erase(std::size_t idx) { mask_[idx] = 0; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto m : mask_) c += m;
    return c;
  }

  bool empty() const { return count() == 0; }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask_.size(); ++i)
      if (mask_[i]) out.push_back(i);
    return out;
  }

  Domain operator|(const Domain& o) const {
    require_same_grid(grid_, o.grid_);
    Domain d(grid_);
    for (std::size_t i = 0; i < mask_.size(); ++i) d.mask_[i] = mask_[i] | o.mask_[i];
    return d;
  }

  Domain operator&(const Domain& o) const {
    require_same_grid(grid_, o.grid_);
    Domain d(grid_);
    for (std::size_t i = 0; i < mask_.size(); ++i) d.mask_[i] = mask_[i] & o.mask_[i];
    return d;
  }

  /// Nodes of this domain not in `o`.
  Domain operator-(const Domain& o) const {
    require_same_grid(grid_, o.grid_);
    Domain d(grid_);
    for (std::size_t i = 0; i < mask_.size(); ++i) d.mask_[i] = mask_[i] & !o.mask_[i];
    return d;
  }

  bool subset_of(const Domain& o) const {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < mask_.size(); ++i)
      if (mask_[i] && !o.mask_[i]) return false;
    return true;
  }

 private:
  Grid grid_;
  std::vector<std::uint8_t> mask_;
};

inline Domain full_domain(const Grid& g) {
  Domain d(g);
  for (std::size_t i = 0; i < g.size(); ++i) d.insert(i);
  return d;
}

inline Domain empty_domain(const Grid& g) { return Domain(g); }

/// Nodes with |x - center| < radius, i.e. the open ball B_radius(center).
/// The ball must stay off the outermost node layer of the box.
inline Domain build_ball_domain(const Grid& g, const Point& center, double radius) {
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
  const double limit = g.half() * g.spacing();
  for (int k = 0; k < g.dim(); ++k)
    if (std::abs(center[k]) + radius > limit + 1e-12) throw DomainError("truncation too small");
  Domain d(g);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.coord(i);
    double d2 = 0.0;
    for (int k = 0; k < g.dim(); ++k) d2 += (x[k] - center[k]) * (x[k] - center[k]);
    if (d2 < r2) d.insert(i);
  }
  return d;
}

/// Ball with no truncation check, clipped to the box (covering sets, audits).
inline Domain clipped_ball(const Grid& g, const Point& center, double radius) {
  Domain d(g);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.coord(i);
    double d2 = 0.0;
    for (int k = 0; k < g.dim(); ++k) d2 += (x[k] - center[k]) * (x[k] - center[k]);
    if (d2 < r2) d.insert(i);
  }
  return d;
}

inline double measure(const Domain& d) { return d.grid().cell_volume() * static_cast<double>(d.count()); }

// ---------------------------------------------------------------------------

/// Values beyond the truncation box: zero or a constant.
struct Exterior {
  enum class Kind { Zero, Constant };
  Kind kind = Kind::Zero;
  double constant = 0.0;

  static Exterior zero() { return {}; }
  static Exterior constant_value(double c) { return {Kind::Constant, c}; }
  double value() const { return kind == Kind::Zero ? 0.0 : constant; }
  bool operator==(const Exterior&) const = default;
};

/// One real per node plus the rule for values outside the box.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(Grid g, Exterior ext = Exterior::zero())
      : grid_(g), values_(g.size(), 0.0), exterior_(ext) {}
  GridFunction(Grid g, std::vector<double> values, Exterior ext = Exterior::zero())
      : grid_(g), values_(std::move(values)), exterior_(ext) {
    if (values_.size() != grid_.size()) throw DomainError("grid function size does not match grid");
  }

  static GridFunction constant(const Grid& g, double c) {
    return GridFunction(g, std::vector<double>(g.size(), c), Exterior::constant_value(c));
  }

  static GridFunction from(const Grid& g, const std::function<double(const Point&)>& fn,
                           Exterior ext = Exterior::zero()) {
    GridFunction u(g, ext);
    for (std::size_t i = 0; i < g.size(); ++i) u.values_[i] = fn(g.coord(i));
    return u;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const Exterior& exterior() const { return exterior_; }
  void set_exterior(Exterior e) { exterior_ = e; }

  /// Value at a lattice point, using the exterior rule outside the box.
  double at(const Lattice& l) const {
    auto idx = grid_.index(l);
    return idx ? values_[*idx] : exterior_.value();
  }

  GridFunction& operator+=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    exterior_ = combine(exterior_, o.exterior_, 1.0);
    return *this;
  }

  GridFunction& operator-=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    exterior_ = combine(exterior_, o.exterior_, -1.0);
    return *this;
  }

  GridFunction& operator*=(double c) {
    for (auto& v : values_) v *= c;
    if (exterior_.kind == Exterior::Kind::Constant) exterior_.constant *= c;
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }

  /// Zero extension outside `d` (the function f_Omega).
  GridFunction restricted(const Domain& d) const {
    require_same_grid(grid_, d.grid());
    GridFunction out(grid_, Exterior::zero());
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = d.contains(i) ? values_[i] : 0.0;
    return out;
  }

  GridFunction abs() const {
    GridFunction out = *this;
    for (auto& v : out.values_) v = std::abs(v);
    out.exterior_.constant = std::abs(out.exterior_.constant);
    return out;
  }

  GridFunction squared() const {
    GridFunction out = *this;
    for (auto& v : out.values_) v = v * v;
    out.exterior_.constant *= out.exterior_.constant;
    return out;
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  static Exterior combine(const Exterior& a, const Exterior& b, double sign) {
    const double v = a.value() + sign * b.value();
    if (a.kind == Exterior::Kind::Zero && b.kind == Exterior::Kind::Zero) return Exterior::zero();
    return Exterior::constant_value(v);
  }

  Grid grid_;
  std::vector<double> values_;
  Exterior exterior_;
};

inline double mean_over(const GridFunction& u, const Domain& d) {
  require_same_grid(u.grid(), d.grid());
  std::size_t n = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!d.contains(i)) continue;
    acc += u[i];
    ++n;
  }
  if (n == 0) throw DomainError("mean over an empty domain");
  return acc / static_cast<double>(n);
}

}  // namespace fracreg
