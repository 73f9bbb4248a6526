#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "fracreg/common.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/kernel.hpp"
#include "fracreg/quadrature.hpp"

namespace fracreg {

/// Lattice offsets interacting explicitly with a node, with their geometric
/// weights G(z) = h^{2n-alpha} g_alpha(z).
///
/// Box grids: every offset with 0 < |z| h <= R_box; interactions beyond that
/// radius go through the closed-form tail. Torus grids: every minimal-image
/// offset, no tail.
struct OffsetTable {
  std::vector<Lattice> offsets;
  std::vector<double> geom;

  std::size_t size() const { return offsets.size(); }
};

inline OffsetTable make_offset_table(const Grid& g, double alpha) {
  OffsetTable t;
  const int dim = g.dim();
  const double scale = std::pow(g.spacing(), 2.0 * dim - alpha);
  auto push = [&](const Lattice& z) {
    t.offsets.push_back(z);
    t.geom.push_back(scale * geometric_factor(dim, alpha, z));
  };
  if (g.periodic()) {
    const int lo = -(g.per_axis() / 2), hi = g.per_axis() - 1 - g.per_axis() / 2;
    // Representatives in (-P/2, P/2]; for even P that is lo+1..hi+1.
    const int a = (g.per_axis() % 2 == 0) ? lo + 1 : lo;
    const int b = (g.per_axis() % 2 == 0) ? hi + 1 : hi;
    for (int i = a; i <= b; ++i) {
      if (dim == 1) {
        if (i != 0) push({i, 0});
        continue;
      }
      for (int j = a; j <= b; ++j)
        if (i != 0 || j != 0) push({i, j});
    }
    return t;
  }
  const double rr = g.box_radius() / g.spacing();
  const long limit = static_cast<long>(std::floor(rr * rr + 1e-9));
  const int k = g.half();
  for (int i = -k; i <= k; ++i) {
    if (dim == 1) {
      if (i != 0 && static_cast<long>(i) * i <= limit) push({i, 0});
      continue;
    }
    for (int j = -k; j <= k; ++j) {
      const Lattice z{i, j};
      const long l2 = squared_length(z, 2);
      if (l2 != 0 && l2 <= limit) push(z);
    }
  }
  return t;
}

/// The discrete symmetric bilinear form of a coefficient c(x,y):
///
///   E(u,v) = sum_{x != y} w(x,y) (u(x)-u(y)) (v(x)-v(y)) + tail,
///   w(x,y) = c(x,y) G(y-x).
///
/// Translation-invariant coefficients store one weight per offset; general
/// coefficients are evaluated on the fly.
class NonlocalForm {
 public:
  NonlocalForm() = default;

  NonlocalForm(const Grid& g, Coefficient coef, double s, double lambda = std::numeric_limits<double>::quiet_NaN())
      : grid_(g), coef_(std::move(coef)), s_(s), lambda_(lambda) {
    require_admissible(g.dim(), s);
    if (coef_.dim() != g.dim()) throw ConfigError("kernel dimension does not match grid dimension");
    alpha_ = g.dim() + 2.0 * s;
    table_ = make_offset_table(g, alpha_);
    tail_ = g.periodic() ? 0.0 : coef_.far_field() * kernel_tail(g.dim(), s, g.box_radius());
    if (coef_.translation_invariant()) {
      ti_.resize(table_.size());
      for (std::size_t k = 0; k < table_.size(); ++k) ti_[k] = coef_.profile(g.coord(table_.offsets[k])) * table_.geom[k];
    }
  }

  const Grid& grid() const { return grid_; }
  double s() const { return s_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  bool translation_invariant() const { return coef_.translation_invariant(); }
  const Coefficient& coefficient() const { return coef_; }
  const OffsetTable& table() const { return table_; }

  /// Far-field coefficient: interactions with |x-y| > R_box contribute
  /// 2 * tail_coefficient * (u(x) - c) to L u(x).
  double tail_coefficient() const { return tail_; }

  /// Weight of the pair (x, x + offset k).
  double weight(const Lattice& x, std::size_t k) const {
    if (!ti_.empty()) return ti_[k];
    const Lattice& z = table_.offsets[k];
    const Lattice y{x[0] + z[0], x[1] + z[1]};
    return coef_(grid_.coord(x), grid_.coord(y)) * table_.geom[k];
  }

  /// Weight of an arbitrary node pair, zero beyond the explicit radius.
  double weight(const Lattice& x, const Lattice& y) const {
    Lattice z{y[0] - x[0], y[1] - x[1]};
    z = grid_.wrap_offset(z);
    if (squared_length(z, grid_.dim()) == 0) throw PreconditionError("diagonal evaluation");
    if (!grid_.periodic()) {
      const double rr = grid_.box_radius() / grid_.spacing();
      if (static_cast<double>(squared_length(z, grid_.dim())) > rr * rr + 1e-9) return 0.0;
    }
    const double g = std::pow(grid_.spacing(), 2.0 * grid_.dim() - alpha_) * geometric_factor(grid_.dim(), alpha_, z);
    return coef_(grid_.coord(x), grid_.coord(Lattice{x[0] + z[0], x[1] + z[1]})) * g;
  }

  /// Translation-invariant weight per offset index.
  double offset_weight(std::size_t k) const { return ti_.at(k); }

 private:
  Grid grid_;
  Coefficient coef_;
  double s_ = 0.5;
  double alpha_ = 2.0;
  double lambda_ = 1.0;
  double tail_ = 0.0;
  OffsetTable table_;
  std::vector<double> ti_;
};

inline NonlocalForm assemble_form(const KernelCoefficient& k, const Grid& grid, double s) {
  return NonlocalForm(grid, k.coefficient(), s, k.lambda());
}

inline NonlocalForm assemble_form(const Coefficient& c, const Grid& grid, double s) { return NonlocalForm(grid, c, s); }

/// E(u,v), including the far-field tail. Symmetric and bilinear.
inline double bilinear(const NonlocalForm& form, const GridFunction& u, const GridFunction& v) {
  const Grid& g = form.grid();
  require_same_grid(g, u.grid());
  require_same_grid(g, v.grid());
  const auto& offs = form.table().offsets;
  const double cu = u.exterior().value(), cv = v.exterior().value();
  const double tail = 2.0 * g.cell_volume() * form.tail_coefficient();
  std::vector<double> partial(g.size(), 0.0);
  parallel_for(0, g.size(), [&](std::size_t i) {
    const Lattice x = g.lattice(i);
    const double ux = u[i], vx = v[i];
    double acc = 0.0;
    for (std::size_t k = 0; k < offs.size(); ++k) {
      const Lattice y{x[0] + offs[k][0], x[1] + offs[k][1]};
      const double w = form.weight(x, k);
      if (auto j = g.index(y)) {
        acc += w * (ux - u[*j]) * (vx - v[*j]);
      } else {
        acc += 2.0 * w * (ux - cu) * (vx - cv);
      }
    }
    partial[i] = acc + tail * (ux - cu) * (vx - cv);
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

/// L u(x) = (2/h^n) sum_y w(x,y) (u(x) - u(y)) + 2 tail (u(x) - c) at the
/// nodes of `region`; zero elsewhere. Satisfies (L u, v)_h = E(u, v) for v
/// vanishing outside `region`.
inline GridFunction apply_operator(const NonlocalForm& form, const GridFunction& u, const Domain& region) {
  const Grid& g = form.grid();
  require_same_grid(g, u.grid());
  if (!(region.grid() == g)) throw DomainError("region outside grid");
  const auto& offs = form.table().offsets;
  const double c = u.exterior().value();
  const double scale = 2.0 / g.cell_volume();
  const double tail = 2.0 * form.tail_coefficient();
  GridFunction out(g);
  parallel_for(0, g.size(), [&](std::size_t i) {
    if (!region.contains(i)) return;
    const Lattice x = g.lattice(i);
    const double ux = u[i];
    double acc = 0.0;
    for (std::size_t k = 0; k < offs.size(); ++k) acc += form.weight(x, k) * (ux - u.at({x[0] + offs[k][0], x[1] + offs[k][1]}));
    out[i] = scale * acc + tail * (ux - c);
  });
  return out;
}

inline GridFunction apply_operator(const NonlocalForm& form, const GridFunction& u) {
  return apply_operator(form, u, full_domain(form.grid()));
}

/// (u, v)_h = h^n sum u v.
inline double inner_product(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u.grid(), v.grid());
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc * u.grid().cell_volume();
}

/// Geometric weights G(z) for every lattice difference with |z_k| <= span,
/// without the far-field cutoff. Used by region-restricted double sums.
class GeometricLookup {
 public:
  GeometricLookup(const Grid& g, double alpha, int span) : dim_(g.dim()), span_(span), width_(2 * span + 1) {
    const double scale = std::pow(g.spacing(), 2.0 * dim_ - alpha);
    values_.assign(dim_ == 1 ? width_ : static_cast<std::size_t>(width_) * width_, 0.0);
    for (int i = -span; i <= span; ++i) {
      for (int j = (dim_ == 1 ? 0 : -span); j <= (dim_ == 1 ? 0 : span); ++j) {
        const Lattice z{i, j};
        if (squared_length(z, dim_) == 0) continue;
        values_[slot(i, j)] = scale * geometric_factor(dim_, alpha, z);
      }
    }
  }

  double operator()(const Lattice& z) const { return values_[slot(z[0], z[1])]; }

 private:
  std::size_t slot(int i, int j) const {
    if (dim_ == 1) return static_cast<std::size_t>(i + span_);
    return static_cast<std::size_t>(i + span_) * width_ + static_cast<std::size_t>(j + span_);
  }

  int dim_;
  int span_;
  int width_;
  std::vector<double> values_;
};

/// sum over ordered pairs x != y of `region` of c(x,y) G(y-x) (u(x)-u(y)) (v(x)-v(y)).
/// No far-field cutoff and no tail: only pairs inside the region interact.
inline double bilinear_restricted(const NonlocalForm& form, const GridFunction& u, const GridFunction& v,
                                  const Domain& region) {
  const Grid& g = form.grid();
  require_same_grid(g, u.grid());
  require_same_grid(g, v.grid());
  require_same_grid(g, region.grid());
  const auto nodes = region.indices();
  const GeometricLookup geom(g, form.alpha(), g.periodic() ? g.per_axis() : 2 * g.half());
  const Coefficient& c = form.coefficient();
  std::vector<double> partial(nodes.size(), 0.0);
  parallel_for(0, nodes.size(), [&](std::size_t a) {
    const std::size_t i = nodes[a];
    const Lattice x = g.lattice(i);
    const Point px = g.coord(x);
    double acc = 0.0;
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (a == b) continue;
      const std::size_t j = nodes[b];
      const Lattice y = g.lattice(j);
      const double w = c(px, g.coord(y)) * geom({y[0] - x[0], y[1] - x[1]});
      acc += w * (u[i] - u[j]) * (v[i] - v[j]);
    }
    partial[a] = acc;
  }, 16);
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// ---------------------------------------------------------------------------

/// Where the s-gradient integrates: all of R^n, inside a domain, or outside it.
struct IntegrationRegion {
  enum class Kind { Whole, Inside, Outside };
  Kind kind = Kind::Whole;
  std::optional<Domain> domain;

  static IntegrationRegion whole() { return {}; }
  static IntegrationRegion inside(Domain d) { return {Kind::Inside, std::move(d)}; }
  static IntegrationRegion outside(Domain d) { return {Kind::Outside, std::move(d)}; }
};

/// Pointwise s-gradient (int (u(x)-u(y))^2 / |x-y|^{n+2s} dy)^{1/2}.
///
/// Whole and Outside include virtual nodes beyond the box (exterior rule) and
/// the closed-form tail for |x-y| > R_box; Inside sums only over domain nodes
/// within the explicit radius, so it never exceeds the whole-space value.
/// Values are computed at `targets` (default: every node), zero elsewhere.
inline GridFunction s_gradient(const GridFunction& u, double s,
                               const IntegrationRegion& region = IntegrationRegion::whole(),
                               const Domain* targets = nullptr) {
  const Grid& g = u.grid();
  require_admissible(g.dim(), s);
  if (region.domain) require_same_grid(g, region.domain->grid());
  if (targets) require_same_grid(g, targets->grid());
  const OffsetTable table = make_offset_table(g, g.dim() + 2.0 * s);
  const double inv_vol = 1.0 / g.cell_volume();
  const double c = u.exterior().value();
  const bool with_tail = !g.periodic() && region.kind != IntegrationRegion::Kind::Inside;
  const double tail = with_tail ? kernel_tail(g.dim(), s, g.box_radius()) : 0.0;
  GridFunction out(g);
  parallel_for(0, g.size(), [&](std::size_t i) {
    if (targets && !targets->contains(i)) return;
    const Lattice x = g.lattice(i);
    const double ux = u[i];
    double acc = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
      const Lattice y{x[0] + table.offsets[k][0], x[1] + table.offsets[k][1]};
      const auto j = g.index(y);
      if (region.kind == IntegrationRegion::Kind::Inside && !(j && region.domain->contains(*j))) continue;
      if (region.kind == IntegrationRegion::Kind::Outside && j && region.domain->contains(*j)) continue;
      const double d = ux - (j ? u[*j] : c);
      acc += table.geom[k] * d * d;
    }
    acc = acc * inv_vol + tail * (ux - c) * (ux - c);
    out[i] = std::sqrt(acc);
  });
  return out;
}

/// Nonlocal tail  int_{R^n \ B_r} u(y)^2 / |y|^{n+2s} dy: node quadrature over
/// box nodes with r <= |y| <= R_box, closed form beyond R_box for a constant
/// exterior.
inline double tail_integral(const GridFunction& u, double r, double s) {
  if (!(r > 0.0)) throw PreconditionError("tail radius must be positive");
  const Grid& g = u.grid();
  require_admissible(g.dim(), s);
  const double alpha = g.dim() + 2.0 * s;
  const double R = g.box_radius();
  const double r2 = r * r, R2 = R * R;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point y = g.coord(i);
    double d2 = 0.0;
    for (int k = 0; k < g.dim(); ++k) d2 += y[k] * y[k];
    if (d2 < r2 || d2 > R2) continue;
    acc += u[i] * u[i] * std::pow(d2, -0.5 * alpha);
  }
  acc *= g.cell_volume();
  const double c = u.exterior().value();
  if (R > r) acc += c * c * kernel_tail(g.dim(), s, R);
  return acc;
}

/// Eigenvalue of the torus operator on the plane wave cos(2 pi k.x / (P h)):
///   (2/h^n) sum_z w(z) (1 - cos(2 pi k.z / P)).
inline double spectral_symbol(const NonlocalForm& form, const Lattice& frequency) {
  if (!form.translation_invariant()) throw PreconditionError("spectral symbol needs a translation-invariant kernel");
  const Grid& g = form.grid();
  if (!g.periodic()) throw PreconditionError("spectral symbol needs a torus grid");
  const auto& offs = form.table().offsets;
  const double P = g.per_axis();
  double acc = 0.0;
  for (std::size_t k = 0; k < offs.size(); ++k) {
    double phase = 0.0;
    for (int d = 0; d < g.dim(); ++d) phase += static_cast<double>(frequency[d]) * offs[k][d];
    acc += form.offset_weight(k) * (1.0 - std::cos(2.0 * std::numbers::pi * phase / P));
  }
  return 2.0 * acc / g.cell_volume();
}

}  // namespace fracreg
