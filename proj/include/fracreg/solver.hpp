#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "fracreg/assembly.hpp"
#include "fracreg/common.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/kernel.hpp"

namespace fracreg {

/// The matrix of E_A(w, phi) + (b w, phi) on nodal indicator functions of the
/// unknowns (the nodes of omega), scaled by h^{-n}:
///
///   (K x)_i = d_i x_i - (2/h^n) sum_{j != i} w(x_i, x_j) x_j,
///   d_i     = (2/h^n) sum_y w(x_i, y) + 2 tail + b_i.
///
/// Translation-invariant forms use a lookup table over lattice differences;
/// general forms store the dense coupling block.
class ReducedSystem {
 public:
  ReducedSystem(const NonlocalForm& form, const Domain& omega, const GridFunction& b,
                std::size_t dense_limit = 6000)
      : grid_(form.grid()) {
    require_same_grid(grid_, omega.grid());
    require_same_grid(grid_, b.grid());
    unknowns_ = omega.indices();
    const std::size_t n = unknowns_.size();
    lattice_.resize(n);
    for (std::size_t i = 0; i < n; ++i) lattice_[i] = grid_.lattice(unknowns_[i]);
    scale_ = 2.0 / grid_.cell_volume();
    diag_.resize(n);
    const auto& offs = form.table();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < offs.size(); ++k) acc += form.weight(lattice_[i], k);
      diag_[i] = scale_ * acc + 2.0 * form.tail_coefficient() + b[unknowns_[i]];
    }
    if (form.translation_invariant()) {
      build_lookup(form);
    } else {
      if (n > dense_limit) throw PreconditionError("general kernel: too many unknowns for the dense coupling block");
      dense_.assign(n * n, 0.0);
      parallel_for(0, n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) dense_[i * n + j] = scale_ * form.weight(lattice_[i], lattice_[j]);
      }, 16);
    }
  }

  std::size_t size() const { return unknowns_.size(); }
  const std::vector<std::size_t>& unknowns() const { return unknowns_; }
  const std::vector<double>& diagonal() const { return diag_; }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t n = size();
    y.resize(n);
    parallel_for(0, n, [&](std::size_t i) {
      double acc = 0.0;
      if (dense_.empty()) {
        const Lattice& li = lattice_[i];
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          acc += lookup(lattice_[j][0] - li[0], lattice_[j][1] - li[1]) * x[j];
        }
        acc *= scale_;
      } else {
        const double* row = &dense_[i * n];
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
      }
      y[i] = diag_[i] * x[i] - acc;
    }, 16);
  }

 private:
  void build_lookup(const NonlocalForm& form) {
    const int dim = grid_.dim();
    span_ = grid_.periodic() ? grid_.per_axis() : 2 * grid_.half();
    width_ = 2 * span_ + 1;
    table_.assign(dim == 1 ? width_ : static_cast<std::size_t>(width_) * width_, 0.0);
    const auto& offs = form.table().offsets;
    for (std::size_t k = 0; k < offs.size(); ++k) table_[slot(offs[k][0], offs[k][1])] = form.offset_weight(k);
    if (!grid_.periodic()) return;
    // Every difference maps to its minimal-image representative.
    std::vector<double> wrapped(table_.size(), 0.0);
    for (int i = -span_; i <= span_; ++i) {
      for (int j = (dim == 1 ? 0 : -span_); j <= (dim == 1 ? 0 : span_); ++j) {
        const Lattice r = grid_.wrap_offset({i, j});
        if (squared_length(r, dim) == 0) continue;
        wrapped[slot(i, j)] = table_[slot(r[0], r[1])];
      }
    }
    table_ = std::move(wrapped);
  }

  std::size_t slot(int i, int j) const {
    if (grid_.dim() == 1) return static_cast<std::size_t>(i + span_);
    return static_cast<std::size_t>(i + span_) * width_ + static_cast<std::size_t>(j + span_);
  }

  double lookup(int i, int j) const { return table_[slot(i, j)]; }

  Grid grid_;
  std::vector<std::size_t> unknowns_;
  std::vector<Lattice> lattice_;
  std::vector<double> diag_;
  std::vector<double> table_;
  std::vector<double> dense_;
  double scale_ = 1.0;
  int span_ = 0;
  int width_ = 1;
};

struct CgResult {
  std::vector<double> x;
  double residual = 0.0;  ///< relative: |b - K x| / |b|
  int iterations = 0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients.
inline CgResult conjugate_gradient(const ReducedSystem& sys, const std::vector<double>& rhs,
                                   std::vector<double> x0, double tolerance, int max_iterations) {
  const std::size_t n = sys.size();
  CgResult out;
  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
  };
  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) {
    out.x.assign(n, 0.0);
    out.converged = true;
    return out;
  }
  std::vector<double> x = x0.empty() ? std::vector<double>(n, 0.0) : std::move(x0);
  if (x.size() != n) throw PreconditionError("initial guess has the wrong length");
  std::vector<double> r(n), z(n), p(n), q(n);
  sys.apply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
  const auto& d = sys.diagonal();
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / d[i];
  p = z;
  double rz = dot(r, z);
  double res = std::sqrt(dot(r, r)) / bnorm;
  int it = 0;
  while (res > tolerance && it < max_iterations) {
    sys.apply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++it;
    // Recompute the true residual now and then to avoid drift.
    if (it % 50 == 0) {
      sys.apply(x, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
    }
    res = std::sqrt(dot(r, r)) / bnorm;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / d[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  out.x = std::move(x);
  out.residual = res;
  out.iterations = it;
  out.converged = res <= tolerance;
  return out;
}

// ---------------------------------------------------------------------------

struct SolveOptions {
  double tolerance = 1e-10;
  int max_iterations = 0;  ///< 0: 50 sqrt(N) + 1000
  std::vector<double> initial_guess;  ///< interior unknowns w = u - h_ext, in node order
};

struct SolveResult {
  GridFunction u;
  double residual = 0.0;
  int iterations = 0;
};

/// Nodes of omega on the outermost layer of the box.
inline bool touches_boundary_layer(const Domain& omega) {
  const Grid& g = omega.grid();
  if (g.periodic()) return false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!omega.contains(i)) continue;
    if (chebyshev_length(g.lattice(i), g.dim()) >= g.half()) return true;
  }
  return false;
}

/// Weak Dirichlet problem
///   E_A(u, phi) + (b u, phi) = sum_i E_{D_i}(g_i, phi) + (f, phi)  for phi supported in omega,
///   u = h_ext outside omega,
/// solved for w = u - h_ext on the nodes of omega.
inline SolveResult solve_dirichlet(const KernelCoefficient& A, const GridFunction& b, const DataKernel& D,
                                   const std::vector<GridFunction>& g, const GridFunction& f,
                                   const GridFunction& h_ext, const Domain& omega, double s,
                                   const SolveOptions& options = {}) {
  const Grid& grid = omega.grid();
  require_admissible(grid.dim(), s);
  for (const GridFunction* v : {&b, &f, &h_ext}) require_same_grid(grid, v->grid());
  for (const auto& gi : g) require_same_grid(grid, gi.grid());
  if (D.size() != g.size()) throw ConfigError("data kernel count does not match the number of g fields");
  if (omega.empty()) throw DomainError("empty domain");
  if (touches_boundary_layer(omega)) throw DomainError("domain touches the truncation boundary layer");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (omega.contains(i) && b[i] < 0.0) throw ConfigError("b must be nonnegative on a bounded domain");

  const NonlocalForm form = assemble_form(A, grid, s);
  const ReducedSystem sys(form, omega, b);

  GridFunction rhs_field = f.restricted(omega);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const NonlocalForm dform = assemble_form(D.evaluators[k], grid, s);
    rhs_field += apply_operator(dform, g[k], omega);
  }
  rhs_field -= apply_operator(form, h_ext, omega);
  const auto& unk = sys.unknowns();
  std::vector<double> rhs(unk.size());
  for (std::size_t i = 0; i < unk.size(); ++i) rhs[i] = rhs_field[unk[i]] - b[unk[i]] * h_ext[unk[i]];

  const int cap = options.max_iterations > 0
                      ? options.max_iterations
                      : static_cast<int>(50.0 * std::sqrt(static_cast<double>(unk.size()))) + 1000;
  auto cg = conjugate_gradient(sys, rhs, options.initial_guess, options.tolerance, cap);
  if (!cg.converged) throw SolverError("conjugate gradient did not converge", cg.residual, cg.iterations);

  SolveResult out;
  out.u = h_ext;
  for (std::size_t i = 0; i < unk.size(); ++i) out.u[unk[i]] = h_ext[unk[i]] + cg.x[i];
  out.residual = cg.residual;
  out.iterations = cg.iterations;
  return out;
}

/// Zero b, no data kernels.
inline SolveResult solve_dirichlet(const KernelCoefficient& A, const GridFunction& f, const GridFunction& h_ext,
                                   const Domain& omega, double s, const SolveOptions& options = {}) {
  return solve_dirichlet(A, GridFunction(omega.grid()), DataKernel{}, {}, f, h_ext, omega, s, options);
}

// ---------------------------------------------------------------------------

/// (h^n sum_{x in d} v(x)^2)^{1/2}
inline double l2_over(const GridFunction& v, const Domain& d) {
  require_same_grid(v.grid(), d.grid());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (d.contains(i)) acc += v[i] * v[i];
  return std::sqrt(acc * v.grid().cell_volume());
}

/// |grad^s u|_{L^2(omega)} / (|grad^s h|_{L^2(omega)} + sum |grad^s g_i|_{L^2(omega)} + |f|_{L^2(omega)}).
/// 0/0 is reported as 0; a positive numerator over a zero denominator as +inf.
inline double energy_estimate_ratio(const GridFunction& u, const GridFunction& h_ext,
                                    const std::vector<GridFunction>& g, const GridFunction& f,
                                    const Domain& omega, double s) {
  const double num = l2_over(s_gradient(u, s, IntegrationRegion::whole(), &omega), omega);
  double den = l2_over(s_gradient(h_ext, s, IntegrationRegion::whole(), &omega), omega) + l2_over(f, omega);
  for (const auto& gi : g) den += l2_over(s_gradient(gi, s, IntegrationRegion::whole(), &omega), omega);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

/// |w|^2_{L^2} / (|omega|^{2s/n} [w]^2), with [w]^2 the full-space Gagliardo
/// energy (constant-kernel form).
inline double sobolev_quotient(const GridFunction& w, const Domain& omega, double s) {
  const Grid& g = w.grid();
  require_same_grid(g, omega.grid());
  if (w.exterior().value() != 0.0) throw PreconditionError("w must vanish outside omega");
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!omega.contains(i) && w[i] != 0.0) throw PreconditionError("w must vanish outside omega");
  const NonlocalForm form = assemble_form(kernels::constant(g.dim()), g, s);
  const double energy = bilinear(form, w, w);
  if (!(energy > 0.0)) throw PreconditionError("zero seminorm");
  double mass = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) mass += w[i] * w[i];
  mass *= g.cell_volume();
  return mass / (std::pow(measure(omega), 2.0 * s / g.dim()) * energy);
}

}  // namespace fracreg
