#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fracreg/analysis.hpp"
#include "fracreg/assembly.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/kernel.hpp"
#include "fracreg/solver.hpp"

namespace fracreg {

struct BallSpec {
  Point center{0.0, 0.0};
  double radius = 1.0;
};

/// Parameters shared by all experiment drivers. Zero/empty entries select the
/// per-experiment defaults.
struct ExperimentParams {
  int dim = 1;
  double s = 0.25;
  double p = 4.0;
  std::vector<double> p_grid;  ///< L^p regularity exponents (default {3, 4, 6})
  double lambda = 2.0;
  double big_lambda = 1.0;
  double N1 = 2.0;
  double delta = 0.1;
  double eps = 1e-3;
  double eps1 = 0.0;  ///< 10^n eps; filled in by validate()
  double M = 1.0;
  double gamma = 0.5;
  int K = 8;
  std::vector<double> deltas;         ///< approximation sweep (default {1e-1, 1e-2, 1e-3})
  std::vector<double> alpha_factors;  ///< Hoelder exponents / min(2s,1) (default {0.45, 0.9})
  std::vector<double> refinements;
  std::uint64_t seed = 1;
  std::string kernel = "rough";  ///< constant | oscillatory | rough | checkerboard
  int instances = 0;
  double box_radius = 8.0;
  double data_cell = 0.5;
  double kernel_cell = 0.25;
  double f_amplitude = 1.0;
  double g_amplitude = 1.0;
  std::string exterior = "random";  ///< random | constant | zero
  double exterior_amplitude = 1.0;
  double r = 1.0;  ///< inner radius (L^inf, translation identity)
  double R = 2.0;  ///< outer radius
  int shift = 1;   ///< translation step in lattice units
  double torus_length = 16.0;
  std::vector<BallSpec> cover;  ///< localization partition-of-unity balls (default B_{5/4}(-1/2 e1), B_{5/4}(1/2 e1))
  double cover_region = 1.0;    ///< U = B_{cover_region}
  double tolerance = 1e-10;
};

inline void validate(ExperimentParams& p) {
  require_admissible(p.dim, p.s);
  if (!(p.p > 2.0) || !std::isfinite(p.p)) throw ConfigError("experiments need 2 < p < infinity");
  for (double q : p.p_grid)
    if (!(q > 2.0) || !std::isfinite(q)) throw ConfigError("experiments need 2 < p < infinity");
  if (!(p.lambda >= 1.0)) throw ConfigError("lambda must be >= 1");
  if (!(p.big_lambda > 0.0)) throw ConfigError("big_lambda must be positive");
  if (!(p.N1 > 1.0)) throw ConfigError("N1 must exceed 1");
  if (!(p.delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(p.eps > 0.0 && p.eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
  const double eps1 = std::pow(10.0, p.dim) * p.eps;
  if (p.eps1 != 0.0 && p.eps1 != eps1) throw ConfigError("eps1 must equal 10^n eps");
  p.eps1 = eps1;
  if (!(p.M > 0.0)) throw ConfigError("M must be positive");
  if (!(p.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (p.K < 1 || p.K > 8) throw ConfigError("K must lie in 1..8");
  for (double d : p.deltas)
    if (!(d >= 0.0)) throw ConfigError("deltas must be nonnegative");
  for (double h : p.refinements)
    if (!(h > 0.0)) throw ConfigError("refinements must be positive spacings");
  if (p.instances < 0) throw ConfigError("instances must be nonnegative");
  if (!(p.r > 0.0 && p.r < p.R)) throw ConfigError("need 0 < r < R");
  if (!(p.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (p.exterior != "random" && p.exterior != "constant" && p.exterior != "zero")
    throw ConfigError("exterior must be random, constant or zero");
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  std::string name;
  ExperimentParams params;
  std::vector<Table> tables;
  std::vector<Criterion> criteria;
  std::vector<std::string> notes;
  double wall_clock_seconds = 0.0;  ///< kept out of the JSON report

  bool passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
  }
  const Criterion* criterion(const std::string& n) const {
    for (const auto& c : criteria)
      if (c.name == n) return &c;
    return nullptr;
  }
  const Table* table(const std::string& n) const {
    for (const auto& t : tables)
      if (t.name == n) return &t;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Instance generation.

namespace detail {

enum Stream : std::int64_t { kKernel = 1, kF = 2, kG = 3, kExterior = 4, kData = 5, kTest = 6 };

inline std::uint64_t instance_seed(std::uint64_t seed, int instance, Stream stream) {
  return hash_combine(seed, instance, stream, 0x5eed);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Ratio with 0/0 = 0.
inline double safe_ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

inline std::vector<double> or_default(const std::vector<double>& v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

inline Point scaled(const Point& x, double r, const Point& z) { return {r * x[0] + z[0], r * x[1] + z[1]}; }

}  // namespace detail

/// Kernel of the configured family; rough kernels draw their profile from `seed`.
inline KernelCoefficient make_kernel(const std::string& kind, int dim, double lambda, std::uint64_t seed,
                                     double cell = 0.25) {
  if (kind == "constant") return kernels::constant(dim, 1.0, lambda);
  if (kind == "oscillatory") return kernels::oscillatory(dim, lambda);
  if (kind == "rough") return kernels::rough(dim, lambda, seed, cell);
  if (kind == "checkerboard") return kernels::checkerboard(dim, lambda);
  throw ConfigError("unknown kernel kind '" + kind + "'");
}

inline void require_translation_invariant(const ExperimentParams& p) {
  if (make_kernel(p.kernel, p.dim, p.lambda, p.seed, p.kernel_cell).translation_invariant()) return;
  throw PreconditionError("kernel '" + p.kernel + "' is not translation invariant");
}

/// Seeded piecewise-constant field with values in [-1,1] on cells of width
/// `cell`, zero outside `support`.
inline GridFunction piecewise_constant_field(const Grid& g, std::uint64_t seed, double cell, const Domain& support) {
  GridFunction u(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!support.contains(i)) continue;
    const Point x = g.coord(i);
    const auto c0 = static_cast<std::int64_t>(std::floor(x[0] / cell));
    const auto c1 = g.dim() > 1 ? static_cast<std::int64_t>(std::floor(x[1] / cell)) : 0;
    u[i] = 2.0 * unit_from_hash(hash_combine(seed, c0, c1, 0xf1)) - 1.0;
  }
  return u;
}

/// Seeded Lipschitz field: multilinear interpolation of values in [-1,1] at
/// the points of cell*Z^n, times a radial ramp that is 1 on B_inner and 0
/// outside B_outer.
inline GridFunction lipschitz_field(const Grid& g, std::uint64_t seed, double cell, double inner, double outer) {
  auto node = [&](std::int64_t a, std::int64_t b) { return 2.0 * unit_from_hash(hash_combine(seed, a, b, 0x11)) - 1.0; };
  GridFunction u(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.coord(i);
    const double rad = norm(x, g.dim());
    const double ramp = std::clamp((outer - rad) / (outer - inner), 0.0, 1.0);
    if (ramp == 0.0) continue;
    const double t0 = x[0] / cell, t1 = x[1] / cell;
    const auto a = static_cast<std::int64_t>(std::floor(t0));
    const double fa = t0 - static_cast<double>(a);
    double v;
    if (g.dim() == 1) {
      v = (1.0 - fa) * node(a, 0) + fa * node(a + 1, 0);
    } else {
      const auto b = static_cast<std::int64_t>(std::floor(t1));
      const double fb = t1 - static_cast<double>(b);
      v = (1.0 - fa) * ((1.0 - fb) * node(a, b) + fb * node(a, b + 1)) +
          fa * ((1.0 - fb) * node(a + 1, b) + fb * node(a + 1, b + 1));
    }
    u[i] = ramp * v;
  }
  return u;
}

/// Exterior (Dirichlet) data per the `exterior` setting.
inline GridFunction exterior_field(const ExperimentParams& p, const Grid& g, int instance) {
  if (p.exterior == "zero" || p.exterior_amplitude == 0.0) return GridFunction(g);
  if (p.exterior == "constant") return GridFunction::constant(g, p.exterior_amplitude);
  const double outer = std::min(p.box_radius - 0.5, 0.9375 * p.box_radius);
  return p.exterior_amplitude *
         lipschitz_field(g, detail::instance_seed(p.seed, instance, detail::kExterior), p.data_cell, outer - 0.5, outer);
}

/// One random problem  L_A u = L_D g + f  on omega with exterior data.
struct Instance {
  KernelCoefficient A;
  DataKernel D;
  GridFunction f, g, h_ext;
};

inline Instance make_instance(const ExperimentParams& p, const Grid& grid, const Domain& omega, int instance,
                              bool with_data, bool with_exterior) {
  const double outer = std::min(p.box_radius - 0.5, 0.9375 * p.box_radius);
  Instance in{
      make_kernel(p.kernel, p.dim, p.lambda, detail::instance_seed(p.seed, instance, detail::kKernel), p.kernel_cell),
      kernels::rough_data(p.dim, p.big_lambda, detail::instance_seed(p.seed, instance, detail::kData), p.kernel_cell),
      GridFunction(grid), GridFunction(grid),
      with_exterior ? exterior_field(p, grid, instance) : GridFunction(grid)};
  if (with_data) {
    in.f = p.f_amplitude * piecewise_constant_field(grid, detail::instance_seed(p.seed, instance, detail::kF),
                                                    p.data_cell, omega);
    in.g = p.g_amplitude * lipschitz_field(grid, detail::instance_seed(p.seed, instance, detail::kG), p.data_cell,
                                           outer - 0.5, outer);
  }
  return in;
}

inline SolveResult solve_instance(const Instance& in, const Domain& omega, double s, double tolerance,
                                  std::uint64_t seed, int instance) {
  SolveOptions opt;
  opt.tolerance = tolerance;
  try {
    return solve_dirichlet(in.A, GridFunction(omega.grid()), in.D, {in.g}, in.f, in.h_ext, omega, s, opt);
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + " (seed " + std::to_string(seed) + ", instance " +
                          std::to_string(instance) + ")",
                      e.residual(), e.iterations());
  }
}

inline Domain centred_ball(const Grid& g, double radius) { return build_ball_domain(g, {0.0, 0.0}, radius); }

/// Consecutive values (h -> h/2) stay within a factor `factor` of each other,
/// and the finest exceeds the coarsest by at most `factor`.
inline Criterion stability_criterion(const std::string& name, const std::vector<double>& values, double factor = 2.0) {
  Criterion c{name, true, ""};
  std::ostringstream os;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) os << " -> ";
    os << detail::fmt(values[k]);
    if (!std::isfinite(values[k])) c.pass = false;
    if (k == 0) continue;
    const double a = values[k - 1], b = values[k];
    if (a == 0.0 && b == 0.0) continue;
    if (a == 0.0 || b == 0.0 || b > factor * a || a > factor * b) c.pass = false;
  }
  if (values.size() > 1 && values.back() > factor * values.front()) c.pass = false;
  c.detail = os.str();
  return c;
}

/// Every consecutive value grows by less than `factor` (one-sided).
inline Criterion growth_criterion(const std::string& name, const std::vector<double>& values, double factor = 2.0) {
  Criterion c{name, true, ""};
  std::ostringstream os;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) os << " -> ";
    os << detail::fmt(values[k]);
    if (!std::isfinite(values[k])) c.pass = false;
    if (k > 0 && !(values[k] < factor * values[k - 1] || (values[k] == 0.0 && values[k - 1] == 0.0))) c.pass = false;
  }
  c.detail = os.str();
  return c;
}

/// Adds the "finite constants" criterion.
inline void finalize(ExperimentReport& rep) {
  std::size_t bad = 0;
  for (const auto& t : rep.tables)
    for (const auto& row : t.rows)
      for (double v : row)
        if (!std::isfinite(v)) ++bad;
  rep.criteria.push_back({"finite constants", bad == 0, std::to_string(bad) + " non-finite entries"});
}

template <class Body>
void for_instances(int count, Body&& body) {
  parallel_for(0, static_cast<std::size_t>(count), [&](std::size_t i) { body(static_cast<int>(i)); }, 1);
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

/// sup over the nodes of d of |v|.
inline double sup_over(const GridFunction& v, const Domain& d) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (d.contains(i)) m = std::max(m, std::abs(v[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Rescaling:  A~(x,y) = A(rx+z, ry+z),  u~(x) = r^{-s} u(rx+z),  f~(x) = r^s f(rx+z).

inline Coefficient rescaled(const Coefficient& c, double r, const Point& z) {
  if (c.translation_invariant())
    return Coefficient::translation_invariant([c, r](const Point& w) { return c.profile({r * w[0], r * w[1]}); },
                                              c.dim(), c.far_field(), c.label());
  return Coefficient::general(
      [c, r, z](const Point& x, const Point& y) { return c(detail::scaled(x, r, z), detail::scaled(y, r, z)); },
      c.dim(), c.far_field(), c.label());
}

inline KernelCoefficient rescaled(const KernelCoefficient& A, double r, const Point& z) {
  return KernelCoefficient(rescaled(A.coefficient(), r, z), A.lambda());
}

struct RescalingReport {
  double r = 1.0;
  Point z{0.0, 0.0};
  double max_discrepancy = 0.0;  ///< relative to max |u|
  std::size_t nodes = 0;
};

/// Solves L_A u = f on B_{6r}(z) with zero exterior data directly, and as the
/// rescaled problem on B_6 mapped back. r must be a power of 2 and z a node.
inline RescalingReport rescaling_consistency(const KernelCoefficient& A, const Grid& g, double s, double r,
                                             const Point& z, std::uint64_t seed, double cell = 0.5) {
  int e = 0;
  if (!(r > 0.0) || std::frexp(r, &e) != 0.5) throw PreconditionError("rescaling factor must be a power of 2");
  if (g.periodic()) throw PreconditionError("rescaling check needs a box grid");
  const Lattice zl = g.nearest(z);
  for (int k = 0; k < g.dim(); ++k)
    if (zl[k] * g.spacing() != z[k]) throw PreconditionError("translation must be a grid node");
  const Domain omega = build_ball_domain(g, z, 6.0 * r);
  const GridFunction f = piecewise_constant_field(g, seed, cell, omega);
  SolveOptions opt;
  opt.tolerance = 1e-12;
  const auto u = solve_dirichlet(A, f, GridFunction(g), omega, s, opt).u;

  const Grid gs = Grid::box(g.dim(), g.spacing() / r, g.box_radius() / r);
  const Domain os = centred_ball(gs, 6.0);
  GridFunction fs(gs);
  const double rs = std::pow(r, s);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const Lattice l = gs.lattice(i);
    const auto j = g.index({l[0] + zl[0], l[1] + zl[1]});
    if (j) fs[i] = rs * f[*j];
  }
  const auto us = solve_dirichlet(rescaled(A, r, z), fs, GridFunction(gs), os, s, opt).u;

  RescalingReport rep;
  rep.r = r;
  rep.z = z;
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (!os.contains(i)) continue;
    const Lattice l = gs.lattice(i);
    const auto j = g.index({l[0] + zl[0], l[1] + zl[1]});
    if (!j || !omega.contains(*j)) throw DomainError("rescaled domain does not match");
    diff = std::max(diff, std::abs(rs * us[i] - u[*j]));
    scale = std::max(scale, std::abs(u[*j]));
    ++rep.nodes;
  }
  if (rep.nodes != omega.count()) throw DomainError("rescaled domain does not match");
  rep.max_discrepancy = detail::safe_ratio(diff, scale);
  return rep;
}

// ---------------------------------------------------------------------------
// L^p regularity:
//   |grad^s u|_{L^p(B_1)} <= C (|f + grad^s g|_{L^p(B_6)} + |grad^s u|_{L^2(B_6)}).

inline ExperimentReport run_lp_regularity(ExperimentParams params) {
  validate(params);
  require_translation_invariant(params);
  const auto ps = detail::or_default(params.p_grid, {3.0, 4.0, 6.0});
  const auto refs = detail::or_default(params.refinements, {1.0 / 16, 1.0 / 32, 1.0 / 64});
  const int count = params.instances > 0 ? params.instances : 10;
  ExperimentReport rep;
  rep.name = "lp_regularity";
  rep.params = params;
  Table inst{"instances", {"h", "instance", "p", "lhs", "rhs", "ratio"}, {}};
  Table summary{"max_ratio", {"p", "h", "max_ratio"}, {}};
  std::vector<std::vector<double>> max_ratio(ps.size());

  for (double h : refs) {
    const Grid g = Grid::box(params.dim, h, params.box_radius);
    const Domain b6 = centred_ball(g, 6.0), b1 = centred_ball(g, 1.0);
    std::vector<std::vector<std::array<double, 3>>> out(count);
    for_instances(count, [&](int i) {
      const Instance in = make_instance(params, g, b6, i, true, false);
      const auto u = solve_instance(in, b6, params.s, params.tolerance, params.seed, i).u;
      const GridFunction gu = s_gradient(u, params.s, IntegrationRegion::whole(), &b6);
      const GridFunction data = (in.f + s_gradient(in.g, params.s, IntegrationRegion::whole(), &b6)).restricted(b6);
      const double energy = l2_over(gu, b6);
      for (double p : ps) {
        const double lhs = lp_norm(gu, NormSpec::lp(p, b1));
        const double rhs = lp_norm(data, NormSpec::lp(p, b6)) + energy;
        out[i].push_back({lhs, rhs, detail::safe_ratio(lhs, rhs)});
      }
    });
    for (std::size_t k = 0; k < ps.size(); ++k) {
      double m = 0.0;
      for (int i = 0; i < count; ++i) {
        const auto& v = out[i][k];
        inst.rows.push_back({h, static_cast<double>(i), ps[k], v[0], v[1], v[2]});
        m = std::max(m, v[2]);
      }
      max_ratio[k].push_back(m);
      summary.rows.push_back({ps[k], h, m});
    }
  }
  for (std::size_t k = 0; k < ps.size(); ++k)
    rep.criteria.push_back(stability_criterion("p=" + detail::fmt(ps[k]) + " refinement stability", max_ratio[k]));
  rep.tables = {summary, inst};
  rep.notes.push_back("kernel family '" + params.kernel + "' is a built-in choice, not prescribed by the estimate");
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Energy estimate:
//   |grad^s u|_{L^2(B_6)} <= C (|grad^s h|_{L^2(B_6)} + |grad^s g|_{L^2(B_6)} + |f|_{L^2(B_6)}).

inline ExperimentReport run_energy(ExperimentParams params) {
  validate(params);
  const auto refs = detail::or_default(params.refinements, {1.0 / 32, 1.0 / 64});
  const int count = params.instances > 0 ? params.instances : 20;
  ExperimentReport rep;
  rep.name = "energy";
  rep.params = params;
  Table inst{"instances", {"h", "instance", "ratio", "residual", "iterations"}, {}};
  Table summary{"max_ratio", {"h", "max_ratio"}, {}};
  std::vector<double> maxima;
  for (double h : refs) {
    const Grid g = Grid::box(params.dim, h, params.box_radius);
    const Domain b6 = centred_ball(g, 6.0);
    std::vector<std::array<double, 3>> out(count);
    for_instances(count, [&](int i) {
      const Instance in = make_instance(params, g, b6, i, true, true);
      const auto sol = solve_instance(in, b6, params.s, params.tolerance, params.seed, i);
      out[i] = {energy_estimate_ratio(sol.u, in.h_ext, {in.g}, in.f, b6, params.s), sol.residual,
                static_cast<double>(sol.iterations)};
    });
    double m = 0.0;
    for (int i = 0; i < count; ++i) {
      inst.rows.push_back({h, static_cast<double>(i), out[i][0], out[i][1], out[i][2]});
      m = std::max(m, out[i][0]);
    }
    maxima.push_back(m);
    summary.rows.push_back({h, m});
  }
  rep.criteria.push_back(growth_criterion("max ratio grows by less than 2 per refinement", maxima));
  rep.tables = {summary, inst};
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Approximation: u solves the inhomogeneous problem on B_5, v the homogeneous
// one with the same exterior data; data scaled so that
//   avg_{B_5}(f^2 + |grad^s g|^2) = M delta^2.

inline ExperimentReport run_approximation(ExperimentParams params) {
  validate(params);
  require_translation_invariant(params);
  const auto refs = detail::or_default(params.refinements, {1.0 / 32, 1.0 / 64});
  const auto deltas = detail::or_default(params.deltas, {1e-1, 1e-2, 1e-3});
  const int count = params.instances > 0 ? params.instances : 3;
  ExperimentReport rep;
  rep.name = "approximation";
  rep.params = params;
  Table inst{"instances", {"h", "instance", "delta", "difference", "C1", "N0"}, {}};
  Table summary{"constants", {"h", "max_C1", "max_N0"}, {}};
  std::vector<double> c1_max, n0_max;
  bool linear = true;
  double worst_linear = 0.0;

  for (double h : refs) {
    const Grid g = Grid::box(params.dim, h, params.box_radius);
    const Domain b5 = centred_ball(g, 5.0), b2 = centred_ball(g, 2.0);
    const double vol5 = measure(b5);
    std::vector<std::vector<std::array<double, 3>>> out(count);
    for_instances(count, [&](int i) {
      const Instance base = make_instance(params, g, b5, i, true, true);
      Instance hom = base;
      hom.f = GridFunction(g);
      hom.g = GridFunction(g);
      const auto v = solve_instance(hom, b5, params.s, params.tolerance, params.seed, i).u;
      const GridFunction gv = s_gradient(v, params.s, IntegrationRegion::whole(), &b2);
      const double sup_gv = sup_over(gv, b2);
      const double f2 = l2_over(base.f, b5), g2 = l2_over(s_gradient(base.g, params.s, IntegrationRegion::whole(), &b5), b5);
      const double q0 = (f2 * f2 + g2 * g2) / vol5;
      for (double delta : deltas) {
        const double c = q0 > 0.0 ? std::sqrt(params.M * delta * delta / q0) : 0.0;
        Instance in = base;
        in.f *= c;
        in.g *= c;
        const auto u = solve_instance(in, b5, params.s, params.tolerance, params.seed, i).u;
        const double diff = l2_over(s_gradient(u - v, params.s, IntegrationRegion::whole(), &b5), b5);
        const double c1 = detail::safe_ratio(diff, std::sqrt(params.M * delta * delta * vol5));
        const double energy = l2_over(s_gradient(u, params.s, IntegrationRegion::whole(), &b5), b5);
        const double n0 = detail::safe_ratio(sup_gv * std::sqrt(params.M), energy / std::sqrt(vol5));
        out[i].push_back({diff, c1, n0});
      }
    });
    double mc = 0.0, mn = 0.0;
    for (int i = 0; i < count; ++i) {
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        const auto& o = out[i][k];
        inst.rows.push_back({h, static_cast<double>(i), deltas[k], o[0], o[1], o[2]});
        mc = std::max(mc, o[1]);
        mn = std::max(mn, o[2]);
        if (k == 0 || deltas[k] == 0.0 || deltas[k - 1] == 0.0) continue;
        const double expected = deltas[k - 1] / deltas[k];
        const double measured = detail::safe_ratio(out[i][k - 1][0], o[0]);
        const double dev = std::abs(measured / expected - 1.0);
        worst_linear = std::max(worst_linear, std::isfinite(dev) ? dev : 1e300);
        if (!(dev <= 0.2)) linear = false;
      }
    }
    c1_max.push_back(mc);
    n0_max.push_back(mn);
    summary.rows.push_back({h, mc, mn});
  }
  rep.criteria.push_back({"difference linear in delta (20%)", linear, "worst deviation " + detail::fmt(worst_linear)});
  rep.criteria.push_back(stability_criterion("C1 refinement stability", c1_max));
  rep.criteria.push_back(stability_criterion("N0 refinement stability", n0_max));
  rep.tables = {summary, inst};
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Level-set decay chain, with G = |grad^s u^|^2 and H = |f^|^2 + |grad^s g^|^2
// for the normalized u^ = gamma u / |grad^s u|_{L^2(B_6)}:
//   |{M G > N1^{2k}}| <= sum_{j=1..k} eps1^j |{M H > delta^2 N1^{2(k-j)}}| + eps1^k |{M G > 1}|
// on B_1, given |{M G > N1^2}| < eps |B_1|.

struct LevelSetChain {
  bool normalized = true;
  double air_left = 0.0;   ///< |{M G > N1^2} cap B_1|
  double air_right = 0.0;  ///< eps |B_1|
  std::vector<double> lhs, data_terms, tail_terms, rhs;
  bool holds = true;
  double decay_rate = 0.0;  ///< max lhs_{k+1}/lhs_k over k >= 2 with lhs_k > 0
};

inline LevelSetChain level_set_chain(const GridFunction& G, const GridFunction& H, const Domain& b6, const Domain& b1,
                                     const ExperimentParams& p) {
  const GridFunction mg = maximal_function(G, b6, &b1);
  const GridFunction mh = maximal_function(H, b6, &b1);
  const double cell = b1.grid().cell_volume();
  auto above = [&](const GridFunction& m, double t) {
    double c = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (b1.contains(i) && m[i] > t) c += 1.0;
    return c * cell;
  };
  LevelSetChain ch;
  const double n2 = p.N1 * p.N1;
  ch.air_left = above(mg, n2);
  ch.air_right = p.eps * measure(b1);
  ch.normalized = ch.air_left < ch.air_right;
  const double base = above(mg, 1.0);
  for (int k = 1; k <= p.K; ++k) {
    const double lhs = above(mg, std::pow(n2, k));
    double data = 0.0;
    for (int j = 1; j <= k; ++j) data += std::pow(p.eps1, j) * above(mh, p.delta * p.delta * std::pow(n2, k - j));
    const double tail = std::pow(p.eps1, k) * base;
    ch.lhs.push_back(lhs);
    ch.data_terms.push_back(data);
    ch.tail_terms.push_back(tail);
    ch.rhs.push_back(data + tail);
    if (lhs > (data + tail) * (1.0 + 1e-12)) ch.holds = false;
  }
  for (int k = 2; k < p.K; ++k)
    if (ch.lhs[k - 1] > 0.0) ch.decay_rate = std::max(ch.decay_rate, ch.lhs[k] / ch.lhs[k - 1]);
  return ch;
}

inline ExperimentReport run_level_set_decay(ExperimentParams params) {
  validate(params);
  const auto refs = detail::or_default(params.refinements, {1.0 / 32});
  const int count = params.instances > 0 ? params.instances : 1;
  ExperimentReport rep;
  rep.name = "level_set_decay";
  rep.params = params;
  Table chain{"chain", {"h", "instance", "k", "threshold", "lhs", "data_terms", "tail_term", "rhs"}, {}};
  Table summary{"normalization", {"h", "instance", "air_left", "air_right", "decay_rate"}, {}};
  bool normalized = true, holds = true;
  std::string failure;
  for (double h : refs) {
    const Grid g = Grid::box(params.dim, h, params.box_radius);
    const Domain b6 = centred_ball(g, 6.0), b1 = centred_ball(g, 1.0);
    std::vector<LevelSetChain> out(count);
    for_instances(count, [&](int i) {
      const Instance in = make_instance(params, g, b6, i, true, true);
      const auto u = solve_instance(in, b6, params.s, params.tolerance, params.seed, i).u;
      const GridFunction gu = s_gradient(u, params.s, IntegrationRegion::whole(), &b6);
      const double energy = l2_over(gu, b6);
      const double scale = energy > 0.0 ? params.gamma / energy : 0.0;
      const GridFunction G = (scale * gu).squared().restricted(b6);
      const GridFunction H = ((scale * in.f).squared() +
                              (scale * s_gradient(in.g, params.s, IntegrationRegion::whole(), &b6)).squared())
                                 .restricted(b6);
      out[i] = level_set_chain(G, H, b6, b1, params);
    });
    for (int i = 0; i < count; ++i) {
      const auto& ch = out[i];
      summary.rows.push_back({h, static_cast<double>(i), ch.air_left, ch.air_right, ch.decay_rate});
      if (!ch.normalized) {
        normalized = false;
        failure = "normalization failed: |{M G > N1^2}| = " + detail::fmt(ch.air_left) +
                  " >= eps |B_1| = " + detail::fmt(ch.air_right);
        continue;
      }
      if (!ch.holds) holds = false;
      for (int k = 0; k < params.K; ++k)
        chain.rows.push_back({h, static_cast<double>(i), static_cast<double>(k + 1),
                              std::pow(params.N1, 2.0 * (k + 1)), ch.lhs[k], ch.data_terms[k], ch.tail_terms[k],
                              ch.rhs[k]});
    }
  }
  rep.criteria.push_back({"normalization", normalized, normalized ? "hypothesis holds" : failure});
  if (normalized) rep.criteria.push_back({"chain inequality", holds, "k = 1.." + std::to_string(params.K)});
  rep.notes.push_back("eps1 = " + detail::fmt(params.eps1) + "; chain uses eps1^j inside the sum");
  rep.tables = {summary, chain};
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Hoelder estimate for homogeneous solutions on B_5:
//   [v]_{C^alpha(B_3)} <= C |grad^s v|_{L^2(B_5)}.

inline ExperimentReport run_holder(ExperimentParams params) {
  validate(params);
  require_translation_invariant(params);
  const auto factors = detail::or_default(params.alpha_factors, {0.45, 0.9});
  for (double f : factors)
    if (!(f > 0.0 && f < 1.0)) throw PreconditionError("alpha must lie in (0, min{2s,1})");
  const double cap = std::min(2.0 * params.s, 1.0);
  const auto refs = detail::or_default(params.refinements, {1.0 / 32, 1.0 / 64});
  const int count = params.instances > 0 ? params.instances : 5;
  ExperimentReport rep;
  rep.name = "holder";
  rep.params = params;
  Table inst{"instances", {"h", "instance", "alpha", "seminorm", "energy", "ratio"}, {}};
  Table summary{"max_ratio", {"alpha", "h", "max_ratio"}, {}};
  std::vector<std::vector<double>> maxima(factors.size());
  for (double h : refs) {
    const Grid g = Grid::box(params.dim, h, params.box_radius);
    const Domain b5 = centred_ball(g, 5.0), b3 = centred_ball(g, 3.0);
    std::vector<std::vector<std::array<double, 3>>> out(count);
    for_instances(count, [&](int i) {
      const Instance in = make_instance(params, g, b5, i, false, true);
      const auto v = solve_instance(in, b5, params.s, params.tolerance, params.seed, i).u;
      const double energy = l2_over(s_gradient(v, params.s, IntegrationRegion::whole(), &b5), b5);
      for (double f : factors) {
        const double semi = holder_seminorm(v, f * cap, b3);
        out[i].push_back({semi, energy, detail::safe_ratio(semi, energy)});
      }
    });
    for (std::size_t k = 0; k < factors.size(); ++k) {
      double m = 0.0;
      for (int i = 0; i < count; ++i) {
        const auto& o = out[i][k];
        inst.rows.push_back({h, static_cast<double>(i), factors[k] * cap, o[0], o[1], o[2]});
        m = std::max(m, o[2]);
      }
      maxima[k].push_back(m);
      summary.rows.push_back({factors[k] * cap, h, m});
    }
  }
  for (std::size_t k = 0; k < factors.size(); ++k)
    rep.criteria.push_back(
        stability_criterion("alpha=" + detail::fmt(factors[k] * cap) + " refinement stability", maxima[k]));
  rep.tables = {summary, inst};
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// L^infty and tail bounds for homogeneous solutions on B_R:
//   sup_{B_r} |u|            <= C (|grad^s u|_{L^2(B_R)} + |u|_{L^2(B_R)}),
//   sup_{B_r} grad^s_{R^n \ B_R} u <= C |grad^s u|_{L^2(B_R)},
//   int_{R^n \ B_r} u^2 / |y|^{n+2s} <= C (|grad^s u|^2_{L^2(B_R)} + |u|^2_{L^2(B_R)}).

inline ExperimentReport run_linf(ExperimentParams params) {
  validate(params);
  const auto refs = detail::or_default(params.refinements, {1.0 / 32, 1.0 / 64});
  const int count = params.instances > 0 ? params.instances : 5;
  ExperimentReport rep;
  rep.name = "linf";
  rep.params = params;
  Table inst{"instances", {"h", "instance", "sup_ratio", "exterior_gradient_ratio", "tail_ratio"}, {}};
  Table summary{"max_ratio", {"h", "sup_ratio", "exterior_gradient_ratio", "tail_ratio", "tail_constant",
                              "tail_exact"}, {}};
  std::vector<double> sup_max, ext_max, tail_max;
  std::vector<double> tail_errors;
  const double exact = kernel_tail(params.dim, params.s, params.r);
  for (double h : refs) {
    const Grid g = Grid::box(params.dim, h, params.box_radius);
    const Domain bR = centred_ball(g, params.R), br = centred_ball(g, params.r);
    std::vector<std::array<double, 3>> out(count);
    for_instances(count, [&](int i) {
      const Instance in = make_instance(params, g, bR, i, false, true);
      const auto u = solve_instance(in, bR, params.s, params.tolerance, params.seed, i).u;
      const double energy = l2_over(s_gradient(u, params.s, IntegrationRegion::whole(), &bR), bR);
      const double mass = l2_over(u, bR);
      const double sup = sup_over(u, br);
      const double ext = sup_over(s_gradient(u, params.s, IntegrationRegion::outside(bR), &br), br);
      const double tail = tail_integral(u, params.r, params.s);
      out[i] = {detail::safe_ratio(sup, energy + mass), detail::safe_ratio(ext, energy),
                detail::safe_ratio(tail, energy * energy + mass * mass)};
    });
    std::array<double, 3> m{0.0, 0.0, 0.0};
    for (int i = 0; i < count; ++i) {
      inst.rows.push_back({h, static_cast<double>(i), out[i][0], out[i][1], out[i][2]});
      for (int k = 0; k < 3; ++k) m[k] = std::max(m[k], out[i][k]);
    }
    const double tc = tail_integral(GridFunction::constant(g, 1.0), params.r, params.s);
    tail_errors.push_back(std::abs(tc - exact) / exact);
    sup_max.push_back(m[0]);
    ext_max.push_back(m[1]);
    tail_max.push_back(m[2]);
    summary.rows.push_back({h, m[0], m[1], m[2], tc, exact});
  }
  rep.criteria.push_back(stability_criterion("sup bound refinement stability", sup_max));
  rep.criteria.push_back(stability_criterion("exterior gradient refinement stability", ext_max));
  rep.criteria.push_back(stability_criterion("tail bound refinement stability", tail_max));
  bool tail_ok = tail_errors.back() <= 0.01;
  std::ostringstream tail_detail;
  for (std::size_t k = 0; k < tail_errors.size(); ++k) {
    tail_detail << (k ? " -> " : "relative error ") << detail::fmt(tail_errors[k]);
    if (k > 0 && !(tail_errors[k] < tail_errors[k - 1])) tail_ok = false;
  }
  rep.criteria.push_back({"tail constant within 1%", tail_ok, tail_detail.str()});
  rep.tables = {summary, inst};
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Difference-quotient identity on the torus: for a homogeneous solution u on
// B_R and phi supported in B_{(R+r)/2},
//   E(u_h - u, phi) / |h| = 0,   u_h(x) = u(x + h).

struct TranslationCheck {
  double identity = 0.0;  ///< E(u_h - u, phi) / |h|
  double scale = 0.0;     ///< sqrt(E(u_h - u, u_h - u) E(phi, phi)) / |h|
  double relative = 0.0;
  double shifted_residual = 0.0;  ///< E(u_h, phi) relative to sqrt(E(u_h,u_h) E(phi,phi))
  double plain_residual = 0.0;    ///< E(u, phi) relative to sqrt(E(u,u) E(phi,phi))
};

inline TranslationCheck translation_check(const NonlocalForm& form, const GridFunction& u, const GridFunction& phi,
                                          const Lattice& shift) {
  const Grid& g = form.grid();
  if (!g.periodic()) throw PreconditionError("translation identity needs a torus grid");
  if (!form.translation_invariant()) throw PreconditionError("translation identity needs a translation-invariant kernel");
  GridFunction uh(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Lattice l = g.lattice(i);
    uh[i] = u[*g.index({l[0] + shift[0], l[1] + shift[1]})];
  }
  const double len = g.spacing() * std::sqrt(static_cast<double>(squared_length(shift, g.dim())));
  if (!(len > 0.0)) throw PreconditionError("shift must be nonzero");
  const GridFunction d = uh - u;
  TranslationCheck c;
  const double epp = bilinear(form, phi, phi);
  c.identity = bilinear(form, d, phi) / len;
  c.scale = std::sqrt(std::max(0.0, bilinear(form, d, d)) * epp) / len;
  c.relative = detail::safe_ratio(std::abs(c.identity), c.scale);
  c.shifted_residual = detail::safe_ratio(std::abs(bilinear(form, uh, phi)), std::sqrt(bilinear(form, uh, uh) * epp));
  c.plain_residual = detail::safe_ratio(std::abs(bilinear(form, u, phi)), std::sqrt(bilinear(form, u, u) * epp));
  return c;
}

inline ExperimentReport run_translation_identity(ExperimentParams params) {
  validate(params);
  require_translation_invariant(params);
  const auto refs = detail::or_default(params.refinements, {1.0 / 16});
  const int count = params.instances > 0 ? params.instances : 3;
  ExperimentReport rep;
  rep.name = "translation_identity";
  rep.params = params;
  Table inst{"instances", {"h", "instance", "identity", "scale", "relative", "plain_residual", "shifted_residual"}, {}};
  double worst = 0.0;
  for (double h : refs) {
    const int P = static_cast<int>(std::lround(params.torus_length / h));
    const Grid g = Grid::torus(params.dim, h, P);
    const double len = params.shift * h;
    if (!(len <= 0.5 * (params.R - params.r) + 1e-12)) throw PreconditionError("shift exceeds (R - r)/2");
    const Domain omega = centred_ball(g, params.R);
    const Domain support = centred_ball(g, 0.5 * (params.R + params.r));
    std::vector<TranslationCheck> out(count);
    for_instances(count, [&](int i) {
      Instance in = make_instance(params, g, omega, i, false, true);
      const auto u = solve_instance(in, omega, params.s, std::min(params.tolerance, 1e-12), params.seed, i).u;
      const GridFunction phi =
          piecewise_constant_field(g, detail::instance_seed(params.seed, i, detail::kTest), params.data_cell, support);
      out[i] = translation_check(assemble_form(in.A, g, params.s), u, phi, {params.shift, 0});
    });
    for (int i = 0; i < count; ++i) {
      const auto& c = out[i];
      inst.rows.push_back({h, static_cast<double>(i), c.identity, c.scale, c.relative, c.plain_residual,
                           c.shifted_residual});
      worst = std::max(worst, c.relative);
    }
  }
  rep.criteria.push_back({"identity to 1e-8 relative", worst <= 1e-8, "worst " + detail::fmt(worst)});
  rep.tables = {inst};
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Localization: lattice covering E_k = B_{sqrt n}(k), F_k = B_{2 sqrt n}(k),
// a partition of unity over configured balls, and the global bound
//   |grad^s u|_q <= C (|f|_q + |u|_q + |grad^s g|_q + |grad^s u|_2)  on V = B_6.

struct LatticeCovering {
  int overlap = 0;               ///< max #{k : x in F_k}
  std::vector<Lattice> centres;  ///< k with E_k meeting the box
};

inline LatticeCovering lattice_covering(const Grid& g) {
  const int dim = g.dim();
  const double rn = std::sqrt(static_cast<double>(dim));
  const int reach = static_cast<int>(std::ceil(g.half() * g.spacing() + rn));
  LatticeCovering cov;
  for (int a = -reach; a <= reach; ++a)
    for (int b = (dim == 2 ? -reach : 0); b <= (dim == 2 ? reach : 0); ++b) cov.centres.push_back({a, b});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.coord(i);
    int inE = 0, inF = 0;
    for (const auto& k : cov.centres) {
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) d2 += (x[c] - k[c]) * (x[c] - k[c]);
      if (d2 < dim) ++inE;
      if (d2 < 4.0 * dim) ++inF;
    }
    if (inE == 0) throw DomainError("covering incomplete: node not in any E_k");
    cov.overlap = std::max(cov.overlap, inF);
  }
  return cov;
}

/// phi_i = psi_i / sum_j psi_j with psi_i = (1 - |x-c_i|^2/r_i^2)^2 on B_{r_i}(c_i).
inline std::vector<GridFunction> partition_of_unity(const Grid& g, const std::vector<BallSpec>& balls, const Domain& U) {
  if (balls.empty()) throw DomainError("covering incomplete: no balls");
  std::vector<GridFunction> psi;
  for (const auto& b : balls) {
    if (!(b.radius > 0.0)) throw ConfigError("ball radius must be positive");
    GridFunction v(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.coord(i);
      double d2 = 0.0;
      for (int c = 0; c < g.dim(); ++c) d2 += (x[c] - b.center[c]) * (x[c] - b.center[c]);
      const double t = 1.0 - d2 / (b.radius * b.radius);
      v[i] = t > 0.0 ? t * t : 0.0;
    }
    psi.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    double sum = 0.0;
    for (const auto& v : psi) sum += v[i];
    if (!U.contains(i)) {
      for (auto& v : psi) v[i] = 0.0;
      continue;
    }
    if (sum == 0.0) throw DomainError("covering incomplete: node of U outside every ball");
    for (auto& v : psi) v[i] /= sum;
  }
  return psi;
}

inline ExperimentReport run_localization(ExperimentParams params) {
  validate(params);
  const auto refs = detail::or_default(params.refinements, {1.0 / 16, 1.0 / 32});
  const auto cover = params.cover.empty()
                         ? std::vector<BallSpec>{{{-0.5, 0.0}, 1.25}, {{0.5, 0.0}, 1.25}}
                         : params.cover;
  const double q = params.p;
  ExperimentReport rep;
  rep.name = "localization";
  rep.params = params;
  Table summary{"refinements",
                {"h", "overlap_N", "global_ratio", "max_local_ratio", "covering_slack", "overlap_slack",
                 "pou_error", "pou_assembled", "plain_norm", "rescaling_discrepancy"},
                {}};
  std::vector<double> global;
  bool covering = true, overlap = true, pou = true, triangle = true, rescale = true;
  int measured_N = 0;
  for (double h : refs) {
    const Grid g = Grid::box(params.dim, h, params.box_radius);
    const Domain V = centred_ball(g, 6.0);
    const Domain U = centred_ball(g, params.cover_region);
    const LatticeCovering cov = lattice_covering(g);
    measured_N = cov.overlap;

    const Instance in = make_instance(params, g, V, 0, true, false);
    const auto u = solve_instance(in, V, params.s, params.tolerance, params.seed, 0).u;
    const GridFunction gu = s_gradient(u, params.s, IntegrationRegion::whole(), &V).restricted(V);
    const GridFunction gg = s_gradient(in.g, params.s, IntegrationRegion::whole(), &V).restricted(V);

    // Local estimates over the lattice covering.
    const double dim = params.dim;
    double sum_local_q = 0.0, sum_F_energy = 0.0, max_local = 0.0;
    for (const auto& k : cov.centres) {
      const Point c{static_cast<double>(k[0]), static_cast<double>(k[1])};
      const Domain E = clipped_ball(g, c, std::sqrt(dim)) & V;
      if (E.empty()) continue;
      const Domain F = clipped_ball(g, c, 2.0 * std::sqrt(dim)) & V;
      const double lhs = lp_norm(gu, NormSpec::lp(q, E));
      const double fe = l2_over(gu, F);
      const double rhs = lp_norm(in.f, NormSpec::lp(q, F)) + lp_norm(gg, NormSpec::lp(q, F)) + fe;
      max_local = std::max(max_local, detail::safe_ratio(lhs, rhs));
      sum_local_q += std::pow(lhs, q);
      sum_F_energy += fe * fe;
    }
    const double lhs_global = lp_norm(gu, NormSpec::lp(q, V));
    const double energy = l2_over(gu, V);
    const double rhs_global = lp_norm(in.f, NormSpec::lp(q, V)) + lp_norm(u, NormSpec::lp(q, V)) +
                              lp_norm(gg, NormSpec::lp(q, V)) + energy;
    const double ratio = detail::safe_ratio(lhs_global, rhs_global);
    global.push_back(ratio);
    const double cov_slack = sum_local_q - std::pow(lhs_global, q);
    const double ovl_slack = cov.overlap * energy * energy - sum_F_energy;
    if (cov_slack < -1e-12 * sum_local_q) covering = false;
    if (ovl_slack < -1e-12 * sum_F_energy) overlap = false;

    // Partition of unity over the configured balls.
    const auto phi = partition_of_unity(g, cover, U);
    double pou_err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!U.contains(i)) continue;
      double sum = 0.0;
      for (const auto& v : phi) sum += v[i];
      pou_err = std::max(pou_err, std::abs(sum - 1.0));
    }
    if (!(pou_err <= 1e-12)) pou = false;
    const double plain = lp_norm(gu, NormSpec::lp(q, U));
    double assembled = 0.0, ball_sum = 0.0;
    for (std::size_t b = 0; b < phi.size(); ++b) {
      GridFunction piece(g);
      for (std::size_t i = 0; i < g.size(); ++i) piece[i] = std::abs(gu[i]) * phi[b][i];
      assembled += lp_norm(piece, NormSpec::lp(q, U));
      ball_sum += lp_norm(gu, NormSpec::lp(q, clipped_ball(g, cover[b].center, cover[b].radius)));
    }
    if (plain > assembled * (1.0 + 1e-12) || assembled > ball_sum * (1.0 + 1e-12)) triangle = false;

    // Local solves through the rescaled problem on B_6.
    const auto rs = rescaling_consistency(in.A, g, params.s, 0.5, {1.0, 0.0}, detail::instance_seed(params.seed, 0, detail::kF),
                                          params.data_cell);
    if (!(rs.max_discrepancy <= 1e-8)) rescale = false;
    summary.rows.push_back({h, static_cast<double>(cov.overlap), ratio, max_local, cov_slack, ovl_slack, pou_err,
                            assembled, plain, rs.max_discrepancy});
  }
  rep.criteria.push_back(stability_criterion("global ratio refinement stability", global));
  rep.criteria.push_back({"lattice covering bound", covering, "sum_k |grad^s u|_q^q over E_k >= |grad^s u|_q^q"});
  rep.criteria.push_back({"overlap bound", overlap, "measured N = " + std::to_string(measured_N)});
  rep.criteria.push_back({"partition of unity", pou, "sum phi_i = 1 on U to 1e-12"});
  rep.criteria.push_back({"partition triangle inequality", triangle, "plain <= assembled <= sum over balls"});
  rep.criteria.push_back({"rescaling consistency", rescale, "B_3(1) against rescaled B_6, r = 1/2"});
  rep.tables = {summary};
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"lp_regularity", "approximation", "level_set_decay", "holder",
                                              "linf", "translation_identity", "localization", "energy"};
  return names;
}

inline ExperimentReport run_experiment(const std::string& name, const ExperimentParams& params) {
  static const std::map<std::string, std::function<ExperimentReport(ExperimentParams)>> table{
      {"lp_regularity", run_lp_regularity}, {"approximation", run_approximation},
      {"level_set_decay", run_level_set_decay}, {"holder", run_holder},
      {"linf", run_linf}, {"translation_identity", run_translation_identity},
      {"localization", run_localization}, {"energy", run_energy}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown experiment '" + name + "'");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep = it->second(params);
  rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace fracreg
