#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracreg/assembly.hpp"
#include "fracreg/common.hpp"
#include "fracreg/grid.hpp"

namespace fracreg {

// ---------------------------------------------------------------------------
// Hardy-Littlewood maximal function on the lattice.
//
// Balls are open, B_rho(x) = {y : |x - y| < rho}, with radii rho = k h for
// k = 1 .. 2 floor(R_box/h). The smallest ball is the singleton {x}. Averages
// divide by the number of lattice points in the ball, counting those outside
// the box, where the zero extension vanishes.

namespace detail {

/// Largest integer d with d*d < m, for m >= 1.
inline long isqrt_below(long m) {
  long d = static_cast<long>(std::sqrt(static_cast<double>(m)));
  while (d * d >= m) --d;
  while ((d + 1) * (d + 1) < m) ++d;
  return d;
}

}  // namespace detail

/// Number of lattice points d with |d|^2 < k^2.
inline long lattice_ball_count(int dim, long k) {
  if (dim == 1) return 2 * k - 1;
  long count = 0;
  for (long dy = -(k - 1); dy <= k - 1; ++dy) count += 2 * detail::isqrt_below(k * k - dy * dy) + 1;
  return count;
}

/// M_omega f at the nodes of `targets` (default: every node), zero elsewhere.
inline GridFunction maximal_function(const GridFunction& f, const Domain& omega, const Domain* targets = nullptr) {
  const Grid& g = f.grid();
  require_same_grid(g, omega.grid());
  if (targets) require_same_grid(g, targets->grid());
  const int dim = g.dim();
  const int P = g.per_axis();
  std::vector<double> a(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) a[i] = omega.contains(i) ? std::abs(f[i]) : 0.0;

  // Support bounding box in index coordinates.
  int lo0 = P, hi0 = -1, lo1 = P, hi1 = -1;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (a[i] == 0.0) continue;
    const int r = dim == 1 ? static_cast<int>(i) : static_cast<int>(i / P);
    const int c = dim == 1 ? 0 : static_cast<int>(i % P);
    lo0 = std::min(lo0, r), hi0 = std::max(hi0, r);
    lo1 = std::min(lo1, c), hi1 = std::max(hi1, c);
  }
  GridFunction out(g);
  if (hi0 < 0) return out;

  // Prefix sums along the last axis.
  const int rows = dim == 1 ? 1 : P;
  std::vector<double> prefix(static_cast<std::size_t>(rows) * (P + 1), 0.0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < P; ++c)
      prefix[r * (P + 1) + c + 1] = prefix[r * (P + 1) + c] + a[static_cast<std::size_t>(r) * P + c];
  auto row_sum = [&](int r, int c0, int c1) {
    c0 = std::max(c0, 0), c1 = std::min(c1, P - 1);
    if (c0 > c1) return 0.0;
    return prefix[r * (P + 1) + c1 + 1] - prefix[r * (P + 1) + c0];
  };

  const long kmax = 2L * g.half();
  std::vector<double> counts(kmax + 1, 0.0);
  for (long k = 1; k <= kmax; ++k) counts[k] = static_cast<double>(lattice_ball_count(dim, k));

  parallel_for(0, g.size(), [&](std::size_t i) {
    if (targets && !targets->contains(i)) return;
    const int r0 = dim == 1 ? static_cast<int>(i) : static_cast<int>(i / P);
    const int c0 = dim == 1 ? 0 : static_cast<int>(i % P);
    // Squared lattice distance to the farthest corner of the support box.
    const long d0 = std::max(std::abs(r0 - lo0), std::abs(r0 - hi0));
    const long d1 = dim == 1 ? 0 : std::max(std::abs(c0 - lo1), std::abs(c0 - hi1));
    const long cover = d0 * d0 + d1 * d1;
    double best = a[i];  // radius h: the singleton
    for (long k = 2; k <= kmax; ++k) {
      double sum = 0.0;
      if (dim == 1) {
        sum = row_sum(0, r0 - static_cast<int>(k - 1), r0 + static_cast<int>(k - 1));
      } else {
        for (long dy = -(k - 1); dy <= k - 1; ++dy) {
          const long r = r0 + dy;
          if (r < lo0 || r > hi0) continue;
          const long w = detail::isqrt_below(k * k - dy * dy);
          sum += row_sum(static_cast<int>(r), c0 - static_cast<int>(w), c0 + static_cast<int>(w));
        }
      }
      best = std::max(best, sum / counts[k]);
      if (k * k > cover) break;  // larger balls only add empty points
    }
    out[i] = best;
  });
  return out;
}

struct MaximalScalingReport {
  double scale = 1.0;
  Lattice shift{0, 0};
  double max_discrepancy = 0.0;
  std::size_t compared = 0;
};

/// Scaling identity M f_{r,y}(x) = M f(r x + y) with f_{r,y}(x) = f(r x + y).
///
/// For r = 2^j the rescaled grid box(h/r, R/r) has the same index layout and
/// x -> r x + y is the index shift by y, so both sides are computed and
/// compared at every node where r x + y lies in the original box.
inline MaximalScalingReport maximal_scaling_check(const GridFunction& f, const Domain& omega, double r,
                                                  const Lattice& shift) {
  int exponent = 0;
  if (!(r > 0.0) || std::frexp(r, &exponent) != 0.5) throw PreconditionError("incompatible scale");
  const Grid& g = f.grid();
  require_same_grid(g, omega.grid());
  if (g.periodic()) throw PreconditionError("scaling check needs a box grid");
  const Grid gs = Grid::box(g.dim(), g.spacing() / r, g.box_radius() / r);
  if (gs.per_axis() != g.per_axis()) throw PreconditionError("incompatible scale");

  GridFunction fs(gs);
  Domain os(gs);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const Lattice l = gs.lattice(i);
    if (auto j = g.index({l[0] + shift[0], l[1] + shift[1]})) {
      fs[i] = f[*j];
      if (omega.contains(*j)) os.insert(i);
    }
  }
  // The shift must not push part of f_omega out of the rescaled box.
  double lost = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!omega.contains(j) || f[j] == 0.0) continue;
    const Lattice l = g.lattice(j);
    if (!gs.index({l[0] - shift[0], l[1] - shift[1]})) lost += 1.0;
  }
  if (lost > 0.0) throw PreconditionError("shift moves the support outside the box");

  const GridFunction m = maximal_function(f, omega);
  const GridFunction ms = maximal_function(fs, os);
  MaximalScalingReport rep;
  rep.scale = r;
  rep.shift = shift;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const Lattice l = gs.lattice(i);
    auto j = g.index({l[0] + shift[0], l[1] + shift[1]});
    if (!j) continue;
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(ms[i] - m[*j]));
    ++rep.compared;
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct NormSpec {
  double p = 2.0;
  std::optional<Domain> region;  ///< default: every node
  double s = 0.5;

  static NormSpec lp(double p, std::optional<Domain> region = std::nullopt) { return {p, std::move(region), 0.5}; }
};

namespace detail {
inline void check_norm_spec(const NormSpec& spec, const Grid& g) {
  if (!(spec.p >= 1.0)) throw PreconditionError("norm exponent must be >= 1");
  if (spec.region) require_same_grid(g, spec.region->grid());
}
inline bool in_region(const NormSpec& spec, std::size_t i) { return !spec.region || spec.region->contains(i); }
}  // namespace detail

/// (h^n sum |f|^p)^{1/p} over the region; p = inf gives the max.
inline double lp_norm(const GridFunction& f, const NormSpec& spec) {
  detail::check_norm_spec(spec, f.grid());
  if (std::isinf(spec.p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (detail::in_region(spec, i)) m = std::max(m, std::abs(f[i]));
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (detail::in_region(spec, i)) acc += std::pow(std::abs(f[i]), spec.p);
  return std::pow(acc * f.grid().cell_volume(), 1.0 / spec.p);
}

/// |f|_p^p from the distribution function, p int_0^inf t^{p-1} |{f > t}| dt,
/// integrated exactly: between consecutive distinct values the distribution
/// function is constant.
inline double layer_cake_norm(const GridFunction& f, const NormSpec& spec) {
  detail::check_norm_spec(spec, f.grid());
  if (std::isinf(spec.p)) throw PreconditionError("layer-cake needs a finite exponent");
  std::vector<double> vals;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!detail::in_region(spec, i)) continue;
    if (f[i] < 0.0) throw PreconditionError("negative values");
    if (f[i] > 0.0) vals.push_back(f[i]);
  }
  std::sort(vals.begin(), vals.end());
  const double h = f.grid().cell_volume();
  double total = 0.0, prev = 0.0;
  std::size_t i = 0;
  while (i < vals.size()) {
    const double v = vals[i];
    // |{f > t}| for t in [prev, v): every value >= v.
    const double mu = h * static_cast<double>(vals.size() - i);
    total += mu * (std::pow(v, spec.p) - std::pow(prev, spec.p));
    prev = v;
    while (i < vals.size() && vals[i] == v) ++i;
  }
  return total;
}

/// Level-set sum S = sum_k beta^{kp} |{x in omega : |f(x)| > tau beta^k}| and
/// the sandwich with explicit constants from the layer-cake decomposition.
///
/// Splitting omega into {f <= tau beta} and the shells
/// {tau beta^k < f <= tau beta^{k+1}} and using summation by parts:
///   |f|_p^p <= tau^p beta^p |omega| + tau^p (beta^p - 1) S,
///   |f|_p^p >= tau^p (1 - beta^{-p}) S.
struct LevelSetProfile {
  double tau = 1.0;
  double beta = 2.0;
  double p = 2.0;
  std::vector<double> measures;  ///< k = 1, 2, ...
  double sum_S = 0.0;
  double norm_pp = 0.0;          ///< |f|_{L^p(omega)}^p
  double omega_measure = 0.0;
  double lower_bound = 0.0;      ///< tau^p (1 - beta^{-p}) S
  double upper_bound = 0.0;      ///< tau^p beta^p |omega| + tau^p (beta^p - 1) S
  bool lower_ok = true;
  bool upper_ok = true;
};

inline LevelSetProfile level_set_sum(const GridFunction& f, const Domain& omega, double tau, double beta, double p) {
  if (!(tau > 0.0)) throw PreconditionError("tau must be positive");
  if (!(beta > 1.0)) throw PreconditionError("beta must exceed 1");
  if (!(p > 0.0)) throw PreconditionError("p must be positive");
  require_same_grid(f.grid(), omega.grid());
  LevelSetProfile prof;
  prof.tau = tau;
  prof.beta = beta;
  prof.p = p;
  const double h = f.grid().cell_volume();
  std::vector<double> vals;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!omega.contains(i)) continue;
    vals.push_back(std::abs(f[i]));
    prof.norm_pp += std::pow(std::abs(f[i]), p);
  }
  prof.norm_pp *= h;
  prof.omega_measure = h * static_cast<double>(vals.size());
  std::sort(vals.begin(), vals.end());
  constexpr int kCap = 100000;
  for (int k = 1; k <= kCap; ++k) {
    const double t = tau * std::pow(beta, k);
    const auto above = static_cast<double>(vals.end() - std::upper_bound(vals.begin(), vals.end(), t));
    if (above == 0.0) break;
    prof.measures.push_back(h * above);
    prof.sum_S += std::pow(beta, k * p) * h * above;
  }
  const double tp = std::pow(tau, p), bp = std::pow(beta, p);
  prof.lower_bound = tp * (1.0 - 1.0 / bp) * prof.sum_S;
  prof.upper_bound = tp * bp * prof.omega_measure + tp * (bp - 1.0) * prof.sum_S;
  constexpr double slack = 1e-12;
  prof.lower_ok = prof.lower_bound <= prof.norm_pp * (1.0 + slack);
  prof.upper_ok = prof.norm_pp <= prof.upper_bound * (1.0 + slack);
  return prof;
}

// ---------------------------------------------------------------------------

/// t |{x in omega : M_omega f(x) > t}| / |f|_{L^1(omega)}, given Mf.
inline double weak_type_ratio(const GridFunction& mf, const GridFunction& f, const Domain& omega, double t) {
  double l1 = 0.0, count = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!omega.contains(i)) continue;
    l1 += std::abs(f[i]);
    if (mf[i] > t) count += 1.0;
  }
  if (l1 == 0.0) return 0.0;
  return t * count / l1;
}

/// |M_omega f|_{L^p(omega)} / |f|_{L^p(omega)}, given Mf.
inline double strong_type_ratio(const GridFunction& mf, const GridFunction& f, const Domain& omega, double p) {
  const double den = lp_norm(f, NormSpec::lp(p, omega));
  if (den == 0.0) return 0.0;
  return lp_norm(mf, NormSpec::lp(p, omega)) / den;
}

// ---------------------------------------------------------------------------

struct VitaliReport {
  bool hypothesis_ok = true;
  std::string failed_clause;  ///< "measure", "density", or empty
  bool conclusion_checked = false;
  bool conclusion_ok = false;
  double measure_E = 0.0;
  double measure_F = 0.0;
  double bound = 0.0;  ///< 10^n eps |F|
  std::size_t balls_checked = 0;
};

/// Vitali covering audit: if |E| < eps |B_1| and every ball B_r(x), x in B_1,
/// with |E cap B_r(x)| >= eps |B_r(x)| satisfies B_r(x) cap B_1 subset F, then
/// |E| <= 10^n eps |F|. The quantifier over balls is replaced by grid centres
/// in B_1 and dyadic radii 2^{-j} in [h, 1).
inline VitaliReport vitali_audit(const Domain& E, const Domain& F, const Domain& unit_ball, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0,1)");
  const Grid& g = unit_ball.grid();
  require_same_grid(g, E.grid());
  require_same_grid(g, F.grid());
  if (!E.subset_of(F) || !F.subset_of(unit_ball)) throw PreconditionError("expected E subset F subset B_1");
  const int dim = g.dim();
  VitaliReport rep;
  rep.measure_E = measure(E);
  rep.measure_F = measure(F);
  rep.bound = std::pow(10.0, dim) * eps * rep.measure_F;
  if (!(rep.measure_E < eps * measure(unit_ball))) {
    rep.hypothesis_ok = false;
    rep.failed_clause = "measure";
    return rep;
  }
  const auto centres = unit_ball.indices();
  for (double r = 0.5; r >= g.spacing() - 1e-12; r *= 0.5) {
    const double rr = r / g.spacing();
    const int reach = static_cast<int>(std::ceil(rr));
    std::vector<Lattice> ball;
    for (int i = -reach; i <= reach; ++i)
      for (int j = (dim == 1 ? 0 : -reach); j <= (dim == 1 ? 0 : reach); ++j)
        if (static_cast<double>(static_cast<long>(i) * i + static_cast<long>(j) * j) < rr * rr) ball.push_back({i, j});
    const double ball_count = static_cast<double>(ball.size());
    for (std::size_t c : centres) {
      const Lattice x = g.lattice(c);
      double hits = 0.0;
      for (const auto& d : ball)
        if (auto j = g.index({x[0] + d[0], x[1] + d[1]}); j && E.contains(*j)) hits += 1.0;
      ++rep.balls_checked;
      if (hits < eps * ball_count) continue;
      for (const auto& d : ball) {
        auto j = g.index({x[0] + d[0], x[1] + d[1]});
        if (j && unit_ball.contains(*j) && !F.contains(*j)) {
          rep.hypothesis_ok = false;
          rep.failed_clause = "density";
          return rep;
        }
      }
    }
  }
  rep.conclusion_checked = true;
  rep.conclusion_ok = rep.measure_E <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------

inline constexpr std::size_t kPairRegionCap = 100000;

/// max over node pairs x != y in region of |u(x)-u(y)| / |x-y|^alpha.
inline double holder_seminorm(const GridFunction& u, double alpha, const Domain& region) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("Hoelder exponent must lie in (0,1)");
  const Grid& g = u.grid();
  require_same_grid(g, region.grid());
  const auto nodes = region.indices();
  if (nodes.empty()) throw DomainError("empty region");
  if (nodes.size() > kPairRegionCap) throw PreconditionError("region exceeds the pair-sum cap");
  std::vector<double> best(nodes.size(), 0.0);
  parallel_for(0, nodes.size(), [&](std::size_t a) {
    const Point x = g.coord(nodes[a]);
    double m = 0.0;
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const Point y = g.coord(nodes[b]);
      double d2 = 0.0;
      for (int k = 0; k < g.dim(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
      m = std::max(m, std::abs(u[nodes[a]] - u[nodes[b]]) / std::pow(d2, 0.5 * alpha));
    }
    best[a] = m;
  }, 16);
  return *std::max_element(best.begin(), best.end());
}

/// Double sum over region x region of G(y-x) |u(x)-u(y)|^p with exponent
/// n + s p and the touching-cell correction. No root is taken.
inline double slobodeckij_seminorm(const GridFunction& u, const Domain& region, double s, double p) {
  if (!(p >= 1.0)) throw PreconditionError("p must be >= 1");
  require_order(s);
  const Grid& g = u.grid();
  require_same_grid(g, region.grid());
  const auto nodes = region.indices();
  if (nodes.size() > kPairRegionCap) throw PreconditionError("region exceeds the pair-sum cap");
  const GeometricLookup geom(g, g.dim() + s * p, g.periodic() ? g.per_axis() : 2 * g.half());
  std::vector<double> partial(nodes.size(), 0.0);
  parallel_for(0, nodes.size(), [&](std::size_t a) {
    const Lattice x = g.lattice(nodes[a]);
    double acc = 0.0;
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (a == b) continue;
      const Lattice y = g.lattice(nodes[b]);
      const double d = std::abs(u[nodes[a]] - u[nodes[b]]);
      if (d == 0.0) continue;
      acc += geom({y[0] - x[0], y[1] - x[1]}) * (p == 2.0 ? d * d : std::pow(d, p));
    }
    partial[a] = acc;
  }, 16);
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

/// |u - mean_omega u|^2_{L^2(omega)} / (double sum over omega x omega).
inline double poincare_quotient(const GridFunction& u, const Domain& omega, double s) {
  const double energy = slobodeckij_seminorm(u, omega, s, 2.0);
  if (!(energy > 0.0)) throw PreconditionError("zero seminorm");
  const double mean = mean_over(u, omega);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (omega.contains(i)) acc += (u[i] - mean) * (u[i] - mean);
  return acc * u.grid().cell_volume() / energy;
}

}  // namespace fracreg
