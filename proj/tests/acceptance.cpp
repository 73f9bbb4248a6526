// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fracreg/fracreg.hpp"

using namespace fracreg;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

GridFunction hashed_field(const Grid& g, std::uint64_t seed, double lo, double hi, Exterior ext = Exterior::zero()) {
  GridFunction u(g, ext);
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = lo + (hi - lo) * unit_from_hash(hash_combine(seed, i, 0xacc, 0));
  return u;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i] / n, mb += b[i] / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

bool within_factor(double a, double b, double factor) { return a > 0 && b > 0 && a <= factor * b && b <= factor * a; }

// 1. Tail constant: int_{R^2 \ B_1} |z|^{-3} dz = 2 pi.
Outcome tail_constant() {
  Outcome o;
  const double exact = 2.0 * std::numbers::pi;
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const double q = tail_integral(GridFunction::constant(Grid::box(2, h, 32.0), 1.0), 1.0, 0.5);
    const double err = std::abs(q - exact) / exact;
    if (!(err < prev)) o.pass = false;
    prev = err;
    o.detail += (o.detail.empty() ? "rel.err " : " -> ") + fmt(err);
  }
  if (!(prev <= 0.01)) o.pass = false;
  return o;
}

// 2. Plane waves on the torus are eigenfunctions with eigenvalue spectral_symbol.
double plane_wave_error(const NonlocalForm& form, int k0, int k1, double& scale) {
  const Grid& g = form.grid();
  const double L = g.per_axis() * g.spacing();
  const double symbol = spectral_symbol(form, {k0, k1});
  const auto wave = GridFunction::from(
      g, [&](const Point& p) { return std::sin(2.0 * std::numbers::pi * (k0 * p[0] + k1 * p[1]) / L + 0.3); });
  const auto lu = apply_operator(form, wave);
  double err = 0.0, amp = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err = std::max(err, std::abs(lu[i] - symbol * wave[i]));
    amp = std::max(amp, std::abs(wave[i]));
  }
  scale = std::max(scale, symbol * amp);
  return err;
}

Outcome spectral_oracle() {
  Outcome o;
  double worst = 0.0;
  {
    const Grid g = Grid::torus(1, 1.0 / 8, 64);
    for (const auto& k : {kernels::constant(1), kernels::oscillatory(1, 2.0), kernels::rough(1, 2.0, 5)}) {
      const auto form = assemble_form(k, g, 0.25);
      double scale = 0.0, err = 0.0;
      for (int k0 = 0; k0 < 64; ++k0) err = std::max(err, plane_wave_error(form, k0, 0, scale));
      worst = std::max(worst, err / scale);
    }
  }
  {
    const Grid g = Grid::torus(2, 1.0 / 4, 32);
    for (const auto& k : {kernels::oscillatory(2, 2.0), kernels::rough(2, 2.0, 5)}) {
      const auto form = assemble_form(k, g, 0.4);
      double scale = 0.0, err = 0.0;
      for (int k0 = 0; k0 <= 16; ++k0)
        for (int k1 = -15; k1 <= 16; ++k1) err = std::max(err, plane_wave_error(form, k0, k1, scale));
      worst = std::max(worst, err / scale);
    }
  }
  o.pass = worst <= 1e-10;
  o.detail = "max relative mismatch " + fmt(worst);
  return o;
}

// 3. Constant kernel, f = 1 on B_1: solution follows (1 - x^2)_+^s.
double profile_correlation(double h) {
  const double s = 0.25;
  const Grid g = Grid::box(1, h, 2.0);
  const Domain omega = build_ball_domain(g, {0.0, 0.0}, 1.0);
  const auto u = solve_dirichlet(kernels::constant(1), GridFunction::constant(g, 1.0), GridFunction(g), omega, s).u;
  std::vector<double> computed, shape;
  for (auto i : omega.indices()) {
    const double x = g.coord(i)[0];
    computed.push_back(u[i]);
    shape.push_back(std::pow(1.0 - x * x, s));
  }
  return pearson(computed, shape);
}

Outcome closed_form_solve() {
  const double coarse = profile_correlation(1.0 / 32), fine = profile_correlation(1.0 / 64);
  return {fine >= 0.99 && fine > coarse, "correlation " + fmt(coarse) + " -> " + fmt(fine)};
}

// 4. (L u, v)_h = E(u, v) and E_A(w, w) >= E_const(w, w) / lambda.
Outcome duality_coercivity() {
  Outcome o;
  double worst = 0.0;
  int coercive_failures = 0, weight_failures = 0;
  for (int pair = 0; pair < 20; ++pair) {
    const int dim = 1 + pair % 2;
    const Grid g = Grid::box(dim, 0.25, dim == 1 ? 4.0 : 1.5);
    const auto k = pair % 4 < 2 ? kernels::rough(dim, 3.0, 40 + pair) : kernels::checkerboard(dim, 2.0);
    const auto form = assemble_form(k, g, 0.3);
    const Domain support = build_ball_domain(g, {0.25, 0.0}, 1.0);
    const auto u = hashed_field(g, 100 + pair, -1.0, 1.0, Exterior::constant_value(0.7));
    const auto v = hashed_field(g, 200 + pair, -1.0, 1.0).restricted(support);
    const double lhs = inner_product(apply_operator(form, u, support), v), rhs = bilinear(form, u, v);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));

    const auto w = hashed_field(g, 300 + pair, -1.0, 1.0, Exterior::constant_value(0.2));
    const auto reference = assemble_form(kernels::constant(dim), g, 0.3);
    if (!(bilinear(form, w, w) >= bilinear(reference, w, w) / k.lambda())) ++coercive_failures;
    if (k.translation_invariant())
      for (std::size_t j = 0; j < form.table().size(); ++j)
        if (!(form.weight(Lattice{0, 0}, j) >= reference.weight(Lattice{0, 0}, j) / k.lambda() * (1 - 1e-15)))
          ++weight_failures;
  }
  o.pass = worst <= 1e-10 && coercive_failures == 0 && weight_failures == 0;
  o.detail = "duality gap " + fmt(worst) + ", coercivity failures " + std::to_string(coercive_failures) +
             ", weight-bound failures " + std::to_string(weight_failures);
  return o;
}

// 5. Maximal function: M f >= |f|, weak/strong constants stable, indicator value 1/4.
Outcome maximal_suite() {
  Outcome o;
  double weak[2] = {0, 0}, strong[2] = {0, 0};
  int domination_failures = 0;
  for (int level = 0; level < 2; ++level) {
    const double h = level == 0 ? 1.0 / 16 : 1.0 / 32;
    const Grid g = Grid::box(1, h, 4.0);
    const Domain omega = build_ball_domain(g, {0.0, 0.0}, 2.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto f = piecewise_constant_field(g, 500 + seed, 0.5, omega);
      const auto mf = maximal_function(f, omega);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (omega.contains(i) && !(mf[i] >= std::abs(f[i]))) ++domination_failures;
      for (double t : {0.25, 0.5, 1.0}) weak[level] = std::max(weak[level], weak_type_ratio(mf, f, omega, t));
      strong[level] = std::max(strong[level], strong_type_ratio(mf, f, omega, 2.0));
    }
  }
  const Grid g = Grid::box(1, 1.0 / 32, 4.0);
  const auto ind = GridFunction::from(g, [](const Point& p) { return std::abs(p[0]) <= 1.0 ? 1.0 : 0.0; });
  const double at3 = maximal_function(ind, full_domain(g))[*g.index(g.nearest({3.0, 0.0}))];
  o.pass = domination_failures == 0 && within_factor(weak[0], weak[1], 2.0) && within_factor(strong[0], strong[1], 2.0) &&
           std::abs(at3 - 0.25) <= 0.05 * 0.25;
  o.detail = "domination failures " + std::to_string(domination_failures) + ", weak " + fmt(weak[0]) + " -> " +
             fmt(weak[1]) + ", strong " + fmt(strong[0]) + " -> " + fmt(strong[1]) + ", M(1_[-1,1])(3) = " + fmt(at3);
  return o;
}

// 6. Layer-cake identity and the level-set sandwich.
Outcome level_set_machinery() {
  Outcome o;
  const Grid g = Grid::box(1, 1.0 / 32, 2.0);
  const Domain omega = build_ball_domain(g, {0.0, 0.0}, 1.5);
  double worst = 0.0;
  int sandwich_failures = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto f = hashed_field(g, 700 + seed, 0.0, 8.0);
    for (std::size_t i = 0; i < g.size(); i += 5) f[i] = std::round(f[i]);
    const double p = 1.0 + static_cast<double>(seed % 6);
    const double cake = layer_cake_norm(f, NormSpec::lp(p, omega));
    const double direct = std::pow(lp_norm(f, NormSpec::lp(p, omega)), p);
    worst = std::max(worst, std::abs(cake - direct) / direct);
    for (double beta : {1.5, 2.0, 3.0}) {
      const auto prof = level_set_sum(f, omega, 0.5, beta, p);
      if (!prof.lower_ok || !prof.upper_ok) ++sandwich_failures;
    }
  }
  o.pass = worst <= 1e-10 && sandwich_failures == 0;
  o.detail = "layer-cake gap " + fmt(worst) + ", sandwich failures " + std::to_string(sandwich_failures);
  return o;
}

std::string criteria_detail(const ExperimentReport& r) {
  std::string d;
  for (const auto& c : r.criteria) {
    if (c.name == "finite constants") continue;
    d += (d.empty() ? "" : "; ") + c.name + ": " + c.detail;
  }
  return d;
}

Outcome experiment_outcome(const ExperimentReport& r, const std::vector<std::string>& required) {
  Outcome o{r.passed(), criteria_detail(r)};
  for (const auto& name : required) {
    const auto* c = r.criterion(name);
    if (!c || !c->pass) o.pass = false;
  }
  return o;
}

// 7. Energy estimate.
Outcome energy_estimate() {
  ExperimentParams p;
  p.kernel = "rough";
  p.instances = 20;
  const auto r = run_experiment("energy", p);
  return experiment_outcome(r, {"max ratio grows by less than 2 per refinement", "finite constants"});
}

// 8. Approximation by a homogeneous solution.
Outcome approximation() {
  ExperimentParams p;
  p.deltas = {1e-1, 1e-2, 1e-3};
  const auto r = run_experiment("approximation", p);
  return experiment_outcome(r, {"difference linear in delta (20%)", "N0 refinement stability"});
}

// 9. L^p regularity.
Outcome lp_regularity() {
  ExperimentParams p;
  p.dim = 1;
  p.s = 0.25;
  p.kernel = "rough";
  p.instances = 10;
  p.p_grid = {3.0, 4.0, 6.0};
  p.refinements = {1.0 / 16, 1.0 / 32, 1.0 / 64};
  const auto r = run_experiment("lp_regularity", p);
  return experiment_outcome(r, {"p=3 refinement stability", "p=4 refinement stability", "p=6 refinement stability"});
}

// 10. Translation difference-quotient identity; refusal for a general kernel.
Outcome translation_identity() {
  ExperimentParams p;
  Outcome o = experiment_outcome(run_experiment("translation_identity", p), {"identity to 1e-8 relative"});
  p.kernel = "checkerboard";
  bool refused = false;
  try {
    run_experiment("translation_identity", p);
  } catch (const PreconditionError&) {
    refused = true;
  }
  if (!refused) o.pass = false;
  o.detail += refused ? "; checkerboard refused" : "; checkerboard NOT refused";
  return o;
}

// 11. Hoelder estimate.
Outcome holder() {
  ExperimentParams p;
  p.alpha_factors = {0.45, 0.9};
  p.instances = 5;
  const auto r = run_experiment("holder", p);
  return experiment_outcome(r, {"alpha=0.225 refinement stability", "alpha=0.45 refinement stability"});
}

// 12. Identical (seed, config) gives byte-identical JSON, whatever the worker count.
Outcome determinism() {
  Outcome o;
  const unsigned saved = worker_count();
  int mismatches = 0;
  for (const auto& name : experiment_names()) {
    ExperimentParams p;
    p.seed = 7;
    const std::string first = report_text(run_experiment(name, p));
    const std::string second = report_text(run_experiment(name, p));
    set_worker_count(saved > 1 ? 1 : 4);
    const std::string third = report_text(run_experiment(name, p));
    set_worker_count(saved);
    if (first != second || first != third) {
      ++mismatches;
      o.detail += name + " differs; ";
    }
  }
  o.pass = mismatches == 0;
  o.detail += std::to_string(experiment_names().size()) + " experiments rerun, " + std::to_string(mismatches) +
              " mismatches";
  return o;
}

struct Check {
  int id;
  const char* name;
  double budget_seconds;  ///< 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  set_worker_count(std::max(1u, std::thread::hardware_concurrency()));
  const std::vector<Check> criteria{
      {1, "tail constant 2 pi within 1% at h = 1/32, monotone error", 30, tail_constant},
      {2, "spectral oracle on 64 and 32x32 tori to 1e-10", 10, spectral_oracle},
      {3, "closed-form profile correlation >= 0.99, improving", 60, closed_form_solve},
      {4, "duality to 1e-10 and exact coercivity on 20 instances", 0, duality_coercivity},
      {5, "maximal function domination, stability, indicator 1/4", 0, maximal_suite},
      {6, "layer-cake to 1e-10 and level-set sandwich", 0, level_set_machinery},
      {7, "energy estimate ratio growth < 2", 600, energy_estimate},
      {8, "approximation linear in delta, N0 stable", 0, approximation},
      {9, "L^p regularity stable for p = 3, 4, 6", 1800, lp_regularity},
      {10, "translation identity to 1e-8, checkerboard refused", 0, translation_identity},
      {11, "Hoelder ratio stable for alpha = 0.45, 0.9 of min(2s,1)", 0, holder},
      {12, "deterministic JSON reports", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt(c.budget_seconds) + " s budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %2d: %s [%s] (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
