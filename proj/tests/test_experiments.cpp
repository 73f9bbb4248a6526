#include <gtest/gtest.h>

#include "fracreg/experiments.hpp"
#include "fracreg/report.hpp"

using namespace fracreg;

namespace {

std::vector<double> vec(const GridFunction& u) { return {u.values().begin(), u.values().end()}; }

ExperimentParams quick() {
  ExperimentParams p;
  p.instances = 2;
  p.refinements = {1.0 / 16, 1.0 / 32};
  return p;
}

double column_max(const Table& t, const std::string& col) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), col);
  EXPECT_NE(it, t.columns.end());
  const auto k = static_cast<std::size_t>(it - t.columns.begin());
  double m = 0.0;
  for (const auto& r : t.rows) m = std::max(m, std::abs(r[k]));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters and generators.

TEST(Params, Eps1IsTenToTheNTimesEps) {
  for (int dim : {1, 2}) {
    ExperimentParams p;
    p.dim = dim;
    p.s = 0.25;
    p.eps = 2e-4;
    validate(p);
    EXPECT_EQ(p.eps1, std::pow(10.0, dim) * 2e-4);
    validate(p);  // idempotent
    p.eps1 *= 1.5;
    EXPECT_THROW(validate(p), ConfigError);
  }
}

TEST(Params, PreconditionsRefuseDegenerateCalls) {
  ExperimentParams p = quick();
  p.p = 2.0;
  EXPECT_THROW(run_lp_regularity(p), ConfigError);
  p = quick();
  p.p_grid = {2.0, 4.0};
  EXPECT_THROW(run_lp_regularity(p), ConfigError);
  p = quick();
  p.lambda = 0.5;
  EXPECT_THROW(run_energy(p), ConfigError);
  p = quick();
  p.alpha_factors = {1.0};
  EXPECT_THROW(run_holder(p), PreconditionError);
  p = quick();
  p.s = 0.5;
  EXPECT_THROW(run_linf(p), ConfigError);
  EXPECT_THROW(run_experiment("nonesuch", quick()), ConfigError);
}

TEST(Params, TranslationInvariantExperimentsRefuseCheckerboard) {
  ExperimentParams p = quick();
  p.kernel = "checkerboard";
  EXPECT_THROW(run_translation_identity(p), PreconditionError);
  EXPECT_THROW(run_lp_regularity(p), PreconditionError);
  EXPECT_THROW(run_approximation(p), PreconditionError);
  EXPECT_THROW(run_holder(p), PreconditionError);
  p.instances = 1;
  EXPECT_NO_THROW(run_energy(p));  // general kernels are allowed here
}

TEST(Generators, FieldsAreSeededAndIndependentOfSpacing) {
  const Grid coarse = Grid::box(1, 1.0 / 8, 8.0), fine = Grid::box(1, 1.0 / 16, 8.0);
  const Domain dc = build_ball_domain(coarse, {0.0, 0.0}, 6.0), df = build_ball_domain(fine, {0.0, 0.0}, 6.0);
  const auto a = piecewise_constant_field(coarse, 5, 0.5, dc), b = piecewise_constant_field(fine, 5, 0.5, df);
  const auto la = lipschitz_field(coarse, 5, 0.5, 6.5, 7.0), lb = lipschitz_field(fine, 5, 0.5, 6.5, 7.0);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const auto j = *fine.index({2 * coarse.lattice(i)[0], 0});
    EXPECT_EQ(a[i], b[j]);
    EXPECT_DOUBLE_EQ(la[i], lb[j]);
  }
  EXPECT_NE(vec(piecewise_constant_field(coarse, 6, 0.5, dc)), vec(a));
}

TEST(Generators, LipschitzFieldIsLipschitzAndCutOff) {
  const Grid g = Grid::box(2, 1.0 / 8, 8.0);
  const auto u = lipschitz_field(g, 3, 0.5, 6.5, 7.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.coord(i);
    if (norm(x, 2) >= 7.0) {
      EXPECT_EQ(u[i], 0.0);
    }
    EXPECT_LE(std::abs(u[i]), 1.0);
    const Lattice l = g.lattice(i);
    if (const auto j = g.index({l[0] + 1, l[1]})) worst = std::max(worst, std::abs(u[*j] - u[i]) / g.spacing());
  }
  // slope <= 2/cell from the interpolant plus 1/(outer - inner) from the ramp
  EXPECT_LE(worst, 2.0 / 0.5 + 2.0 + 1e-12);
}

TEST(Stability, BandIsTwoSidedAndAnchoredAtCoarsest) {
  EXPECT_TRUE(stability_criterion("x", {1.0, 1.9, 1.95}).pass);
  EXPECT_FALSE(stability_criterion("x", {1.0, 2.1}).pass);
  EXPECT_FALSE(stability_criterion("x", {1.0, 0.4}).pass);
  EXPECT_FALSE(stability_criterion("x", {1.0, 1.6, 2.5}).pass);  // each step < 2, overall > 2
  EXPECT_TRUE(stability_criterion("x", {0.0, 0.0}).pass);
  EXPECT_FALSE(stability_criterion("x", {0.0, 1.0}).pass);
  EXPECT_FALSE(stability_criterion("x", {1.0, std::nan("")}).pass);
  EXPECT_TRUE(growth_criterion("x", {1.0, 0.1}).pass);
  EXPECT_FALSE(growth_criterion("x", {1.0, 2.0}).pass);
}

// ---------------------------------------------------------------------------
// Experiment drivers.

TEST(Experiments, AllPassOnQuickSettings) {
  for (const auto& name : experiment_names()) {
    ExperimentParams p = quick();
    if (name == "translation_identity") p.refinements = {1.0 / 16};
    const auto r = run_experiment(name, p);
    EXPECT_TRUE(r.passed()) << name;
    for (const auto& c : r.criteria) EXPECT_TRUE(c.pass) << name << ": " << c.name << " " << c.detail;
    EXPECT_NE(r.criterion("finite constants"), nullptr);
  }
}

TEST(Experiments, DeterministicReports) {
  ExperimentParams p = quick();
  p.refinements = {1.0 / 16};
  const std::string a = report_text(run_lp_regularity(p));
  const int saved = static_cast<int>(worker_count());
  set_worker_count(1);
  const std::string b = report_text(run_lp_regularity(p));
  set_worker_count(saved);
  EXPECT_EQ(a, b);
  p.seed = 2;
  EXPECT_NE(report_text(run_lp_regularity(p)), a);
}

TEST(Experiments, ScaleInvarianceOfRatios) {
  ExperimentParams p = quick();
  p.refinements = {1.0 / 16};
  const auto base = run_energy(p);
  const double kappa = 3.5;
  p.f_amplitude = p.g_amplitude = p.exterior_amplitude = kappa;
  const auto scaled = run_energy(p);
  const auto& t0 = *base.table("instances");
  const auto& t1 = *scaled.table("instances");
  ASSERT_EQ(t0.rows.size(), t1.rows.size());
  for (std::size_t r = 0; r < t0.rows.size(); ++r) EXPECT_NEAR(t1.rows[r][2], t0.rows[r][2], 1e-10 * t0.rows[r][2]);

  const Grid g = Grid::box(1, 1.0 / 16, 8.0);
  const Domain b6 = build_ball_domain(g, {0.0, 0.0}, 6.0);
  const Instance in = make_instance(quick(), g, b6, 0, true, true);
  Instance in2 = in;
  in2.f *= kappa;
  in2.g *= kappa;
  in2.h_ext *= kappa;
  const auto u = solve_instance(in, b6, 0.25, 1e-12, 1, 0).u;
  const auto v = solve_instance(in2, b6, 0.25, 1e-12, 1, 0).u;
  const double n0 = l2_over(s_gradient(u, 0.25), b6), n1 = l2_over(s_gradient(v, 0.25), b6);
  EXPECT_NEAR(n1, kappa * n0, 1e-9 * kappa * n0);
}

TEST(Experiments, ZeroDataGivesZeroRatios) {
  ExperimentParams p = quick();
  p.refinements = {1.0 / 16};
  p.f_amplitude = p.g_amplitude = 0.0;
  const auto lp = run_lp_regularity(p);
  EXPECT_EQ(column_max(*lp.table("instances"), "ratio"), 0.0);
  EXPECT_TRUE(lp.passed());
}

TEST(Experiments, ZeroDeltaGivesIdenticalSolutions) {
  ExperimentParams p = quick();
  p.refinements = {1.0 / 16};
  p.deltas = {0.0};
  const auto r = run_approximation(p);
  EXPECT_EQ(column_max(*r.table("instances"), "difference"), 0.0);
}

TEST(Experiments, ApproximationDifferenceScalesLinearly) {
  ExperimentParams p = quick();
  p.refinements = {1.0 / 16};
  p.deltas = {0.2, 0.1};
  const auto r = run_approximation(p);
  const auto& t = *r.table("instances");
  ASSERT_EQ(t.rows.size(), 4u);
  for (std::size_t k = 0; k < t.rows.size(); k += 2) EXPECT_NEAR(t.rows[k][3] / t.rows[k + 1][3], 2.0, 0.4);
}

TEST(Experiments, ConstantExteriorGivesZeroHolderSeminorm) {
  ExperimentParams p = quick();
  p.exterior = "constant";
  const auto r = run_holder(p);
  EXPECT_LT(column_max(*r.table("instances"), "seminorm"), 1e-8);
}

TEST(Experiments, LinfTailSubcheck) {
  const auto r = run_linf(quick());
  const auto* c = r.criterion("tail constant within 1%");
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->pass) << c->detail;
}

TEST(Experiments, LevelSetChainHoldsAndDataFreeReducesToTail) {
  ExperimentParams p = quick();
  p.kernel = "constant";
  p.instances = 1;
  p.refinements = {1.0 / 32};
  const auto r = run_level_set_decay(p);
  EXPECT_TRUE(r.passed());
  p.f_amplitude = p.g_amplitude = 0.0;
  const auto free = run_level_set_decay(p);
  const auto& chain = *free.table("chain");
  for (const auto& row : chain.rows) {
    EXPECT_EQ(row[5], 0.0);  // data terms
    EXPECT_EQ(row[7], row[6]);
  }
}

TEST(Experiments, LevelSetChainOnZeroGradientIsTrivial) {
  const Grid g = Grid::box(1, 1.0 / 16, 8.0);
  const Domain b6 = build_ball_domain(g, {0.0, 0.0}, 6.0), b1 = build_ball_domain(g, {0.0, 0.0}, 1.0);
  ExperimentParams p;
  validate(p);
  const auto ch = level_set_chain(GridFunction(g), GridFunction(g), b6, b1, p);
  EXPECT_TRUE(ch.normalized);
  EXPECT_TRUE(ch.holds);
  for (double v : ch.lhs) EXPECT_EQ(v, 0.0);
}

TEST(Experiments, NormalizationFailureIsReported) {
  ExperimentParams p = quick();
  p.instances = 1;
  p.refinements = {1.0 / 16};
  p.gamma = 1e3;
  const auto r = run_level_set_decay(p);
  const auto* c = r.criterion("normalization");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->pass);
  EXPECT_NE(c->detail.find("normalization failed"), std::string::npos);
  EXPECT_FALSE(r.passed());
}

// ---------------------------------------------------------------------------
// Translation identity.

TEST(Translation, IdentityHoldsForConstantKernelAndVanishesForConstants) {
  const Grid g = Grid::torus(1, 1.0 / 16, 256);
  const auto form = assemble_form(kernels::constant(1), g, 0.25);
  const Domain omega = build_ball_domain(g, {0.0, 0.0}, 2.0);
  const GridFunction h = lipschitz_field(g, 2, 0.5, 6.5, 7.0);
  SolveOptions opt;
  opt.tolerance = 1e-12;
  const auto u = solve_dirichlet(kernels::constant(1), GridFunction(g), h, omega, 0.25, opt).u;
  const GridFunction phi = piecewise_constant_field(g, 4, 0.5, build_ball_domain(g, {0.0, 0.0}, 1.5));
  const auto c = translation_check(form, u, phi, {1, 0});
  EXPECT_LE(c.relative, 1e-10);
  const auto c0 = translation_check(form, GridFunction::constant(g, 3.0), phi, {1, 0});
  EXPECT_EQ(c0.identity, 0.0);
}

TEST(Translation, RefusesBoxGridsAndLongShifts) {
  const Grid box = Grid::box(1, 1.0 / 16, 8.0);
  const auto form = assemble_form(kernels::constant(1), box, 0.25);
  EXPECT_THROW(translation_check(form, GridFunction(box), GridFunction(box), {1, 0}), PreconditionError);
  ExperimentParams p = quick();
  p.refinements = {1.0 / 16};
  p.shift = 9;
  EXPECT_THROW(run_translation_identity(p), PreconditionError);
}

// ---------------------------------------------------------------------------
// Localization.

TEST(Localization, LatticeOverlapCounts) {
  // Open balls: |x - k| < 2 admits at most 4 integers k.
  EXPECT_EQ(lattice_covering(Grid::box(1, 1.0 / 16, 8.0)).overlap, 4);
  EXPECT_EQ(lattice_covering(Grid::box(1, 1.0 / 32, 8.0)).overlap, 4);
  // 2D oracle: brute-force count of k in Z^2 with |x - k|^2 < 8 over the
  // points x of the unit cell sampled at spacing 1/8.
  int oracle = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      int count = 0;
      for (int a = -4; a <= 4; ++a)
        for (int b = -4; b <= 4; ++b) {
          const double dx = i / 8.0 - a, dy = j / 8.0 - b;
          if (dx * dx + dy * dy < 8.0) ++count;
        }
      oracle = std::max(oracle, count);
    }
  EXPECT_EQ(lattice_covering(Grid::box(2, 1.0 / 8, 4.0)).overlap, oracle);
}

TEST(Localization, TwoBallPartitionOfUnity) {
  const Grid g = Grid::box(2, 1.0 / 16, 4.0);
  const Domain U = build_ball_domain(g, {0.0, 0.0}, 1.0);
  const auto phi = partition_of_unity(g, {{{-0.5, 0.0}, 1.25}, {{0.5, 0.0}, 1.25}}, U);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double sum = phi[0][i] + phi[1][i];
    if (U.contains(i))
      EXPECT_NEAR(sum, 1.0, 1e-12);
    else
      EXPECT_EQ(sum, 0.0);
    EXPECT_GE(phi[0][i], 0.0);
  }
}

TEST(Localization, SingleBallEqualsPlainMeasurement) {
  const Grid g = Grid::box(1, 1.0 / 16, 8.0);
  const Domain U = build_ball_domain(g, {0.0, 0.0}, 1.0);
  const auto phi = partition_of_unity(g, {{{0.0, 0.0}, 1.5}}, U);
  const GridFunction f = piecewise_constant_field(g, 8, 0.25, build_ball_domain(g, {0.0, 0.0}, 6.0));
  GridFunction piece(g);
  for (std::size_t i = 0; i < g.size(); ++i) piece[i] = std::abs(f[i]) * phi[0][i];
  EXPECT_EQ(lp_norm(piece, NormSpec::lp(4.0, U)), lp_norm(f, NormSpec::lp(4.0, U)));
}

TEST(Localization, IncompleteCoveringIsAnError) {
  const Grid g = Grid::box(1, 1.0 / 16, 4.0);
  const Domain U = build_ball_domain(g, {0.0, 0.0}, 1.0);
  EXPECT_THROW(partition_of_unity(g, {{{3.0, 0.0}, 0.5}}, U), DomainError);
  EXPECT_THROW(partition_of_unity(g, {}, U), DomainError);
}

TEST(Localization, RescalingConsistency) {
  const Grid g = Grid::box(1, 1.0 / 32, 8.0);
  const auto A = kernels::rough(1, 2.0, 17);
  for (double r : {0.5, 1.0}) {
    const auto rep = rescaling_consistency(A, g, 0.25, r, {0.5, 0.0}, 3);
    EXPECT_GT(rep.nodes, 0u);
    EXPECT_LE(rep.max_discrepancy, 1e-8) << "r = " << r;
  }
  const Grid g2 = Grid::box(2, 1.0 / 8, 8.0);
  const auto rep2 = rescaling_consistency(kernels::checkerboard(2, 2.0), g2, 0.5, 0.5, {1.0, -0.5}, 3);
  EXPECT_LE(rep2.max_discrepancy, 1e-8);
  EXPECT_THROW(rescaling_consistency(A, g, 0.25, 0.75, {0.0, 0.0}, 3), PreconditionError);
  EXPECT_THROW(rescaling_consistency(A, g, 0.25, 0.5, {0.01, 0.0}, 3), PreconditionError);
}
