#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fracreg/fracreg.hpp"

namespace fs = std::filesystem;
using namespace fracreg;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::string input;
  int workers = 0;
  std::int64_t seed = -1;
  bool binary = false;
  std::string experiment;
};

struct Problem {
  RunConfig cfg;
  Grid grid;
  Domain omega;
};

Problem load(const Options& o) {
  Problem p;
  p.cfg = o.config.empty() ? load_config_string("") : load_config_file(o.config);
  if (o.seed >= 0) {
    p.cfg.kernel.seed = static_cast<std::uint64_t>(o.seed);
    p.cfg.data_seed = static_cast<std::uint64_t>(o.seed);
    p.cfg.experiment.seed = static_cast<std::uint64_t>(o.seed);
  }
  p.grid = make_grid(p.cfg.grid);
  p.omega = make_domain(p.grid, p.cfg.domain);
  return p;
}

void write_field(const Options& o, const std::string& stem, const GridFunction& u) {
  fs::create_directories(o.out);
  if (o.binary)
    write_binary((fs::path(o.out) / (stem + ".bin")).string(), u);
  else
    write_csv((fs::path(o.out) / (stem + ".csv")).string(), u);
}

void write_json(const Options& o, const std::string& stem, const Json& j) {
  fs::create_directories(o.out);
  write_text(fs::path(o.out) / (stem + ".json"), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
}

GridFunction input_field(const Options& o, const Problem& p) {
  const std::string path = o.input.empty() ? p.cfg.input : o.input;
  if (path.empty()) throw ConfigError("no input field: pass --input or set 'input' in the config");
  return read_field(path, p.grid);
}

int cmd_solve(const Options& o) {
  const Problem p = load(o);
  const auto& c = p.cfg;
  const KernelCoefficient A = make_kernel(c.kernel, p.grid.dim());
  std::vector<GridFunction> g;
  DataKernel D;
  D.big_lambda = c.big_lambda;
  for (std::size_t i = 0; i < c.g.size(); ++i) {
    g.push_back(make_field(c.g[i], p.grid, p.omega));
    const auto dk = kernels::rough_data(p.grid.dim(), c.big_lambda, hash_combine(c.data_seed, i, 0xd0, 0));
    D.evaluators.push_back(dk.evaluators.front());
  }
  const GridFunction f = make_field(c.f, p.grid, p.omega).restricted(p.omega);
  const GridFunction b = make_field(c.b, p.grid, p.omega);
  const GridFunction h = make_field(c.h, p.grid, p.omega);
  SolveOptions opt;
  opt.tolerance = c.tolerance;
  const SolveResult r = solve_dirichlet(A, b, D, g, f, h, p.omega, c.s, opt);
  write_field(o, "solution", r.u);
  write_json(o, "solve", Json{{"schema", kReportSchema},
                              {"residual", json_number(r.residual)},
                              {"iterations", r.iterations},
                              {"energy_ratio", json_number(energy_estimate_ratio(r.u, h, g, f, p.omega, c.s))}});
  return 0;
}

int cmd_sgrad(const Options& o) {
  const Problem p = load(o);
  const GridFunction u = input_field(o, p);
  const GridFunction gu = s_gradient(u, p.cfg.s);
  write_field(o, "sgrad", gu);
  write_json(o, "sgrad", Json{{"schema", kReportSchema},
                              {"l2_over_domain", json_number(l2_over(gu, p.omega))},
                              {"max_over_domain", json_number(lp_norm(gu, NormSpec::lp(INFINITY, p.omega)))}});
  return 0;
}

int cmd_maxfn(const Options& o) {
  const Problem p = load(o);
  const GridFunction f = input_field(o, p);
  const GridFunction m = maximal_function(f, p.omega);
  write_field(o, "maxfn", m);
  write_json(o, "maxfn", Json{{"schema", kReportSchema},
                              {"sup", json_number(lp_norm(m, NormSpec::lp(INFINITY, p.omega)))},
                              {"sup_input", json_number(lp_norm(f, NormSpec::lp(INFINITY, p.omega)))}});
  return 0;
}

int cmd_norms(const Options& o) {
  const Problem p = load(o);
  const GridFunction f = input_field(o, p);
  Json norms = Json::array();
  for (double q : p.cfg.norms) {
    Json entry{{"p", json_number(q)}, {"norm", json_number(lp_norm(f, NormSpec::lp(q, p.omega)))}};
    if (std::isfinite(q)) entry["layer_cake"] = json_number(std::pow(layer_cake_norm(f.abs(), NormSpec::lp(q, p.omega)), 1.0 / q));
    norms.push_back(entry);
  }
  write_json(o, "norms", Json{{"schema", kReportSchema}, {"norms", norms}});
  return 0;
}

int cmd_levelsets(const Options& o) {
  const Problem p = load(o);
  const GridFunction f = input_field(o, p);
  const auto& ls = p.cfg.levelsets;
  const LevelSetProfile r = level_set_sum(f, p.omega, ls.tau, ls.beta, ls.p);
  Json measures = Json::array();
  for (double m : r.measures) measures.push_back(json_number(m));
  write_json(o, "levelsets", Json{{"schema", kReportSchema},
                                  {"tau", r.tau},
                                  {"beta", r.beta},
                                  {"p", r.p},
                                  {"measures", measures},
                                  {"sum_S", json_number(r.sum_S)},
                                  {"norm_pp", json_number(r.norm_pp)},
                                  {"lower_bound", json_number(r.lower_bound)},
                                  {"upper_bound", json_number(r.upper_bound)},
                                  {"lower_ok", r.lower_ok},
                                  {"upper_ok", r.upper_ok}});
  return r.lower_ok && r.upper_ok ? 0 : 1;
}

int cmd_experiment(const Options& o) {
  const Problem p = load(o);
  ExperimentParams params = p.cfg.experiment;
  if (!p.cfg.has_experiment) {
    params.s = p.cfg.s;
    params.dim = p.cfg.grid.dim;
    if (o.seed >= 0) params.seed = static_cast<std::uint64_t>(o.seed);
  }
  const ExperimentReport r = run_experiment(o.experiment, params);
  write_report(o.out, r);
  for (const auto& c : r.criteria) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  std::cout << r.name << ": " << (r.passed() ? "passed" : "failed") << " in " << r.wall_clock_seconds << " s\n";
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discretized nonlocal elliptic operators: solves, s-gradients, maximal functions, experiments"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run-configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--workers", o.workers, "worker threads (default: available parallelism)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", o.seed, "override every seed in the configuration")->check(CLI::NonNegativeNumber);
    sub->add_flag("--binary", o.binary, "write fields as little-endian binary instead of CSV");
  };
  auto with_input = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "input field (.csv or .bin)");
    return sub;
  };
  auto* solve = app.add_subcommand("solve", "solve the Dirichlet problem");
  auto* sgrad = with_input(app.add_subcommand("sgrad", "s-gradient of a field"));
  auto* maxfn = with_input(app.add_subcommand("maxfn", "maximal function over the domain"));
  auto* norms = with_input(app.add_subcommand("norms", "L^p norms over the domain"));
  auto* levelsets = with_input(app.add_subcommand("levelsets", "level-set sums and their bounds"));
  auto* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", o.experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  for (auto* sub : {solve, sgrad, maxfn, norms, levelsets, experiment}) common(sub);

  CLI11_PARSE(app, argc, argv);
  set_worker_count(o.workers > 0 ? o.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  try {
    if (solve->parsed()) return cmd_solve(o);
    if (sgrad->parsed()) return cmd_sgrad(o);
    if (maxfn->parsed()) return cmd_maxfn(o);
    if (norms->parsed()) return cmd_norms(o);
    if (levelsets->parsed()) return cmd_levelsets(o);
    return cmd_experiment(o);
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (residual " << e.residual() << ", iterations " << e.iterations()
              << ")\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
