#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracreg/common.hpp"
#include "fracreg/experiments.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/io.hpp"
#include "fracreg/kernel.hpp"

namespace fracreg {

// ---------------------------------------------------------------------------
// Structured text:
//
//   key = value [, value]* [value]*       terminated by ';', newline or '}'
//   name { ... }                          nested block
//   # comment
//
// Values are bare words ("rough", "1/32", "-0.5", "data/u.csv") or quoted
// strings.

struct ConfigEntry {
  std::string key;
  std::vector<std::string> values;
  int line = 0;
};

struct ConfigBlock {
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;
  std::vector<ConfigBlock> blocks;

  const ConfigEntry* find(const std::string& key) const {
    const ConfigEntry* hit = nullptr;
    for (const auto& e : entries)
      if (e.key == key) {
        if (hit) throw ConfigError("line " + std::to_string(e.line) + ": duplicate key '" + key + "'");
        hit = &e;
      }
    return hit;
  }
  const ConfigBlock* block(const std::string& n) const {
    const ConfigBlock* hit = nullptr;
    for (const auto& b : blocks)
      if (b.name == n) {
        if (hit) throw ConfigError("line " + std::to_string(b.line) + ": duplicate block '" + n + "'");
        hit = &b;
      }
    return hit;
  }
  void allow(std::initializer_list<const char*> keys, std::initializer_list<const char*> subblocks = {}) const {
    for (const auto& e : entries) {
      bool ok = false;
      for (const char* k : keys) ok = ok || e.key == k;
      if (!ok) throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "' in " + where());
    }
    for (const auto& b : blocks) {
      bool ok = false;
      for (const char* k : subblocks) ok = ok || b.name == k;
      if (!ok) throw ConfigError("line " + std::to_string(b.line) + ": unknown block '" + b.name + "' in " + where());
    }
  }
  std::string where() const { return name.empty() ? "top level" : "block '" + name + "'"; }
};

namespace detail {

struct Token {
  enum Kind { Word, Equals, Separator, Open, Close, Comma, End } kind;
  std::string text;
  int line;
};

inline std::vector<Token> tokenize(std::istream& in) {
  std::vector<Token> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (c == '=') out.push_back({Token::Equals, "=", lineno});
      else if (c == ';') out.push_back({Token::Separator, ";", lineno});
      else if (c == '{') out.push_back({Token::Open, "{", lineno});
      else if (c == '}') out.push_back({Token::Close, "}", lineno});
      else if (c == ',') out.push_back({Token::Comma, ",", lineno});
      else if (c == '"') {
        const auto end = line.find('"', i + 1);
        if (end == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
        out.push_back({Token::Word, line.substr(i + 1, end - i - 1), lineno});
        i = end + 1;
        continue;
      } else {
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
               std::string_view("=;{},#\"").find(line[j]) == std::string_view::npos)
          ++j;
        out.push_back({Token::Word, line.substr(i, j - i), lineno});
        i = j;
        continue;
      }
      ++i;
    }
    out.push_back({Token::Separator, "\n", lineno});
  }
  out.push_back({Token::End, "", lineno});
  return out;
}

inline void parse_block(const std::vector<Token>& toks, std::size_t& pos, ConfigBlock& blk, bool top) {
  auto fail = [](const Token& t, const std::string& msg) {
    throw ConfigError("line " + std::to_string(t.line) + ": " + msg);
  };
  while (true) {
    const Token& t = toks[pos];
    if (t.kind == Token::Separator) {
      ++pos;
      continue;
    }
    if (t.kind == Token::End) {
      if (!top) fail(t, "missing '}' for block '" + blk.name + "' opened on line " + std::to_string(blk.line));
      return;
    }
    if (t.kind == Token::Close) {
      if (top) fail(t, "unexpected '}'");
      ++pos;
      return;
    }
    if (t.kind != Token::Word) fail(t, "expected a key or block name, got '" + t.text + "'");
    ++pos;
    const Token& next = toks[pos];
    if (next.kind == Token::Open) {
      ++pos;
      ConfigBlock child;
      child.name = t.text;
      child.line = t.line;
      parse_block(toks, pos, child, false);
      blk.blocks.push_back(std::move(child));
      continue;
    }
    if (next.kind != Token::Equals) fail(next, "expected '=' or '{' after '" + t.text + "'");
    ++pos;
    ConfigEntry e{t.text, {}, t.line};
    bool want_value = true;
    while (true) {
      const Token& v = toks[pos];
      if (v.kind == Token::Word) {
        e.values.push_back(v.text);
        want_value = false;
        ++pos;
      } else if (v.kind == Token::Comma) {
        if (want_value) fail(v, "missing value before ','");
        want_value = true;
        ++pos;
      } else if (v.kind == Token::Separator || v.kind == Token::Close || v.kind == Token::End) {
        if (want_value) fail(v, "missing value for '" + e.key + "'");
        break;
      } else {
        fail(v, "unexpected '" + v.text + "' in value of '" + e.key + "'");
      }
    }
    blk.entries.push_back(std::move(e));
  }
}

}  // namespace detail

inline ConfigBlock parse_config(std::istream& in) {
  const auto toks = detail::tokenize(in);
  ConfigBlock root;
  std::size_t pos = 0;
  detail::parse_block(toks, pos, root, true);
  return root;
}

inline ConfigBlock parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Typed access.

/// Reals, with "a/b" fractions and "inf".
inline double config_real(const std::string& text, int line) {
  const std::string ctx = "line " + std::to_string(line);
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const double den = parse_double(std::string_view(text).substr(slash + 1), ctx);
    if (den == 0.0) throw ConfigError(ctx + ": zero denominator in '" + text + "'");
    return parse_double(std::string_view(text).substr(0, slash), ctx) / den;
  }
  return parse_double(text, ctx);
}

inline std::int64_t config_integer(const std::string& text, int line) {
  const double v = config_real(text, line);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + text + "'");
  return static_cast<std::int64_t>(v);
}

inline const ConfigEntry& single(const ConfigEntry& e) {
  if (e.values.size() != 1) throw ConfigError("line " + std::to_string(e.line) + ": '" + e.key + "' takes one value");
  return e;
}

inline void read_real(const ConfigBlock& b, const char* key, double& out) {
  if (const auto* e = b.find(key)) out = config_real(single(*e).values[0], e->line);
}

inline void read_int(const ConfigBlock& b, const char* key, int& out) {
  if (const auto* e = b.find(key)) out = static_cast<int>(config_integer(single(*e).values[0], e->line));
}

inline void read_seed(const ConfigBlock& b, const char* key, std::uint64_t& out) {
  if (const auto* e = b.find(key)) {
    const auto v = config_integer(single(*e).values[0], e->line);
    if (v < 0) throw ConfigError("line " + std::to_string(e->line) + ": seed must be nonnegative");
    out = static_cast<std::uint64_t>(v);
  }
}

inline void read_word(const ConfigBlock& b, const char* key, std::string& out) {
  if (const auto* e = b.find(key)) out = single(*e).values[0];
}

inline void read_reals(const ConfigBlock& b, const char* key, std::vector<double>& out) {
  if (const auto* e = b.find(key)) {
    out.clear();
    for (const auto& v : e->values) out.push_back(config_real(v, e->line));
  }
}

inline Point read_point(const ConfigEntry& e, int dim) {
  if (static_cast<int>(e.values.size()) != dim)
    throw ConfigError("line " + std::to_string(e.line) + ": center needs " + std::to_string(dim) + " coordinates");
  Point p{0.0, 0.0};
  for (int k = 0; k < dim; ++k) p[k] = config_real(e.values[k], e.line);
  return p;
}

/// ball { center = x[, y]; radius = r }
inline BallSpec read_ball(const ConfigBlock& b, int dim) {
  b.allow({"center", "radius"});
  BallSpec ball;
  if (const auto* c = b.find("center")) ball.center = read_point(*c, dim);
  const auto* r = b.find("radius");
  if (!r) throw ConfigError("line " + std::to_string(b.line) + ": ball needs a radius");
  ball.radius = config_real(single(*r).values[0], r->line);
  if (!(ball.radius > 0.0)) throw ConfigError("line " + std::to_string(r->line) + ": radius must be positive");
  return ball;
}

// ---------------------------------------------------------------------------
// Run configuration.

struct KernelSpec {
  std::string kind = "constant";
  double lambda = 1.0;
  std::uint64_t seed = 1;
  double cell = 0.25;
  double value = 1.0;  ///< constant kernel level
};

struct GridSpec {
  int dim = 1;
  double h = 1.0 / 32;
  double box_radius = 8.0;
  std::string topology = "box";
  int nodes = 0;  ///< torus nodes per axis
};

/// zero | constant <c> | random <seed> [cell] | lipschitz <seed> [cell] | file <path>
struct FieldSpec {
  std::string kind = "zero";
  double value = 0.0;
  std::uint64_t seed = 0;
  double cell = 0.5;
  std::string path;
  int line = 0;
};

struct LevelSetSpec {
  double tau = 0.1;
  double beta = 2.0;
  double p = 4.0;
};

struct RunConfig {
  double s = 0.25;
  double tolerance = 1e-10;
  KernelSpec kernel;
  GridSpec grid;
  std::vector<BallSpec> domain;
  FieldSpec f, b, h;
  std::vector<FieldSpec> g;
  double big_lambda = 1.0;
  std::uint64_t data_seed = 1;
  LevelSetSpec levelsets;
  std::vector<double> norms{2.0};
  std::string input;
  ExperimentParams experiment;
  bool has_experiment = false;
};

inline FieldSpec read_field_spec(const ConfigEntry& e) {
  FieldSpec f;
  f.line = e.line;
  const auto& v = e.values;
  auto fail = [&](const std::string& msg) { throw ConfigError("line " + std::to_string(e.line) + ": " + msg); };
  f.kind = v[0];
  if (f.kind == "zero") {
    if (v.size() != 1) fail("'zero' takes no arguments");
  } else if (f.kind == "constant") {
    if (v.size() != 2) fail("'constant' takes one value");
    f.value = config_real(v[1], e.line);
  } else if (f.kind == "random" || f.kind == "lipschitz") {
    if (v.size() < 2 || v.size() > 3) fail("'" + f.kind + "' takes a seed and an optional cell width");
    const auto seed = config_integer(v[1], e.line);
    if (seed < 0) fail("seed must be nonnegative");
    f.seed = static_cast<std::uint64_t>(seed);
    if (v.size() == 3) f.cell = config_real(v[2], e.line);
    if (!(f.cell > 0.0)) fail("cell width must be positive");
  } else if (f.kind == "file") {
    if (v.size() != 2) fail("'file' takes one path");
    f.path = v[1];
  } else {
    fail("unknown field kind '" + f.kind + "' (zero, constant, random, lipschitz, file)");
  }
  return f;
}

inline ExperimentParams read_experiment_params(const ConfigBlock& b, ExperimentParams p = {}) {
  b.allow({"dim", "s", "p", "p_grid", "lambda", "big_lambda", "N1", "delta", "eps", "eps1", "M", "gamma", "K",
           "deltas", "alpha_factors", "refinements", "seed", "kernel", "instances", "box_radius", "data_cell",
           "kernel_cell", "f_amplitude", "g_amplitude", "exterior", "exterior_amplitude", "r", "R", "shift",
           "torus_length", "cover_region", "tolerance"},
          {"cover"});
  read_int(b, "dim", p.dim);
  read_real(b, "s", p.s);
  read_real(b, "p", p.p);
  read_reals(b, "p_grid", p.p_grid);
  read_real(b, "lambda", p.lambda);
  read_real(b, "big_lambda", p.big_lambda);
  read_real(b, "N1", p.N1);
  read_real(b, "delta", p.delta);
  read_real(b, "eps", p.eps);
  read_real(b, "eps1", p.eps1);
  read_real(b, "M", p.M);
  read_real(b, "gamma", p.gamma);
  read_int(b, "K", p.K);
  read_reals(b, "deltas", p.deltas);
  read_reals(b, "alpha_factors", p.alpha_factors);
  read_reals(b, "refinements", p.refinements);
  read_seed(b, "seed", p.seed);
  read_word(b, "kernel", p.kernel);
  read_int(b, "instances", p.instances);
  read_real(b, "box_radius", p.box_radius);
  read_real(b, "data_cell", p.data_cell);
  read_real(b, "kernel_cell", p.kernel_cell);
  read_real(b, "f_amplitude", p.f_amplitude);
  read_real(b, "g_amplitude", p.g_amplitude);
  read_word(b, "exterior", p.exterior);
  read_real(b, "exterior_amplitude", p.exterior_amplitude);
  read_real(b, "r", p.r);
  read_real(b, "R", p.R);
  read_int(b, "shift", p.shift);
  read_real(b, "torus_length", p.torus_length);
  read_real(b, "cover_region", p.cover_region);
  read_real(b, "tolerance", p.tolerance);
  if (const auto* cover = b.block("cover")) {
    cover->allow({}, {"ball"});
    p.cover.clear();
    for (const auto& ball : cover->blocks) p.cover.push_back(read_ball(ball, p.dim));
  }
  if (p.dim != 1 && p.dim != 2) throw ConfigError("line " + std::to_string(b.line) + ": dim must be 1 or 2");
  try {
    validate(p);
  } catch (const Error& e) {
    throw ConfigError("line " + std::to_string(b.line) + ": " + e.what());
  }
  return p;
}

inline RunConfig load_config(const ConfigBlock& root) {
  root.allow({"s", "tolerance", "input", "norms"}, {"kernel", "grid", "domain", "data", "levelsets", "experiment"});
  RunConfig c;
  read_real(root, "s", c.s);
  read_real(root, "tolerance", c.tolerance);
  read_word(root, "input", c.input);
  read_reals(root, "norms", c.norms);
  if (const auto* k = root.block("kernel")) {
    k->allow({"kind", "lambda", "seed", "cell", "value"});
    read_word(*k, "kind", c.kernel.kind);
    read_real(*k, "lambda", c.kernel.lambda);
    read_seed(*k, "seed", c.kernel.seed);
    read_real(*k, "cell", c.kernel.cell);
    read_real(*k, "value", c.kernel.value);
    if (c.kernel.kind != "constant" && c.kernel.kind != "oscillatory" && c.kernel.kind != "rough" &&
        c.kernel.kind != "checkerboard")
      throw ConfigError("line " + std::to_string(k->line) + ": unknown kernel kind '" + c.kernel.kind + "'");
    if (!(c.kernel.lambda >= 1.0)) throw ConfigError("line " + std::to_string(k->line) + ": lambda must be >= 1");
  }
  if (const auto* g = root.block("grid")) {
    g->allow({"dim", "h", "box_radius", "topology", "nodes"});
    read_int(*g, "dim", c.grid.dim);
    read_real(*g, "h", c.grid.h);
    read_real(*g, "box_radius", c.grid.box_radius);
    read_word(*g, "topology", c.grid.topology);
    read_int(*g, "nodes", c.grid.nodes);
    if (c.grid.dim != 1 && c.grid.dim != 2)
      throw ConfigError("line " + std::to_string(g->line) + ": dim must be 1 or 2");
    if (c.grid.topology != "box" && c.grid.topology != "torus")
      throw ConfigError("line " + std::to_string(g->line) + ": topology must be box or torus");
  }
  if (const auto* d = root.block("domain")) {
    d->allow({}, {"ball"});
    for (const auto& b : d->blocks) c.domain.push_back(read_ball(b, c.grid.dim));
  }
  if (const auto* d = root.block("data")) {
    d->allow({"f", "g", "h", "b", "big_lambda", "seed"});
    if (const auto* e = d->find("f")) c.f = read_field_spec(*e);
    if (const auto* e = d->find("h")) c.h = read_field_spec(*e);
    if (const auto* e = d->find("b")) c.b = read_field_spec(*e);
    for (const auto& e : d->entries)
      if (e.key == "g") c.g.push_back(read_field_spec(e));
    read_real(*d, "big_lambda", c.big_lambda);
    read_seed(*d, "seed", c.data_seed);
  }
  if (const auto* l = root.block("levelsets")) {
    l->allow({"tau", "beta", "p"});
    read_real(*l, "tau", c.levelsets.tau);
    read_real(*l, "beta", c.levelsets.beta);
    read_real(*l, "p", c.levelsets.p);
  }
  if (!(c.s > 0.0 && c.s < 1.0)) throw ConfigError("s must lie in (0,1)");
  if (!(c.grid.dim > 2.0 * c.s)) throw ConfigError("need n > 2s (n = " + std::to_string(c.grid.dim) + ")");
  if (const auto* e = root.block("experiment")) {
    ExperimentParams base;
    base.s = c.s;
    base.dim = c.grid.dim;
    c.experiment = read_experiment_params(*e, base);
    c.has_experiment = true;
  }
  return c;
}

inline RunConfig load_config(std::istream& in) { return load_config(parse_config(in)); }

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return load_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline RunConfig load_config_string(const std::string& text) {
  std::istringstream in(text);
  return load_config(in);
}

// ---------------------------------------------------------------------------
// Materialization.

inline Grid make_grid(const GridSpec& g) {
  if (g.topology == "torus") {
    const int P = g.nodes > 0 ? g.nodes : static_cast<int>(std::lround(2.0 * g.box_radius / g.h));
    return Grid::torus(g.dim, g.h, P);
  }
  return Grid::box(g.dim, g.h, g.box_radius);
}

inline KernelCoefficient make_kernel(const KernelSpec& k, int dim) {
  if (k.kind == "constant") return kernels::constant(dim, k.value, k.lambda);
  return make_kernel(k.kind, dim, k.lambda, k.seed, k.cell);
}

inline Domain make_domain(const Grid& g, const std::vector<BallSpec>& balls) {
  if (balls.empty()) return build_ball_domain(g, {0.0, 0.0}, 1.0);
  Domain d = empty_domain(g);
  for (const auto& b : balls) d = d | build_ball_domain(g, b.center, b.radius);
  return d;
}

inline GridFunction make_field(const FieldSpec& f, const Grid& g, const Domain& support) {
  if (f.kind == "zero") return GridFunction(g);
  if (f.kind == "constant") return GridFunction::constant(g, f.value);
  if (f.kind == "random") return piecewise_constant_field(g, f.seed, f.cell, support);
  if (f.kind == "lipschitz") {
    const double outer = g.periodic() ? 0.5 * g.per_axis() * g.spacing() - f.cell
                                      : std::min(g.box_radius() - 0.5, 0.9375 * g.box_radius());
    return lipschitz_field(g, f.seed, f.cell, outer - 0.5, outer);
  }
  try {
    return read_field(f.path, g);
  } catch (const Error& e) {
    throw ConfigError("line " + std::to_string(f.line) + ": " + e.what());
  }
}

}  // namespace fracreg
