#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "fracreg/config.hpp"
#include "fracreg/io.hpp"
#include "fracreg/report.hpp"

using namespace fracreg;

namespace {

std::vector<double> vec(const GridFunction& u) { return {u.values().begin(), u.values().end()}; }

GridFunction random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 3.0);
  GridFunction u(g);
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = dist(rng);
  return u;
}

std::string csv_of(const GridFunction& u) {
  std::ostringstream out;
  write_csv(out, u);
  return out.str();
}

template <class E, class F>
std::string message_of(F&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

}  // namespace

// ---------------------------------------------------------------------------
// Field files.

TEST(FieldIo, CsvRoundTripIsBitExact) {
  for (int dim : {1, 2}) {
    const Grid g = Grid::box(dim, 0.1, 0.5);
    const GridFunction u = random_field(g, 3 + dim);
    std::istringstream in(csv_of(u));
    const GridFunction back = read_csv(in, g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(back[i], u[i]);
  }
}

TEST(FieldIo, CsvAcceptsAnyRowOrderAndComments) {
  const Grid g = Grid::box(1, 0.5, 1.0);
  std::istringstream in("# x,value\n1,5\n-1,1\n\n0,3\n-0.5,2\n0.5,4\n");
  const GridFunction u = read_csv(in, g);
  EXPECT_EQ(vec(u), (std::vector<double>{1, 2, 3, 4, 5}));
}

TEST(FieldIo, CsvRejectsMissingAndDuplicateNodes) {
  const Grid g = Grid::box(1, 0.5, 1.0);
  std::istringstream missing("-1,1\n-0.5,2\n0,3\n0.5,4\n");
  EXPECT_NE(message_of<DomainError>([&] { read_csv(missing, g); }).find("1 grid nodes missing"), std::string::npos);
  std::istringstream dup("-1,1\n-0.5,2\n0,3\n0.5,4\n0.5,4\n1,5\n");
  EXPECT_NE(message_of<DomainError>([&] { read_csv(dup, g); }).find("csv:5: duplicate node"), std::string::npos);
}

TEST(FieldIo, CsvRejectsOffGridAndOutsideCoordinates) {
  const Grid g = Grid::box(1, 0.5, 1.0);
  std::istringstream off("0.25,1\n");
  EXPECT_THROW(read_csv(off, g), DomainError);
  std::istringstream outside("1.5,1\n");
  EXPECT_THROW(read_csv(outside, g), DomainError);
  std::istringstream columns("0,1,2\n");
  EXPECT_THROW(read_csv(columns, g), ConfigError);
  std::istringstream text("0,abc\n");
  EXPECT_THROW(read_csv(text, g), ConfigError);
}

TEST(FieldIo, TorusCsvRoundTrip) {
  // Even node counts: lattice coordinates run from -P/2 to P/2 - 1.
  const Grid g = Grid::torus(2, 0.25, 8);
  const GridFunction u = random_field(g, 9);
  std::istringstream in(csv_of(u));
  const GridFunction back = read_csv(in, g);
  EXPECT_EQ(vec(back), vec(u));
  std::istringstream wrapped("1,0,1\n");  // x = P/2 h is not a node of this torus
  EXPECT_THROW(read_csv(wrapped, g), DomainError);
}

TEST(FieldIo, BinaryRoundTripAndLayout) {
  const Grid g = Grid::box(2, 0.25, 0.5);
  const GridFunction u = random_field(g, 5);
  std::stringstream buf;
  write_binary(buf, u);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 8 * g.size());
  // Little-endian IEEE-754: the first 8 bytes decode to the first node value.
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[b]);
  EXPECT_EQ(std::bit_cast<double>(bits), u[0]);
  const GridFunction back = read_binary(buf, g);
  EXPECT_EQ(vec(back), vec(u));
}

TEST(FieldIo, BinaryRejectsWrongLength) {
  const Grid g = Grid::box(1, 0.5, 1.0);
  std::stringstream shortbuf(std::string(8 * 4, '\0'));
  EXPECT_THROW(read_binary(shortbuf, g), DomainError);
  std::stringstream longbuf(std::string(8 * 6, '\0'));
  EXPECT_THROW(read_binary(longbuf, g), DomainError);
}

TEST(FieldIo, FileDispatchOnExtension) {
  const Grid g = Grid::box(1, 0.25, 1.0);
  const GridFunction u = random_field(g, 1);
  const auto dir = std::filesystem::temp_directory_path() / "fracreg_io_test";
  std::filesystem::create_directories(dir);
  write_csv((dir / "u.csv").string(), u);
  write_binary((dir / "u.bin").string(), u);
  EXPECT_EQ(vec(read_field((dir / "u.csv").string(), g)), vec(u));
  EXPECT_EQ(vec(read_field((dir / "u.bin").string(), g)), vec(u));
  EXPECT_THROW(read_field((dir / "absent.csv").string(), g), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(FieldIo, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
    EXPECT_EQ(parse_double(format_double(v), "t"), v);
}

// ---------------------------------------------------------------------------
// Configuration text.

TEST(Config, ParsesKeysBlocksAndLists) {
  const auto root = parse_config_string(
      "s = 0.25  # comment\n"
      "kernel { kind = rough; lambda = 2 }\n"
      "grid {\n  dim = 2\n  h = 1/16\n}\n"
      "norms = 2, 4, inf\n"
      "data { f = random 3 0.25; g = \"file\" \"my field.csv\" }\n");
  ASSERT_NE(root.find("s"), nullptr);
  EXPECT_EQ(root.find("s")->values, std::vector<std::string>{"0.25"});
  EXPECT_EQ(root.find("norms")->values, (std::vector<std::string>{"2", "4", "inf"}));
  ASSERT_NE(root.block("grid"), nullptr);
  EXPECT_EQ(root.block("grid")->find("h")->line, 5);
  EXPECT_EQ(root.block("data")->find("g")->values, (std::vector<std::string>{"file", "my field.csv"}));
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  auto msg = [](const std::string& text) { return message_of<ConfigError>([&] { parse_config_string(text); }); };
  EXPECT_NE(msg("s = 0.25\nkernel {\n kind = rough\n").find("missing '}'"), std::string::npos);
  EXPECT_NE(msg("s = 0.25\n\nlambda 2\n").find("line 3"), std::string::npos);
  EXPECT_NE(msg("a = 1\nb =\n").find("line 2"), std::string::npos);
  EXPECT_NE(msg("a = 1,\n").find("line 1"), std::string::npos);
  EXPECT_NE(msg("}\n").find("unexpected '}'"), std::string::npos);
  EXPECT_NE(msg("a = \"open\n").find("unterminated"), std::string::npos);
}

TEST(Config, LoadsRunConfiguration) {
  const RunConfig c = load_config_string(
      "s = 0.5\n"
      "kernel { kind = oscillatory; lambda = 3 }\n"
      "grid { dim = 2; h = 1/8; box_radius = 4 }\n"
      "domain { ball { center = 0.5, -0.5; radius = 1 } ball { radius = 0.5 } }\n"
      "data { f = constant 2; h = lipschitz 4; g = random 1; g = zero }\n"
      "levelsets { tau = 0.2; beta = 3; p = 6 }\n");
  EXPECT_EQ(c.s, 0.5);
  EXPECT_EQ(c.kernel.kind, "oscillatory");
  EXPECT_EQ(c.kernel.lambda, 3.0);
  EXPECT_EQ(c.grid.h, 0.125);
  ASSERT_EQ(c.domain.size(), 2u);
  EXPECT_EQ(c.domain[0].center[1], -0.5);
  EXPECT_EQ(c.f.kind, "constant");
  EXPECT_EQ(c.f.value, 2.0);
  ASSERT_EQ(c.g.size(), 2u);
  EXPECT_EQ(c.g[0].seed, 1u);
  EXPECT_EQ(c.levelsets.p, 6.0);
  const Grid g = make_grid(c.grid);
  const Domain d = make_domain(g, c.domain);
  EXPECT_TRUE(build_ball_domain(g, {0.0, 0.0}, 0.5).subset_of(d));
}

TEST(Config, RejectsDimensionNotAboveTwiceS) {
  EXPECT_THROW(load_config_string("s = 0.5\ngrid { dim = 1 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("s = 0.75\ngrid { dim = 1 }\n"), ConfigError);
  EXPECT_NO_THROW(load_config_string("s = 0.75\ngrid { dim = 2 }\n"));
  EXPECT_THROW(load_config_string("s = 1\ngrid { dim = 2 }\n"), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_NE(message_of<ConfigError>([] { load_config_string("s = 0.25\ngrid { dim = 1; spacing = 2 }\n"); })
                .find("line 2: unknown key 'spacing'"),
            std::string::npos);
  EXPECT_THROW(load_config_string("kernel { kind = spiky }\n"), ConfigError);
  EXPECT_THROW(load_config_string("kernel { lambda = 0.5 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("grid { dim = 1.5 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("grid { h = 1/0 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("data { f = random }\n"), ConfigError);
  EXPECT_THROW(load_config_string("data { f = noise 3 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("s = 0.25; s = 0.3\n"), ConfigError);
  EXPECT_THROW(load_config_string("domain { ball { center = 0 } }\n"), ConfigError);
}

TEST(Config, ExperimentBlockEnforcesParameterInvariants) {
  const RunConfig c = load_config_string("s = 0.25\nexperiment { eps = 1e-3; p_grid = 3, 4; refinements = 1/16, 1/32 }\n");
  ASSERT_TRUE(c.has_experiment);
  EXPECT_EQ(c.experiment.eps1, std::pow(10.0, 1) * 1e-3);
  EXPECT_EQ(c.experiment.refinements, (std::vector<double>{1.0 / 16, 1.0 / 32}));
  const RunConfig c2 = load_config_string("s = 0.5\ngrid { dim = 2 }\nexperiment { eps = 1e-4 }\n");
  EXPECT_EQ(c2.experiment.eps1, 100.0 * 1e-4);
  EXPECT_EQ(c2.experiment.dim, 2);
  EXPECT_THROW(load_config_string("experiment { eps = 1e-3; eps1 = 0.02 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("experiment { p = 2 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("experiment { p_grid = 3, 2 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("experiment { lambda = 0.9 }\n"), ConfigError);
  EXPECT_THROW(load_config_string("experiment { colour = red }\n"), ConfigError);
}

TEST(Config, CoverBallsInExperimentBlock) {
  const RunConfig c = load_config_string(
      "experiment { cover { ball { center = -0.5; radius = 1 } ball { center = 0.5; radius = 1 } } }\n");
  ASSERT_EQ(c.experiment.cover.size(), 2u);
  EXPECT_EQ(c.experiment.cover[1].center[0], 0.5);
}

TEST(Config, FieldSpecsMaterialize) {
  const Grid g = Grid::box(1, 0.25, 4.0);
  const Domain d = build_ball_domain(g, {0.0, 0.0}, 1.0);
  FieldSpec zero;
  EXPECT_EQ(vec(make_field(zero, g, d)), vec(GridFunction(g)));
  FieldSpec c;
  c.kind = "constant";
  c.value = 2.5;
  const GridFunction cf = make_field(c, g, d);
  EXPECT_EQ(cf[0], 2.5);
  EXPECT_EQ(cf.exterior().value(), 2.5);
  FieldSpec r;
  r.kind = "random";
  r.seed = 4;
  const GridFunction rf = make_field(r, g, d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!d.contains(i)) {
      EXPECT_EQ(rf[i], 0.0);
    }
    EXPECT_LE(std::abs(rf[i]), 1.0);
  }
  FieldSpec missing;
  missing.kind = "file";
  missing.path = "/nonexistent/field.csv";
  EXPECT_THROW(make_field(missing, g, d), ConfigError);
}

// ---------------------------------------------------------------------------
// Reports.

TEST(Report, JsonCarriesSchemaAndCriteria) {
  ExperimentReport r;
  r.name = "demo";
  r.tables.push_back({"t", {"h", "ratio"}, {{0.5, 1.25}, {0.25, std::numeric_limits<double>::infinity()}}});
  r.criteria.push_back({"ok", true, "fine"});
  r.criteria.push_back({"bad", false, "not fine"});
  r.wall_clock_seconds = 12.5;
  const Json j = Json::parse(report_text(r));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["experiment"], "demo");
  EXPECT_EQ(j["passed"], false);
  EXPECT_EQ(j["criteria"][1]["name"], "bad");
  EXPECT_TRUE(j["tables"][0]["rows"][1][1].is_null());
  EXPECT_FALSE(j.contains("wall_clock_seconds"));
  EXPECT_EQ(report_text(r).find("12.5"), std::string::npos);
}

TEST(Report, WritesJsonCsvAndTimingSidecar) {
  ExperimentReport r;
  r.name = "demo";
  r.tables.push_back({"constants", {"h", "c"}, {{0.5, 0.1}}});
  r.criteria.push_back({"ok", true, ""});
  const auto dir = std::filesystem::temp_directory_path() / "fracreg_report_test";
  write_report(dir, r);
  EXPECT_TRUE(std::filesystem::exists(dir / "demo.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "demo.timing.json"));
  std::ifstream csv(dir / "demo.constants.csv");
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "h,c");
  EXPECT_EQ(row, "0.5,0.1");
  std::filesystem::remove_all(dir);
}
