#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pointhole/cli/commands.hpp"

using namespace pointhole::cli;
namespace fs = std::filesystem;

namespace {
json benchmark_json() {
  return json::parse(R"({
    "schema": "pointhole/1",
    "geometry": {"domain": {"kind": "plane"}, "hole": {"kind": "disc", "radius": 0.5}},
    "robin": {"alpha1": 1.0},
    "sweep": {"grid": {"count": 11}}
  })");
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pointhole_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}
}  // namespace

TEST(Cli, EmptyGridIsAValidationError) {
  auto j = benchmark_json();
  j["sweep"] = {{"eps", json::array()}};
  try {
    parse_config(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.problems().size(), 1u);
    EXPECT_NE(e.problems()[0].find("empty eps grid"), std::string::npos);
  }
}

TEST(Cli, EveryProblemIsListed) {
  auto j = benchmark_json();
  j["operator"] = {{"c1", -1.0}, {"bogus", 1}};
  j["fem"] = {{"hole_nodes", 10}};
  j["schema"] = "other";
  try {
    parse_config(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.problems().size(), 4u);
  }
}

TEST(Cli, ResolvedConfigRoundTrips) {
  const auto c = parse_config(benchmark_json());
  const auto again = parse_config(resolved(c));
  EXPECT_EQ(resolved(again).dump(), resolved(c).dump());
  EXPECT_EQ(again.sweep.eps.size(), 11u);
}

TEST(Cli, CouplingOnBenchmarkDisc) {
  RunContext ctx;
  ctx.cfg = parse_config(benchmark_json());
  ctx.out = scratch("coupling");
  ASSERT_EQ(run_command("coupling", ctx), exit_ok);
  const auto t = read_csv((ctx.out / "coupling.csv").string());
  const double b = 0.5;
  EXPECT_NEAR(t.numbers("K")[0], 2 * std::numbers::pi * (std::log(b) - b), 1e-10);
  EXPECT_NEAR(t.numbers("beta")[0], b - std::log(b), 1e-10);
  EXPECT_TRUE(fs::exists(ctx.out / "resolved_config.json"));
}

TEST(Cli, SweepIsReproducibleAndReportIsReadOnly) {
  RunContext ctx;
  ctx.cfg = parse_config(benchmark_json());
  ctx.out = scratch("sweep");
  ASSERT_EQ(run_command("sweep", ctx), exit_ok);
  const std::string first = slurp(ctx.out / "sweep.csv");

  RunContext again;
  again.cfg = load_config((ctx.out / "resolved_config.json").string());
  again.out = scratch("sweep2");
  ASSERT_EQ(run_command("sweep", again), exit_ok);
  EXPECT_EQ(slurp(again.out / "sweep.csv"), first);

  ASSERT_EQ(run_command("report", ctx), exit_ok);
  EXPECT_EQ(slurp(ctx.out / "sweep.csv"), first);
  EXPECT_TRUE(fs::exists(ctx.out / "report_sweep.svg"));
  EXPECT_NE(slurp(ctx.out / "report.txt").find("err_l2"), std::string::npos);
}

TEST(Cli, UnsupportedCombinationIsAConfigError) {
  auto j = benchmark_json();
  j["operator"] = {{"A", {{4, 0}, {0, 1}}}};
  RunContext ctx;
  ctx.cfg = parse_config(j);
  ctx.out = scratch("unsupported");
  EXPECT_EQ(run_command("sweep", ctx), exit_config);
  EXPECT_FALSE(fs::exists(ctx.out));
}

TEST(Cli, NumericalFailureNamesTheStage) {
  auto j = benchmark_json();
  // lambda at the plane bound state: the limit resolvent has a pole there
  j["spectral"] = {{"lambda", pointhole::limitop::plane_bound_state(0.5 + std::numbers::ln2)}};
  RunContext ctx;
  ctx.cfg = parse_config(j);
  ctx.out = scratch("hit");
  testing::internal::CaptureStderr();
  EXPECT_EQ(run_command("limit-solve", ctx), exit_numerical);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("stage limit-solve"), std::string::npos);
}

TEST(Cli, SvgIsWellFormed) {
  const auto svg = svg_loglog("t", "x", "y", {{"a", "#000", {1, 2, 4}, {1, 0.5, 0.25}}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
