#include "nfuq/cli.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace nfuq;

namespace {

toml::Document doc_from(const std::string& text) {
  std::istringstream in(text);
  return toml::parse(in);
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  Csv out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    if (first) {
      out.header = cells;
      first = false;
    } else {
      std::vector<double> row;
      for (const auto& cell : cells) row.push_back(std::strtod(cell.c_str(), nullptr));
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("nfuq_test_" + tag);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("toml parser") {
  auto doc = doc_from(
      "top = 1\n"
      "[problem]  # trailing comment\n"
      "preset = \"problem1\"\n"
      "alpha = -2.0\n"
      "flag = true\n"
      "# full-line comment\n"
      "[stochastic]\n"
      "orders = [4, 8]\n"
      "names = [\"a\", \"b\"]\n");
  CHECK(toml::get_number(doc, "", "top", 0.0) == 1.0);
  CHECK(toml::get_string(doc, "problem", "preset", "") == "problem1");
  CHECK(toml::get_number(doc, "problem", "alpha", 0.0) == -2.0);
  CHECK(toml::get_bool(doc, "problem", "flag", false));
  CHECK(toml::get_numbers(doc, "stochastic", "orders", {}) ==
        std::vector<double>{4.0, 8.0});
  const toml::Value* names = toml::find(doc, "stochastic", "names");
  REQUIRE(names != nullptr);
  CHECK(names->strings == std::vector<std::string>{"a", "b"});

  // fallbacks for absent keys; type mismatch throws
  CHECK(toml::get_number(doc, "problem", "missing", 7.5) == 7.5);
  CHECK_THROWS_AS(toml::get_number(doc, "problem", "preset", 0.0),
                  toml::ParseError);
}

TEST_CASE("toml parse errors carry line context") {
  CHECK_THROWS_WITH(doc_from("[problem\npreset = \"x\"\n"),
                    Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_WITH(doc_from("a = 1\nnonsense line\n"),
                    Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_THROWS_AS(doc_from("a = \n"), toml::ParseError);
  CHECK_THROWS_AS(doc_from("a = [1, oops]\n"), toml::ParseError);
  CHECK_THROWS_AS(doc_from("a = \"unterminated\n"), toml::ParseError);
}

TEST_CASE("toml overrides") {
  auto doc = doc_from("[spatial]\nn = 40\n");
  toml::apply_override(doc, "spatial.n=24");
  CHECK(toml::get_number(doc, "spatial", "n", 0.0) == 24.0);
  toml::apply_override(doc, "stochastic.orders=[2, 3]");
  CHECK(toml::get_numbers(doc, "stochastic", "orders", {}) ==
        std::vector<double>{2.0, 3.0});
  toml::apply_override(doc, "problem.preset=\"ring\"");
  CHECK(toml::get_string(doc, "problem", "preset", "") == "ring");
  CHECK_THROWS_AS(toml::apply_override(doc, "no-equals-sign"),
                  toml::ParseError);
}

TEST_CASE("csv numbers round-trip") {
  for (double x : {1.0 / 3.0, std::numbers::pi, -1.2345678901234567e-300,
                   6.02214076e23, 0.1, -0.0, 1e308}) {
    const std::string s = csv_number(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("build_run_config defaults and validation") {
  auto cfg = build_run_config(doc_from("[problem]\npreset = \"problem1\"\n"));
  CHECK(cfg.n == 40);
  CHECK(cfg.orders == std::vector<int>{20});
  CHECK(cfg.integrator.rtol == 1e-12);
  CHECK(cfg.spatial_kind == GridKind::Chebyshev);
  CHECK(cfg.integrator.output_times == std::vector<double>{1.0});

  auto ring = build_run_config(doc_from("[problem]\npreset = \"ring\"\n"));
  CHECK(ring.spatial_kind == GridKind::PeriodicEquispaced);
  CHECK(ring.n == 64);
  CHECK(ring.integrator.rtol == 1e-8);
  CHECK(ring.orders == std::vector<int>(6, 2));

  // a scalar order broadcasts across dimensions
  auto p3 = build_run_config(doc_from(
      "[problem]\npreset = \"problem3\"\n[stochastic]\norders = 3\n"));
  CHECK(p3.orders == std::vector<int>(4, 3));

  CHECK_THROWS_WITH(build_run_config(doc_from("[problem]\nalpha = 1.0\n")),
                    Catch::Matchers::ContainsSubstring("problem.preset"));
  CHECK_THROWS_AS(build_run_config(doc_from(
                      "[problem]\npreset = \"nope\"\n")),
                  ConfigError);
  CHECK_THROWS_AS(build_run_config(doc_from(
                      "[problem]\npreset = \"problem2\"\n"
                      "[stochastic]\norders = [1, 2, 3]\n")),
                  ConfigError);
  CHECK_THROWS_AS(build_run_config(doc_from(
                      "[problem]\npreset = \"ring\"\n"
                      "[spatial]\nkind = \"chebyshev\"\n")),
                  ConfigError);
  CHECK_THROWS_AS(build_run_config(doc_from(
                      "[problem]\npreset = \"problem1\"\n"
                      "[execution]\nworkers = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(build_run_config(doc_from(
                      "[problem]\npreset = \"problem1\"\n"
                      "[integrator]\noutput_times = [2.5]\n")),
                  ConfigError);
}

TEST_CASE("cmd_solve writes a solution table") {
  auto dir = temp_dir("solve");
  auto cfg = build_run_config(doc_from(
      "[problem]\npreset = \"problem1\"\n"
      "[spatial]\nn = 24\n"
      "[integrator]\nrtol = 1e-8\natol = 1e-10\n"
      "output_times = [0.5, 1.0]\n"
      "[point]\ny = [0.5]\n"
      "[output]\ndirectory = \"" + dir.string() + "\"\n"));
  CHECK(run_command("solve", cfg) == kExitOk);
  Csv table = read_csv(dir / "solution.csv");
  REQUIRE(table.header.size() == 3);
  CHECK(table.header[0] == "x");
  CHECK(table.header[1] == "u_t0.5");
  REQUIRE(table.rows.size() == 25);
  for (const auto& row : table.rows) {
    const double exact = problem1_exact_solution(row[0], 1.0, 0.5);
    CHECK(std::abs(row[2] - exact) <= 1e-6);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_uq writes moment tables") {
  auto dir = temp_dir("uq");
  auto cfg = build_run_config(doc_from(
      "[problem]\npreset = \"problem1\"\n"
      "[spatial]\nn = 24\n"
      "[stochastic]\norders = 10\n"
      "[integrator]\nrtol = 1e-10\natol = 1e-12\n"
      "[output]\ndirectory = \"" + dir.string() + "\"\n"
      "formats = [\"csv\", \"svg\"]\n"));
  CHECK(run_command("uq", cfg) == kExitOk);
  Csv mean = read_csv(dir / "mean.csv");
  Csv var = read_csv(dir / "variance.csv");
  REQUIRE(mean.rows.size() == 25);
  REQUIRE(var.rows.size() == 25);
  for (std::size_t i = 0; i < mean.rows.size(); ++i) {
    const double exact = problem1_exact_mean(mean.rows[i][0], 1.0, -2.0, 0.5);
    CHECK(std::abs(mean.rows[i][1] - exact) <= 1e-6);
    CHECK(var.rows[i][1] >= 0.0);
  }
  // svg output is requested and well formed enough to open
  std::ifstream svg(dir / "mean.svg");
  REQUIRE(svg.good());
  std::string head;
  std::getline(svg, head);
  CHECK(head.find("<svg") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_converge on problem 1") {
  auto dir = temp_dir("converge");
  auto cfg = build_run_config(doc_from(
      "[problem]\npreset = \"problem1\"\n"
      "[spatial]\nn = 24\n"
      "[integrator]\nrtol = 1e-10\natol = 1e-12\n"
      "[sweep]\nq = [2, 4, 8]\n"
      "[output]\ndirectory = \"" + dir.string() + "\"\n"));
  CHECK(run_command("converge", cfg) == kExitOk);
  Csv table = read_csv(dir / "convergence.csv");
  REQUIRE(table.header == std::vector<std::string>{"n", "q_1", "error",
                                                   "seconds"});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][2] > table.rows[2][2]);  // error shrinks with q
  for (const auto& row : table.rows) CHECK(row[3] >= 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_mc_check agrees on a small run") {
  auto dir = temp_dir("mc");
  auto cfg = build_run_config(doc_from(
      "[problem]\npreset = \"problem1\"\n"
      "[spatial]\nn = 12\n"
      "[stochastic]\norders = 8\n"
      "[integrator]\nrtol = 1e-8\natol = 1e-10\n"
      "[mc]\nsamples = 40\nseed = 7\n"
      "[output]\ndirectory = \"" + dir.string() + "\"\n"));
  CHECK(run_command("mc-check", cfg) == kExitOk);
  Csv table = read_csv(dir / "mc_check.csv");
  REQUIRE(table.rows.size() == 13);
  for (const auto& row : table.rows) CHECK(std::abs(row[4]) <= 4.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_spectrum verdicts and configuration") {
  auto dir = temp_dir("spectrum");
  auto cfg = build_run_config(doc_from(
      "[problem]\npreset = \"problem1\"\n"
      "[spatial]\nn = 24\n"
      "[stochastic]\norders = 3\n"
      "[output]\ndirectory = \"" + dir.string() + "\"\n"));
  CHECK(run_command("spectrum", cfg) == kExitOk);
  Csv table = read_csv(dir / "spectrum.csv");
  // deterministic kernel: one distinct slice regardless of the grid
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].back() == Catch::Approx(-1.0 / 3.0).margin(1e-6));
  std::filesystem::remove_all(dir);

  // nonlinear firing without a linearization choice is a config error
  auto bad = build_run_config(doc_from(
      "[problem]\npreset = \"problem2\"\n[spatial]\nn = 8\n"));
  CHECK(run_command("spectrum", bad) == kExitConfig);

  // with ubar it runs
  auto dir2 = temp_dir("spectrum2");
  auto ok = build_run_config(doc_from(
      "[problem]\npreset = \"problem2\"\n"
      "[spatial]\nn = 10\n"
      "[stochastic]\norders = 1\n"
      "[spectrum]\nubar = 0.0\n"
      "[output]\ndirectory = \"" + dir2.string() + "\"\n"));
  CHECK(run_command("spectrum", ok) == kExitOk);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("run_command exit codes") {
  auto cfg = build_run_config(doc_from("[problem]\npreset = \"problem1\"\n"));
  CHECK(run_command("frobnicate", cfg) == kExitConfig);

  // solver failure surfaces as exit 2
  auto tight = build_run_config(doc_from(
      "[problem]\npreset = \"problem1\"\n"
      "[spatial]\nn = 8\n"
      "[integrator]\nmax_steps = 2\n"
      "[point]\nmidpoint = true\n"));
  CHECK(run_command("solve", tight) == kExitSolver);
}
