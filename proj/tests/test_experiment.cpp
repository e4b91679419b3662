#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "rtropt/experiment.hpp"

using namespace rtropt;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rtropt_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> non_timestamp_lines(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line))
    if (line.rfind("# generated:", 0) != 0 && line.find("\"timestamp\"") == std::string::npos)
      lines.push_back(line);
  return lines;
}

json load_json(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  json j;
  is >> j;
  return j;
}

}  // namespace

TEST_CASE("config validation rejects malformed input") {
  CHECK_THROWS_AS(RunConfig::from_json(json::parse(R"({"task":"dance"})")), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(json::parse(R"({"task":"minimize"})")), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(json::parse(
                      R"({"task":"minimize","problem":{"name":"eigenvector","n":4},"typo":1})")),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(json::parse(
                      R"({"problem":{"name":"eigenvector","n":4},"n_restarts":2,"x0":[1,0,0,0]})")),
                  ConfigError);

  RunConfig ok = RunConfig::from_json(
      json::parse(R"({"task":"certify","seed":3,"problem":{"name":"tensor_single","n":4}})"));
  CHECK(ok.task == "certify");
  CHECK(ok.certify_samples == 10000);
}

TEST_CASE("unknown problem names and missing parameters are validation errors") {
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(build_problem(json{{"name", "nonsense"}}, rng), ConfigError);
  CHECK_THROWS_AS(build_problem(json{{"name", "eigenvector"}}, rng), ConfigError);

  fs::path dir = fresh_dir("badcfg");
  fs::path cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"task":"minimize","problem":{"name":"nonsense"}})";
  CHECK(run_config_file(cfg.string()) == 2);
  CHECK(run_config_file((dir / "missing.json").string()) == 2);
  std::ofstream(dir / "garbled.json") << "{ not json";
  CHECK(run_config_file((dir / "garbled.json").string()) == 2);
}

TEST_CASE("trace files round-trip exactly") {
  std::vector<TraceRow> rows;
  rows.push_back({0, -2.0, 0.0, -2.0, 1.0, std::nullopt, 0.0, true});
  rows.push_back({1, -2.5, 1.0, std::nullopt, 1.0, 0.5, 1.0, false});
  rows.push_back({2, -3.0, 1.5e-16, 2.0, 2.0, 0.9999, 0.25, true});

  fs::path dir = fresh_dir("roundtrip");
  fs::path p = dir / "trace.jsonl";
  emit_trace(p.string(), rows, json{{"probe", true}});
  std::vector<TraceRow> back = parse_trace(p.string());
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) REQUIRE(back[i] == rows[i]);
}

TEST_CASE("grid files carry a header row and one line per cell") {
  LandscapeGrid grid;
  grid.parameterization = "plane";
  grid.p1 = {0.0, 1.0};
  grid.p2 = {0.0, 1.0};
  grid.values = Mat::Zero(2, 2);
  grid.values << 1.0, 2.0, 3.0, 4.0;
  fs::path dir = fresh_dir("grid");
  fs::path p = dir / "landscape.csv";
  emit_grid(p.string(), grid, json::object());

  std::ifstream is(p);
  std::string line;
  int data = 0;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.rfind('#', 0) == 0) continue;
    if (line == "param1,param2,f") {
      header = true;
      continue;
    }
    ++data;
  }
  CHECK(header);
  CHECK(data == 4);
}

TEST_CASE("a stationary start produces a single-record trace") {
  fs::path dir = fresh_dir("stationary");
  RunConfig cfg = RunConfig::from_json(json::parse(R"({
    "task": "minimize", "seed": 1,
    "problem": {"name": "eigenvector", "diag": [3, 2, 1]},
    "x0": [1, 0, 0],
    "solver": {"grad_tol": 1e-10, "curv_tol": 1e-8}
  })"));
  cfg.out_dir = (dir / "run").string();
  REQUIRE(run(cfg) == 0);
  auto rows = parse_trace((dir / "run" / "trace_0.jsonl").string());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].rho == std::nullopt);
  CHECK(rows[0].f == Approx(-3.0));
}

TEST_CASE("the saddle-start trace records the flat gradient and -2 curvature") {
  fs::path dir = fresh_dir("saddletrace");
  RunConfig cfg = RunConfig::from_json(json::parse(R"({
    "task": "minimize", "seed": 1,
    "problem": {"name": "eigenvector", "diag": [3, 2, 1]},
    "x0": [0, 1, 0],
    "solver": {"grad_tol": 1e-10, "curv_tol": 1e-8}
  })"));
  cfg.out_dir = dir.string();
  REQUIRE(run(cfg) == 0);
  auto rows = parse_trace((dir / "trace_0.jsonl").string());
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0].grad_norm < 1e-12);
  REQUIRE(rows[0].lambda_min.has_value());
  CHECK(*rows[0].lambda_min == Approx(-2.0));
  CHECK(rows[0].rho == std::nullopt);
  CHECK(rows.back().f == Approx(-3.0).margin(1e-9));

  json summary = load_json(dir / "summary.json");
  CHECK(summary["best"]["status"] == "stationary");
  CHECK(summary["best"]["distance_to_solution"].get<double>() < 1e-8);
}

TEST_CASE("restarts produce independent summaries and report the best") {
  fs::path dir = fresh_dir("restarts");
  RunConfig cfg = RunConfig::from_json(json::parse(R"({
    "task": "minimize", "seed": 4, "n_restarts": 3,
    "problem": {"name": "eigenvector", "n": 8}
  })"));
  cfg.out_dir = dir.string();
  REQUIRE(run(cfg) == 0);
  json summary = load_json(dir / "summary.json");
  REQUIRE(summary["restarts"].size() == 3);
  double best = summary["best"]["final_f"].get<double>();
  for (const auto& r : summary["restarts"]) {
    CHECK(best <= r["final_f"].get<double>() + 1e-15);
    CHECK(r["seed"].get<std::uint64_t>() >= 4);
  }
  for (int i = 0; i < 3; ++i) CHECK(fs::exists(dir / ("trace_" + std::to_string(i) + ".jsonl")));
}

TEST_CASE("identical configs give byte-identical artifacts modulo the timestamp") {
  json spec = json::parse(R"({
    "task": "minimize", "seed": 9, "n_restarts": 2,
    "problem": {"name": "tensor_single", "n": 5}
  })");
  RunConfig cfg1 = RunConfig::from_json(spec);
  RunConfig cfg2 = RunConfig::from_json(spec);
  fs::path d1 = fresh_dir("repro_a"), d2 = fresh_dir("repro_b");
  cfg1.out_dir = d1.string();
  cfg2.out_dir = d2.string();
  REQUIRE(run(cfg1) == 0);
  REQUIRE(run(cfg2) == 0);
  for (const char* name : {"trace_0.jsonl", "trace_1.jsonl", "summary.json"})
    REQUIRE(non_timestamp_lines(d1 / name) == non_timestamp_lines(d2 / name));
}

TEST_CASE("certify and fdcheck tasks write their reports") {
  fs::path dir = fresh_dir("certify");
  RunConfig cfg = RunConfig::from_json(json::parse(R"({
    "task": "certify", "seed": 2,
    "problem": {"name": "eigenvector", "diag": [3, 2, 1]},
    "certify": {"n_samples": 500}
  })"));
  cfg.out_dir = dir.string();
  REQUIRE(run(cfg) == 0);
  json cert = load_json(dir / "certify.json");
  CHECK(cert["box_valid"].get<bool>());
  CHECK(cert["coverage"]["unclassified"].get<double>() == 0.0);

  fs::path fdir = fresh_dir("fdcheck");
  RunConfig fcfg = RunConfig::from_json(json::parse(R"({
    "task": "fdcheck", "seed": 2,
    "problem": {"name": "tensor_single", "n": 5},
    "fd": {"points": 10}
  })"));
  fcfg.out_dir = fdir.string();
  REQUIRE(run(fcfg) == 0);
  json fd = load_json(fdir / "fdcheck.json");
  CHECK(fd["pass"].get<bool>());
}

TEST_CASE("landscape task writes a plane chart for the quadratic saddle") {
  fs::path dir = fresh_dir("landscape");
  RunConfig cfg = RunConfig::from_json(json::parse(R"({
    "task": "landscape", "seed": 2,
    "problem": {"name": "saddle_quadratic"},
    "landscape": {"resolution": [21, 21], "range": 1.0}
  })"));
  cfg.out_dir = dir.string();
  REQUIRE(run(cfg) == 0);
  std::ifstream is(dir / "landscape.csv");
  REQUIRE(is.good());
  int data = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#' && line != "param1,param2,f") ++data;
  CHECK(data == 21 * 21);
}

TEST_CASE("task override switches the run mode") {
  fs::path dir = fresh_dir("override");
  fs::path cfgfile = dir / "cfg.json";
  std::ofstream(cfgfile) << R"({
    "task": "minimize", "seed": 2,
    "problem": {"name": "tensor_single", "n": 4},
    "fd": {"points": 5}
  })";
  CliOverrides ov;
  ov.task = "fdcheck";
  ov.out = (dir / "out").string();
  REQUIRE(run_config_file(cfgfile.string(), ov) == 0);
  CHECK(fs::exists(dir / "out" / "fdcheck.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "summary.json"));
}
