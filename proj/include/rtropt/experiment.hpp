#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtropt/manifold.hpp"
#include "rtropt/problems.hpp"
#include "rtropt/ridability.hpp"
#include "rtropt/solver.hpp"
#include "rtropt/tr_subproblem.hpp"

namespace rtropt {

inline constexpr const char* kVersion = "rtropt 0.1.0";

using json = nlohmann::json;

/// Config or input problems (unknown names, malformed fields, bad paths).
/// Mapped to exit code 2 by the runner.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// problem construction and solver initialization draw from disjoint streams
inline constexpr std::uint64_t kSolverStream = 0x5eedb00c0ffee123ull;

struct RunConfig {
  std::string task = "minimize";  // minimize | certify | landscape | fdcheck
  std::uint64_t seed = 0;
  int n_restarts = 1;
  std::string out_dir = ".";
  json problem;  // {"name": ..., params...}
  json solver_overrides = json::object();
  std::optional<Vec> x0;
  int certify_samples = 10000;
  int landscape_res1 = 200;
  int landscape_res2 = 100;
  double landscape_range = 1.5;
  int fd_points = 100;

  static RunConfig from_json(const json& j);
  json echo() const;
};

inline RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::vector<std::string> known = {"task",   "seed",      "n_restarts", "out",
                                                 "problem", "solver",   "x0",         "certify",
                                                 "landscape", "fd"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("config: unknown key '" + it.key() + "'");

  RunConfig cfg;
  try {
    cfg.task = j.value("task", "minimize");
    if (cfg.task != "minimize" && cfg.task != "certify" && cfg.task != "landscape" &&
        cfg.task != "fdcheck")
      throw ConfigError("config: unknown task '" + cfg.task + "'");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.n_restarts = j.value("n_restarts", 1);
    if (cfg.n_restarts < 1) throw ConfigError("config: n_restarts must be >= 1");
    cfg.out_dir = j.value("out", ".");
    if (!j.contains("problem") || !j["problem"].is_object() || !j["problem"].contains("name"))
      throw ConfigError("config: 'problem' object with a 'name' is required");
    cfg.problem = j["problem"];
    cfg.solver_overrides = j.value("solver", json::object());
    if (j.contains("x0")) {
      auto v = j["x0"].get<std::vector<double>>();
      cfg.x0 = Vec::Map(v.data(), static_cast<Eigen::Index>(v.size()));
      if (cfg.n_restarts != 1) throw ConfigError("config: explicit x0 requires n_restarts = 1");
    }
    if (j.contains("certify")) cfg.certify_samples = j["certify"].value("n_samples", 10000);
    if (j.contains("landscape")) {
      auto& l = j["landscape"];
      if (l.contains("resolution")) {
        auto r = l["resolution"].get<std::vector<int>>();
        if (r.size() != 2 || r[0] < 2 || r[1] < 2)
          throw ConfigError("config: landscape.resolution must be two ints >= 2");
        cfg.landscape_res1 = r[0];
        cfg.landscape_res2 = r[1];
      }
      cfg.landscape_range = l.value("range", 1.5);
    }
    if (j.contains("fd")) cfg.fd_points = j["fd"].value("points", 100);
    if (cfg.fd_points < 1) throw ConfigError("config: fd.points must be >= 1");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline json RunConfig::echo() const {
  json j;
  j["task"] = task;
  j["seed"] = seed;
  j["n_restarts"] = n_restarts;
  j["problem"] = problem;
  j["solver"] = solver_overrides;
  if (x0) j["x0"] = std::vector<double>(x0->data(), x0->data() + x0->size());
  if (task == "certify") j["certify"] = {{"n_samples", certify_samples}};
  if (task == "landscape")
    j["landscape"] = {{"resolution", {landscape_res1, landscape_res2}},
                      {"range", landscape_range}};
  if (task == "fdcheck") j["fd"] = {{"points", fd_points}};
  return j;
}

inline TRConfig solver_config_from_json(const json& j, std::uint64_t seed) {
  TRConfig cfg;
  cfg.seed = seed;
  try {
    cfg.delta0 = j.value("delta0", cfg.delta0);
    cfg.delta_max = j.value("delta_max", cfg.delta_max);
    cfg.eta_accept = j.value("eta_accept", cfg.eta_accept);
    cfg.shrink = j.value("shrink", cfg.shrink);
    cfg.expand = j.value("expand", cfg.expand);
    cfg.grad_tol = j.value("grad_tol", cfg.grad_tol);
    cfg.curv_tol = j.value("curv_tol", cfg.curv_tol);
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config.solver: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.solver: ") + e.what());
  }
  return cfg;
}

/// Builds a zoo problem from a config spec; instance randomness comes from the
/// given generator (the per-run problem stream).
inline Problem build_problem(const json& spec, std::mt19937_64& rng) {
  std::string name;
  try {
    name = spec.at("name").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  auto geti = [&](const char* key, std::optional<int> def = {}) {
    if (!spec.contains(key)) {
      if (def) return *def;
      throw ConfigError("problem '" + name + "': missing parameter '" + key + "'");
    }
    return spec[key].get<int>();
  };
  auto getd = [&](const char* key, double def) { return spec.value(key, def); };

  try {
    if (name == "eigenvector") {
      if (spec.contains("diag")) {
        auto d = spec["diag"].get<std::vector<double>>();
        Mat A = Vec::Map(d.data(), static_cast<Eigen::Index>(d.size())).asDiagonal();
        return eigenvector_problem(A);
      }
      int n = geti("n");
      return eigenvector_problem(make_symmetric_gaussian(n, rng));
    }
    if (name == "dictionary") {
      int n = geti("n"), p = geti("p", 50000);
      double theta = getd("theta", 0.3), mu = getd("mu", 0.01);
      DictionaryInstance inst = make_dictionary_recovery(n, p, theta, mu, rng());
      return inst.problem;
    }
    if (name == "phase_retrieval") {
      int n = geti("n"), m = geti("m", 600);
      CVec x = make_complex_gaussian(n, rng);
      x /= x.norm();
      std::uniform_int_distribution<std::uint64_t> any;
      return phase_retrieval_problem(x, m, any(rng));
    }
    if (name == "tensor_single") {
      int n = geti("n");
      Mat A = spec.value("identity", false) ? Mat::Identity(n, n) : make_orthonormal(n, n, rng);
      return tensor_single_problem(A);
    }
    if (name == "tensor_joint") {
      int n = geti("n");
      int r = geti("r", n);
      Mat A = spec.value("identity", false) ? Mat::Identity(n, n) : make_orthonormal(n, n, rng);
      return tensor_joint_problem(A, r);
    }
    if (name == "phase_sync") {
      int n = geti("n");
      double sigma = getd("sigma", 0.2 / std::sqrt(static_cast<double>(n)));
      CVec z = make_uniform_phases(n, rng);
      CMat noise = make_hermitian_gaussian(n, rng);
      return phase_sync_problem(z, noise, sigma);
    }
    if (name == "z2_sync") {
      int n = geti("n");
      double sigma = getd("sigma", 0.2 / std::sqrt(static_cast<double>(n)));
      Vec z = make_sign_vector(n, rng);
      Mat noise = make_symmetric_gaussian(n, rng);
      return z2_sync_problem(z, noise, sigma);
    }
    if (name == "saddle_quadratic") return saddle_quadratic_problem();
    if (name == "saddle_cubic") return saddle_cubic_problem();
  } catch (const json::exception& e) {
    throw ConfigError("problem '" + name + "': " + e.what());
  }
  throw ConfigError("problem: unknown name '" + name + "'");
}

// -- writers -------------------------------------------------------------------

/// One emitted trace row; the on-disk schema of a minimize run.
struct TraceRow {
  int iter = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  std::optional<double> lambda_min;
  double delta = 0.0;
  std::optional<double> rho;
  double step_norm = 0.0;
  bool accepted = true;

  bool operator==(const TraceRow& o) const {
    auto eq = [](const std::optional<double>& a, const std::optional<double>& b) {
      return a.has_value() == b.has_value() && (!a || *a == *b);
    };
    return iter == o.iter && f == o.f && grad_norm == o.grad_norm &&
           eq(lambda_min, o.lambda_min) && delta == o.delta && eq(rho, o.rho) &&
           step_norm == o.step_norm && accepted == o.accepted;
  }
};

inline std::vector<TraceRow> trace_rows(const TRTrace& trace) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.records.size());
  for (const auto& r : trace.records)
    rows.push_back({r.iter, r.f, r.grad_norm, r.lambda_min, r.delta, r.rho, r.step_norm,
                    r.accepted});
  return rows;
}

inline std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// The one mutable header line lives by itself so byte comparisons can drop it.
inline void write_header(std::ostream& os, const json& config_echo) {
  os << "# " << kVersion << "\n";
  os << "# generated: " << timestamp_utc() << "\n";
  os << "# config: " << config_echo.dump() << "\n";
}

inline json trace_row_json(const TraceRow& r) {
  json j;
  j["iter"] = r.iter;
  j["f"] = r.f;
  j["grad_norm"] = r.grad_norm;
  j["lambda_min"] = r.lambda_min ? json(*r.lambda_min) : json(nullptr);
  j["delta"] = r.delta;
  j["rho"] = r.rho ? json(*r.rho) : json(nullptr);
  j["step_norm"] = r.step_norm;
  j["accepted"] = r.accepted;
  return j;
}

inline void emit_trace(const std::string& path, const std::vector<TraceRow>& rows,
                       const json& config_echo) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_trace: cannot write " + path);
  write_header(os, config_echo);
  for (const auto& r : rows) os << trace_row_json(r).dump() << "\n";
  if (!os) throw std::runtime_error("emit_trace: write failed for " + path);
}

inline std::vector<TraceRow> parse_trace(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("parse_trace: cannot read " + path);
  std::vector<TraceRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    json j = json::parse(line);
    TraceRow r;
    r.iter = j.at("iter").get<int>();
    r.f = j.at("f").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    if (!j.at("lambda_min").is_null()) r.lambda_min = j["lambda_min"].get<double>();
    r.delta = j.at("delta").get<double>();
    if (!j.at("rho").is_null()) r.rho = j["rho"].get<double>();
    r.step_norm = j.at("step_norm").get<double>();
    r.accepted = j.at("accepted").get<bool>();
    rows.push_back(r);
  }
  return rows;
}

struct GridMark {
  double p1 = 0.0, p2 = 0.0;
  double f_grid = 0.0;
  double f_polished = 0.0;
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  Vec point;
};

/// Tabulated objective values over a 2-parameter chart of the manifold.
struct LandscapeGrid {
  std::string parameterization;  // "sphere_angles" | "plane"
  std::vector<double> p1, p2;
  Mat values;  // values(i, j) = f at (p1[i], p2[j])
  bool wrap_p1 = false;
  std::vector<GridMark> minima;
};

inline void emit_grid(const std::string& path, const LandscapeGrid& grid,
                      const json& config_echo) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_grid: cannot write " + path);
  write_header(os, config_echo);
  os << "# parameterization: " << grid.parameterization << "\n";
  auto num = [](double v) { return json(v).dump(); };
  for (const auto& m : grid.minima)
    os << "# local_min: p1=" << num(m.p1) << " p2=" << num(m.p2) << " f=" << num(m.f_grid)
       << " polished_f=" << num(m.f_polished) << " grad_norm=" << num(m.grad_norm)
       << " lambda_min=" << num(m.lambda_min) << "\n";
  os << "param1,param2,f\n";
  for (size_t j = 0; j < grid.p2.size(); ++j)
    for (size_t i = 0; i < grid.p1.size(); ++i)
      os << num(grid.p1[i]) << "," << num(grid.p2[j]) << ","
         << num(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << "\n";
  if (!os) throw std::runtime_error("emit_grid: write failed for " + path);
}

// -- task execution ------------------------------------------------------------

inline ManifoldPoint chart_point(const ManifoldKind& kind, const std::string& parameterization,
                                 double p1, double p2) {
  if (parameterization == "sphere_angles") {
    return {kind, Vec{{std::sin(p2) * std::cos(p1), std::sin(p2) * std::sin(p1), std::cos(p2)}}};
  }
  Vec w = Vec::Zero(kind.ambient_dim());
  if (kind.family == ManifoldFamily::ComplexEuclidean && kind.n >= 2) {
    w(0) = p1;  // real parts of the first two complex coordinates
    w(2) = p2;
  } else {
    w(0) = p1;
    w(1) = p2;
  }
  return {kind, w};
}

inline LandscapeGrid compute_landscape(const Problem& problem, const RunConfig& cfg) {
  LandscapeGrid grid;
  const ManifoldKind kind = problem.kind;
  if (kind.family == ManifoldFamily::Sphere && kind.n == 3) {
    grid.parameterization = "sphere_angles";
    grid.wrap_p1 = true;
    for (int i = 0; i < cfg.landscape_res1; ++i)
      grid.p1.push_back(2.0 * M_PI * i / cfg.landscape_res1);
    for (int j = 0; j < cfg.landscape_res2; ++j)
      grid.p2.push_back(M_PI * j / (cfg.landscape_res2 - 1));
  } else if (kind.family == ManifoldFamily::Euclidean ||
             kind.family == ManifoldFamily::ComplexEuclidean) {
    grid.parameterization = "plane";
    for (int i = 0; i < cfg.landscape_res1; ++i)
      grid.p1.push_back(-cfg.landscape_range +
                        2.0 * cfg.landscape_range * i / (cfg.landscape_res1 - 1));
    for (int j = 0; j < cfg.landscape_res2; ++j)
      grid.p2.push_back(-cfg.landscape_range +
                        2.0 * cfg.landscape_range * j / (cfg.landscape_res2 - 1));
  } else {
    throw ConfigError("landscape: no chart for " + kind.name() +
                      " (supported: Sphere(3), Euclidean/ComplexEuclidean)");
  }

  const int n1 = static_cast<int>(grid.p1.size());
  const int n2 = static_cast<int>(grid.p2.size());
  grid.values.resize(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      grid.values(i, j) =
          problem.eval(chart_point(kind, grid.parameterization, grid.p1[i], grid.p2[j]).coords)
              .value;

  // classify pass: grid-local minima, polished by the solver
  auto value = [&](int i, int j) -> std::optional<double> {
    if (j < 0 || j >= n2) return std::nullopt;
    if (i < 0 || i >= n1) {
      if (!grid.wrap_p1) return std::nullopt;
      i = (i + n1) % n1;
    }
    return grid.values(i, j);
  };
  TRConfig polish;
  polish.grad_tol = 1e-7;
  polish.curv_tol = 1e-7;
  polish.max_iters = 200;
  Quotient quot = problem.solution_set ? problem.solution_set->quotient : Quotient::None;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      double fij = grid.values(i, j);
      bool is_min = true;
      for (auto [di, dj] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        auto v = value(i + di, j + dj);
        if (v && *v < fij) {
          is_min = false;
          break;
        }
      }
      if (!is_min) continue;
      ManifoldPoint x = chart_point(kind, grid.parameterization, grid.p1[i], grid.p2[j]);
      auto [xp, trace] = minimize(problem, x, polish);
      if (trace.status != TRStatus::Stationary) continue;
      bool dup = false;
      for (const auto& m : grid.minima)
        if (distance(xp, {kind, m.point}, quot) < 1e-3) {
          dup = true;
          break;
        }
      if (dup) continue;
      const auto& last = trace.records.back();
      grid.minima.push_back({grid.p1[i], grid.p2[j], fij, last.f, last.grad_norm,
                             last.lambda_min.value_or(0.0), xp.coords});
    }
  return grid;
}

struct RestartSummary {
  int restart = 0;
  std::uint64_t seed = 0;
  TRStatus status = TRStatus::MaxIters;
  int iterations = 0;
  double final_f = 0.0;
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  std::optional<double> distance_to_solution;
};

inline json summary_json(const RestartSummary& s) {
  json j;
  j["restart"] = s.restart;
  j["seed"] = s.seed;
  j["status"] = status_name(s.status);
  j["iterations"] = s.iterations;
  j["final_f"] = s.final_f;
  j["grad_norm"] = s.grad_norm;
  j["lambda_min"] = s.lambda_min;
  j["distance_to_solution"] =
      s.distance_to_solution ? json(*s.distance_to_solution) : json(nullptr);
  return j;
}

/// The whole zoo at standard desk sizes, for `fdcheck` with problem "all".
inline std::vector<json> zoo_specs() {
  return {
      json{{"name", "eigenvector"}, {"n", 10}},
      json{{"name", "dictionary"}, {"n", 3}, {"p", 5000}},
      json{{"name", "phase_retrieval"}, {"n", 8}, {"m", 600}},
      json{{"name", "tensor_single"}, {"n", 10}},
      json{{"name", "tensor_joint"}, {"n", 4}, {"r", 4}},
      json{{"name", "phase_sync"}, {"n", 50}},
      json{{"name", "z2_sync"}, {"n", 40}},
      json{{"name", "saddle_quadratic"}},
      json{{"name", "saddle_cubic"}},
  };
}

namespace detail {

inline FdReport fd_at_random_points(const Problem& problem, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ kSolverStream);
  FdReport worst;
  for (int i = 0; i < points; ++i) {
    ManifoldPoint x = random_point(problem.kind, rng);
    std::vector<TangentVector> dirs{random_tangent(x, rng), random_tangent(x, rng)};
    FdReport r = fd_check(problem, x, dirs);
    worst.max_grad_rel_err = std::max(worst.max_grad_rel_err, r.max_grad_rel_err);
    worst.max_hess_rel_err = std::max(worst.max_hess_rel_err, r.max_hess_rel_err);
  }
  return worst;
}

}  // namespace detail

/// Runs a parsed config; writes artifacts under cfg.out_dir.
/// Returns 0 on success, 2 on validation errors, 3 on solver stall/blow-up.
inline int run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  try {
    fs::create_directories(cfg.out_dir);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: cannot create output dir: " << e.what() << "\n";
    return 2;
  }
  json echo = cfg.echo();

  if (cfg.task == "fdcheck" && cfg.problem.value("name", "") == "all") {
    try {
      json out;
      out["meta"] = {{"version", kVersion}, {"timestamp", timestamp_utc()}, {"config", echo}};
      out["problems"] = json::array();
      bool pass = true;
      for (const json& spec : zoo_specs()) {
        std::mt19937_64 problem_rng(cfg.seed);
        Problem problem = build_problem(spec, problem_rng);
        FdReport r = detail::fd_at_random_points(problem, cfg.fd_points, cfg.seed);
        pass = pass && r.pass();
        out["problems"].push_back({{"name", spec["name"]},
                                   {"max_grad_rel_err", r.max_grad_rel_err},
                                   {"max_hess_rel_err", r.max_hess_rel_err},
                                   {"pass", r.pass()}});
      }
      out["pass"] = pass;
      std::ofstream os(cfg.out_dir + "/fdcheck.json");
      if (!os) throw std::runtime_error("cannot write fdcheck.json");
      os << out.dump(2) << "\n";
      return pass ? 0 : 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
  }

  Problem problem;
  try {
    std::mt19937_64 problem_rng(cfg.seed);
    problem = build_problem(cfg.problem, problem_rng);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cfg.task == "minimize") {
      std::vector<RestartSummary> summaries;
      for (int i = 0; i < cfg.n_restarts; ++i) {
        std::uint64_t restart_seed = cfg.seed + static_cast<std::uint64_t>(i);
        TRConfig scfg = solver_config_from_json(cfg.solver_overrides, restart_seed);
        std::mt19937_64 init_rng(restart_seed ^ kSolverStream);
        ManifoldPoint x0 = cfg.x0 ? make_point(problem.kind, *cfg.x0)
                                  : random_point(problem.kind, init_rng);
        auto [x, trace] = minimize(problem, x0, scfg);
        const auto& last = trace.records.back();
        RestartSummary s;
        s.restart = i;
        s.seed = restart_seed;
        s.status = trace.status;
        s.iterations = static_cast<int>(trace.records.size());
        s.final_f = last.f;
        s.grad_norm = last.grad_norm;
        s.lambda_min = last.lambda_min.value_or(0.0);
        if (problem.solution_set && !problem.solution_set->points.empty())
          s.distance_to_solution = nearest_solution_distance(problem, x);
        summaries.push_back(s);
        emit_trace(cfg.out_dir + "/trace_" + std::to_string(i) + ".jsonl", trace_rows(trace),
                   echo);
      }
      int best = 0;
      for (int i = 1; i < cfg.n_restarts; ++i)
        if (summaries[i].final_f < summaries[best].final_f) best = i;

      json out;
      out["meta"] = {{"version", kVersion},
                     {"timestamp", timestamp_utc()},
                     {"config", echo}};
      out["restarts"] = json::array();
      for (const auto& s : summaries) out["restarts"].push_back(summary_json(s));
      out["best"] = summary_json(summaries[best]);
      std::ofstream os(cfg.out_dir + "/summary.json");
      if (!os) throw std::runtime_error("cannot write summary.json");
      os << out.dump(2) << "\n";

      if (summaries[best].status == TRStatus::Stalled ||
          summaries[best].status == TRStatus::NonFinite) {
        std::cerr << "error: solver " << status_name(summaries[best].status) << "\n";
        return 3;
      }
      return 0;
    }

    if (cfg.task == "certify") {
      RidabilityEstimate est = estimate_parameters(problem, cfg.certify_samples, cfg.seed);
      json out;
      out["meta"] = {{"version", kVersion},
                     {"timestamp", timestamp_utc()},
                     {"config", echo}};
      out["n_samples"] = est.n_samples;
      out["box_valid"] = est.box_valid;
      out["coverage"] = {{"strong_gradient", est.frac_strong_gradient},
                         {"negative_curvature", est.frac_negative_curvature},
                         {"strong_convexity", est.frac_strong_convexity},
                         {"unclassified", est.frac_unclassified}};
      auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      out["alpha_hat"] = opt(est.alpha_hat);
      out["beta_hat"] = opt(est.beta_hat);
      out["gamma_hat"] = opt(est.gamma_hat);
      out["delta_hat"] = opt(est.delta_hat);
      out["min_lambda_near_solution"] = opt(est.min_lambda_near_solution);
      out["n_unclassified"] = est.unclassified_points.size();
      std::ofstream os(cfg.out_dir + "/certify.json");
      if (!os) throw std::runtime_error("cannot write certify.json");
      os << out.dump(2) << "\n";
      return 0;
    }

    if (cfg.task == "landscape") {
      LandscapeGrid grid = compute_landscape(problem, cfg);
      emit_grid(cfg.out_dir + "/landscape.csv", grid, echo);
      return 0;
    }

    // fdcheck
    FdReport worst = detail::fd_at_random_points(problem, cfg.fd_points, cfg.seed);
    bool pass = worst.pass();
    json out;
    out["meta"] = {{"version", kVersion}, {"timestamp", timestamp_utc()}, {"config", echo}};
    out["points"] = cfg.fd_points;
    out["max_grad_rel_err"] = worst.max_grad_rel_err;
    out["max_hess_rel_err"] = worst.max_hess_rel_err;
    out["pass"] = pass;
    std::ofstream os(cfg.out_dir + "/fdcheck.json");
    if (!os) throw std::runtime_error("cannot write fdcheck.json");
    os << out.dump(2) << "\n";
    return pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::string> task;
  std::optional<std::uint64_t> seed;
};

inline int run_config_file(const std::string& path, const CliOverrides& overrides = {}) {
  json j;
  {
    std::ifstream is(path);
    if (!is) {
      std::cerr << "error: cannot open config '" << path << "'\n";
      return 2;
    }
    try {
      is >> j;
    } catch (const json::exception& e) {
      std::cerr << "error: config parse: " << e.what() << "\n";
      return 2;
    }
  }
  RunConfig cfg;
  try {
    cfg = RunConfig::from_json(j);
    if (overrides.out) cfg.out_dir = *overrides.out;
    if (overrides.task) {
      cfg.task = *overrides.task;
      if (cfg.task != "minimize" && cfg.task != "certify" && cfg.task != "landscape" &&
          cfg.task != "fdcheck") {
        std::cerr << "error: unknown task override '" << cfg.task << "'\n";
        return 2;
      }
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return run(cfg);
}

}  // namespace rtropt
