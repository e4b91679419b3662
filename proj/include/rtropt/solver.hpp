#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtropt/manifold.hpp"
#include "rtropt/problems.hpp"
#include "rtropt/tr_subproblem.hpp"

namespace rtropt {

struct TRConfig {
  double delta0 = 1.0;
  double delta_max = 10.0;
  double eta_accept = 0.1;  // accept step when rho >= eta_accept
  double shrink = 0.25;
  double expand = 2.0;
  double shrink_threshold = 0.25;  // shrink radius when rho below this
  double expand_threshold = 0.75;  // expand on boundary steps with rho above this
  double grad_tol = 1e-8;
  double curv_tol = 1e-7;  // stop when lambda_min(Hess) >= -curv_tol
  int max_iters = 500;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(delta0 > 0.0) || !(delta_max >= delta0))
      throw std::invalid_argument("TRConfig: need 0 < delta0 <= delta_max");
    if (!(eta_accept > 0.0 && eta_accept < 0.25))
      throw std::invalid_argument("TRConfig: need 0 < eta_accept < 0.25");
    if (!(shrink > 0.0 && shrink < 1.0 && expand > 1.0))
      throw std::invalid_argument("TRConfig: need 0 < shrink < 1 < expand");
    if (!(grad_tol > 0.0 && curv_tol > 0.0))
      throw std::invalid_argument("TRConfig: tolerances must be positive");
    if (max_iters < 1) throw std::invalid_argument("TRConfig: max_iters must be >= 1");
  }
};

enum class TRStatus { Stationary, MaxIters, Stalled, NonFinite };

inline std::string status_name(TRStatus s) {
  switch (s) {
    case TRStatus::Stationary: return "stationary";
    case TRStatus::MaxIters: return "max_iters";
    case TRStatus::Stalled: return "stalled";
    case TRStatus::NonFinite: return "non_finite";
  }
  return "?";
}

/// One row per outer iteration. Row 0 describes the initial point; rows k >= 1
/// also carry the step attempted from the previous iterate (rho is absent on
/// row 0, lambda_min whenever it was not computed).
struct IterRecord {
  int iter = 0;
  Vec x;
  double f = 0.0;
  double grad_norm = 0.0;
  std::optional<double> lambda_min;
  double delta = 0.0;  // radius used for the step attempted at this row
  std::optional<double> rho;
  double step_norm = 0.0;
  bool accepted = true;
};

struct TRTrace {
  std::vector<IterRecord> records;
  TRStatus status = TRStatus::MaxIters;
  std::string diagnostic;
};

/// Tangent-space quadratic model at x: gradient and dense Hessian in an
/// orthonormal basis U, assembled column by column from Hessian-vector
/// products and then symmetrized.
struct TangentModel {
  Mat U;
  Vec g;
  Mat H;
};

inline TangentModel tangent_model_at(const Problem& problem, const ManifoldPoint& x,
                                     const EuclideanDerivatives& eu) {
  TangentModel m;
  m.U = tangent_basis(x);
  const Eigen::Index d = m.U.cols();
  TangentVector rg = riemannian_grad(x, eu);
  m.g = m.U.transpose() * rg.coords;
  m.H.resize(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    TangentVector uj{x, m.U.col(j)};
    m.H.col(j) = m.U.transpose() * riemannian_hess_vec(x, eu, uj).coords;
  }
  m.H = 0.5 * (m.H + m.H.transpose()).eval();
  return m;
}

inline TRSubproblem quadratic_model_at(const Problem& problem, const ManifoldPoint& x,
                                       double radius = 1.0) {
  EuclideanDerivatives eu = problem.eval(x.coords);
  TangentModel m = tangent_model_at(problem, x, eu);
  return {std::move(m.g), std::move(m.H), radius};
}

inline double min_eigenvalue(const Mat& H) {
  if (H.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> eig(H, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

struct StationarityReport {
  bool first_order = false;
  bool second_order = false;
  double lambda_min = 0.0;
  double grad_norm = 0.0;
};

inline StationarityReport check_stationarity(const Problem& problem, const ManifoldPoint& x,
                                             double grad_tol, double curv_tol) {
  EuclideanDerivatives eu = problem.eval(x.coords);
  TangentModel m = tangent_model_at(problem, x, eu);
  StationarityReport r;
  r.grad_norm = m.g.norm();
  r.lambda_min = min_eigenvalue(m.H);
  r.first_order = r.grad_norm <= grad_tol;
  r.second_order = r.lambda_min >= -curv_tol;
  return r;
}

/// Riemannian trust-region minimization: model, exact subproblem, retraction,
/// accept/reject with adaptive radius, stopping at approximate second-order
/// stationarity.
inline std::pair<ManifoldPoint, TRTrace> minimize(const Problem& problem,
                                                  const ManifoldPoint& x0, const TRConfig& cfg) {
  cfg.validate();
  detail::check_same_kind(problem.kind, x0.kind, "minimize");
  if (!is_feasible(x0, 1e-9))
    throw std::invalid_argument("minimize: x0 violates the manifold constraints");

  TRTrace trace;
  ManifoldPoint x = x0;
  EuclideanDerivatives eu = problem.eval(x.coords);
  if (!std::isfinite(eu.value)) {
    trace.status = TRStatus::NonFinite;
    trace.diagnostic = "objective non-finite at x0";
    return {x, trace};
  }
  TangentModel model = tangent_model_at(problem, x, eu);
  double grad_norm = model.g.norm();
  double lam_min = min_eigenvalue(model.H);
  double delta = cfg.delta0;

  trace.records.push_back(
      {0, x.coords, eu.value, grad_norm, lam_min, delta, std::nullopt, 0.0, true});

  for (int iter = 1; static_cast<int>(trace.records.size()) < cfg.max_iters; ++iter) {
    if (grad_norm <= cfg.grad_tol && lam_min >= -cfg.curv_tol) {
      trace.status = TRStatus::Stationary;
      return {x, trace};
    }

    TRSolution sol = solve_exact({model.g, model.H, delta});
    if (!(sol.model_decrease > 0.0) || !sol.xi.allFinite()) {
      trace.status = TRStatus::Stalled;
      trace.diagnostic = "subproblem produced no model decrease";
      return {x, trace};
    }

    TangentVector step{x, model.U * sol.xi};
    ManifoldPoint x_trial = retract(x, step);
    EuclideanDerivatives eu_trial = problem.eval(x_trial.coords);
    if (!std::isfinite(eu_trial.value)) {
      trace.status = TRStatus::NonFinite;
      trace.diagnostic = "objective non-finite at trial point (model blow-up)";
      return {x, trace};
    }

    double rho = (eu.value - eu_trial.value) / sol.model_decrease;
    bool accepted = rho >= cfg.eta_accept;
    double delta_used = delta;
    if (rho < cfg.shrink_threshold)
      delta *= cfg.shrink;
    else if (rho > cfg.expand_threshold && sol.on_boundary)
      delta = std::min(delta * cfg.expand, cfg.delta_max);

    if (accepted) {
      x = std::move(x_trial);
      eu = std::move(eu_trial);
      model = tangent_model_at(problem, x, eu);
      grad_norm = model.g.norm();
      lam_min = min_eigenvalue(model.H);
    }

    trace.records.push_back({iter, x.coords, eu.value, grad_norm, lam_min, delta_used, rho,
                             sol.xi.norm(), accepted});

    if (delta < 1e-14 && !accepted) {
      trace.status = TRStatus::Stalled;
      trace.diagnostic = "radius collapsed below 1e-14 without acceptance";
      return {x, trace};
    }
  }

  if (grad_norm <= cfg.grad_tol && lam_min >= -cfg.curv_tol)
    trace.status = TRStatus::Stationary;
  else
    trace.status = TRStatus::MaxIters;
  return {x, trace};
}

}  // namespace rtropt
