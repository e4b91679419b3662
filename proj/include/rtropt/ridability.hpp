#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "rtropt/manifold.hpp"
#include "rtropt/problems.hpp"
#include "rtropt/solver.hpp"

namespace rtropt {

struct RegimeParams {
  double alpha = 0.0, beta = 0.0, gamma = 0.0, delta = 0.0;

  void validate() const {
    if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && delta > 0.0))
      throw std::invalid_argument("RegimeParams: all parameters must be positive");
  }
};

/// Which of the three point regimes hold at a point, with the measured margins
/// they were decided on.
struct RegimeReport {
  Vec point;
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  std::optional<double> nearest_min_dist;
  bool strong_gradient = false;
  bool negative_curvature = false;
  bool strong_convexity = false;
  struct {
    double beta = 0.0;   // measured gradient norm
    double alpha = 0.0;  // measured -lambda_min
    double gamma = 0.0;  // measured lambda_min
  } margins;

  bool unclassified() const { return !(strong_gradient || negative_curvature || strong_convexity); }
};

/// Point classification against a parameter box. Condition 3 uses the
/// single-point surrogate: quotient distance to a known minimizer <= delta and
/// lambda_min(Hess at x) >= gamma; it is skipped when no solution set is known.
inline RegimeReport classify_point(const Problem& problem, const ManifoldPoint& x,
                                   const RegimeParams& params) {
  params.validate();
  EuclideanDerivatives eu = problem.eval(x.coords);
  TangentModel m = tangent_model_at(problem, x, eu);
  RegimeReport r;
  r.point = x.coords;
  r.grad_norm = m.g.norm();
  r.lambda_min = min_eigenvalue(m.H);
  r.margins.beta = r.grad_norm;
  r.margins.alpha = -r.lambda_min;
  r.margins.gamma = r.lambda_min;
  r.strong_gradient = r.grad_norm >= params.beta;
  r.negative_curvature = r.lambda_min <= -params.alpha;
  if (problem.solution_set && !problem.solution_set->points.empty()) {
    r.nearest_min_dist = nearest_solution_distance(problem, x);
    r.strong_convexity = *r.nearest_min_dist <= params.delta && r.lambda_min >= params.gamma;
  }
  return r;
}

/// Monte-Carlo surrogate for the 2*delta-neighborhood strong-convexity claim:
/// samples K retracted points around x_star and checks lambda_min >= gamma at
/// each. A sampled check, not a proof.
struct NeighborhoodConvexityReport {
  bool all_hold = true;
  double min_lambda = std::numeric_limits<double>::infinity();
  int violations = 0;
};

inline NeighborhoodConvexityReport verify_neighborhood_convexity(const Problem& problem,
                                                                 const ManifoldPoint& x_star,
                                                                 double delta, double gamma,
                                                                 int K = 200,
                                                                 std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * delta);
  NeighborhoodConvexityReport rep;
  for (int k = 0; k < K; ++k) {
    TangentVector u = random_tangent(x_star, rng);
    u.coords *= unif(rng);
    ManifoldPoint y = retract(x_star, u);
    EuclideanDerivatives eu = problem.eval(y.coords);
    double lam = min_eigenvalue(tangent_model_at(problem, y, eu).H);
    rep.min_lambda = std::min(rep.min_lambda, lam);
    if (lam < gamma) ++rep.violations;
  }
  rep.all_hold = rep.violations == 0;
  return rep;
}

struct RidabilityEstimate {
  int n_samples = 0;
  double frac_strong_gradient = 0.0;
  double frac_negative_curvature = 0.0;
  double frac_strong_convexity = 0.0;
  double frac_unclassified = 0.0;
  bool box_valid = false;
  std::optional<double> alpha_hat, beta_hat, gamma_hat, delta_hat;
  // weak-convexity floor measured near the known minimizers (may be ~0 for
  // objectives that are only positive semidefinite there)
  std::optional<double> min_lambda_near_solution;
  std::vector<Vec> unclassified_points;
};

namespace detail {

struct SampleStats {
  double grad = 0.0;
  double lam = 0.0;
  double dist = std::numeric_limits<double>::quiet_NaN();
};

inline double probe_radius_from_solutions(const Problem& problem) {
  const auto& sol = *problem.solution_set;
  double min_gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < sol.points.size(); ++i)
    for (size_t j = i + 1; j < sol.points.size(); ++j) {
      double d = distance({problem.kind, sol.points[i]}, {problem.kind, sol.points[j]},
                          sol.quotient);
      if (d > 1e-6) min_gap = std::min(min_gap, d);
    }
  if (!std::isfinite(min_gap)) return 0.25;
  return std::min(0.5 * min_gap, 0.5);
}

}  // namespace detail

/// Samples the manifold uniformly, measures (grad norm, lambda_min, quotient
/// distance) per point, and sweeps (alpha, beta) over a log grid from 1e-6 to
/// 1e2 to find the largest parameter box (by product of data-tightened
/// margins) under which every sample lands in at least one regime. Boxes that
/// never exercise a regime are rejected as vacuous unless nothing else exists.
inline RidabilityEstimate estimate_parameters(const Problem& problem, int n_samples,
                                              std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("estimate_parameters: need n_samples >= 1");
  // convexity margins below the grid floor do not count as strictly positive
  constexpr double kGammaFloor = 1e-6;
  std::mt19937_64 rng(seed);

  std::vector<detail::SampleStats> stats(n_samples);
  std::vector<Vec> points(n_samples);
  const bool has_solutions = problem.solution_set && !problem.solution_set->points.empty();
  for (int i = 0; i < n_samples; ++i) {
    ManifoldPoint x = random_point(problem.kind, rng);
    EuclideanDerivatives eu = problem.eval(x.coords);
    TangentModel m = tangent_model_at(problem, x, eu);
    stats[i].grad = m.g.norm();
    stats[i].lam = min_eigenvalue(m.H);
    if (has_solutions) stats[i].dist = nearest_solution_distance(problem, x);
    points[i] = std::move(x.coords);
  }

  // log grid, 8 points per decade over [1e-6, 1e2]
  std::vector<double> grid;
  for (int k = 0; k <= 64; ++k) grid.push_back(std::pow(10.0, -6.0 + k / 8.0));

  struct Box {
    double alpha_grid = 0.0, beta_grid = 0.0;
    double alpha_hat = 0.0, beta_hat = 0.0;
    double gamma_hat = 0.0, delta_hat = 0.0;
    int n1 = 0, n2 = 0, nU = 0;
    int unclassifiable = 0;
    bool exercised_cond3 = false;
    double product() const { return alpha_hat * beta_hat * gamma_hat * delta_hat; }
  };

  std::optional<Box> best_full;     // valid, condition 3 exercised (ranked by full product)
  std::optional<Box> best_vacuous;  // valid, condition 3 never needed (ranked by alpha*beta)
  std::optional<Box> fallback;      // no valid box: least unclassifiable samples

  for (double alpha : grid) {
    for (double beta : grid) {
      Box b;
      b.alpha_grid = alpha;
      b.beta_grid = beta;
      double min_grad_r1 = std::numeric_limits<double>::infinity();
      double min_neg_r2 = std::numeric_limits<double>::infinity();
      double min_lam_U = std::numeric_limits<double>::infinity();
      double max_dist_U = 0.0;
      bool U_ok = true;
      for (const auto& s : stats) {
        bool r1 = s.grad >= beta;
        bool r2 = s.lam <= -alpha;
        if (r1) {
          ++b.n1;
          min_grad_r1 = std::min(min_grad_r1, s.grad);
        }
        if (r2) {
          ++b.n2;
          min_neg_r2 = std::min(min_neg_r2, -s.lam);
        }
        if (!r1 && !r2) {
          ++b.nU;
          if (!has_solutions || !(s.lam >= kGammaFloor) || !std::isfinite(s.dist)) {
            U_ok = false;
            ++b.unclassifiable;
          } else {
            min_lam_U = std::min(min_lam_U, s.lam);
            max_dist_U = std::max(max_dist_U, s.dist);
          }
        }
      }
      bool exercised = b.n1 > 0 && b.n2 > 0;
      if (exercised && U_ok && b.nU > 0) {
        b.alpha_hat = min_neg_r2;
        b.beta_hat = min_grad_r1;
        b.gamma_hat = min_lam_U;
        b.delta_hat = max_dist_U;
        b.exercised_cond3 = true;
        if (!best_full || b.product() > best_full->product()) best_full = b;
      } else if (exercised && U_ok) {
        b.alpha_hat = min_neg_r2;
        b.beta_hat = min_grad_r1;
        if (!best_vacuous ||
            b.alpha_hat * b.beta_hat > best_vacuous->alpha_hat * best_vacuous->beta_hat)
          best_vacuous = b;
      } else if (!fallback || b.unclassifiable < fallback->unclassifiable ||
                 (b.unclassifiable == fallback->unclassifiable &&
                  (b.alpha_grid > fallback->alpha_grid ||
                   (b.alpha_grid == fallback->alpha_grid && b.beta_grid > fallback->beta_grid)))) {
        fallback = b;
      }
    }
  }

  RidabilityEstimate est;
  est.n_samples = n_samples;

  const Box* chosen = best_full   ? &*best_full
                      : best_vacuous ? &*best_vacuous
                                     : &*fallback;
  est.box_valid = best_full.has_value() || best_vacuous.has_value();

  // probe the claimed neighborhood of each known minimizer for the convexity
  // floor (and for gamma/delta when no sample exercised condition 3)
  std::optional<double> probe_gamma;
  double probe_delta = 0.0;
  if (has_solutions) {
    probe_delta = best_full ? chosen->delta_hat : detail::probe_radius_from_solutions(problem);
    std::mt19937_64 probe_rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(0.0, probe_delta);
    double lam_floor = std::numeric_limits<double>::infinity();
    for (const Vec& s : problem.solution_set->points) {
      ManifoldPoint xs{problem.kind, s};
      for (int k = 0; k < 200; ++k) {
        TangentVector u = random_tangent(xs, probe_rng);
        u.coords *= unif(probe_rng);
        ManifoldPoint y = retract(xs, u);
        EuclideanDerivatives eu = problem.eval(y.coords);
        lam_floor = std::min(lam_floor, min_eigenvalue(tangent_model_at(problem, y, eu).H));
      }
    }
    probe_gamma = lam_floor;
  }
  est.min_lambda_near_solution = probe_gamma;

  est.frac_strong_gradient = static_cast<double>(chosen->n1) / n_samples;
  est.frac_negative_curvature = static_cast<double>(chosen->n2) / n_samples;
  if (est.box_valid) {
    est.frac_strong_convexity = static_cast<double>(chosen->nU) / n_samples;
    est.frac_unclassified = 0.0;
    est.alpha_hat = chosen->alpha_hat;
    est.beta_hat = chosen->beta_hat;
    if (chosen->exercised_cond3) {
      est.gamma_hat = chosen->gamma_hat;
      est.delta_hat = chosen->delta_hat;
    } else if (probe_gamma && *probe_gamma >= kGammaFloor) {
      est.gamma_hat = probe_gamma;
      est.delta_hat = probe_delta;
    }
  } else {
    // report the least-bad box honestly
    for (int i = 0; i < n_samples; ++i) {
      const auto& s = stats[i];
      bool r1 = s.grad >= chosen->beta_grid;
      bool r2 = s.lam <= -chosen->alpha_grid;
      bool r3 = has_solutions && std::isfinite(s.dist) && s.lam >= kGammaFloor;
      if (!r1 && !r2 && !r3) est.unclassified_points.push_back(points[i]);
    }
    est.frac_unclassified = static_cast<double>(est.unclassified_points.size()) / n_samples;
    est.frac_strong_convexity =
        std::max(0.0, 1.0 - est.frac_strong_gradient - est.frac_negative_curvature -
                          est.frac_unclassified);
  }
  return est;
}

/// A brute-force local minimizer found on the angular grid and polished.
struct GridMinimizer {
  ManifoldPoint point;
  double f = 0.0;
};

/// Dense angular grid search for local minimizers on Sphere(2) or Sphere(3):
/// grid points below all their neighbors, polished by the trust-region solver
/// and deduplicated under the problem's quotient.
inline std::vector<GridMinimizer> brute_force_minimizers(const Problem& problem,
                                                         double resolution) {
  if (problem.kind.family != ManifoldFamily::Sphere ||
      (problem.kind.n != 2 && problem.kind.n != 3))
    throw std::invalid_argument("brute_force_minimizers: only Sphere(2) and Sphere(3)");
  if (!(resolution > 0.0))
    throw std::invalid_argument("brute_force_minimizers: resolution must be positive");

  Quotient quot = problem.solution_set ? problem.solution_set->quotient : Quotient::None;
  std::vector<Vec> candidates;

  if (problem.kind.n == 2) {
    const int N = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI / resolution)));
    Vec f(N);
    for (int i = 0; i < N; ++i) {
      double th = 2.0 * M_PI * i / N;
      f(i) = problem.eval(Vec{{std::cos(th), std::sin(th)}}).value;
    }
    for (int i = 0; i < N; ++i) {
      double fl = f((i + N - 1) % N), fr = f((i + 1) % N);
      if (f(i) <= fl && f(i) <= fr) {
        double th = 2.0 * M_PI * i / N;
        candidates.push_back(Vec{{std::cos(th), std::sin(th)}});
      }
    }
  } else {
    const int Ninc = std::max(8, static_cast<int>(std::ceil(M_PI / resolution)));
    const int Naz = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI / resolution)));
    Mat f(Ninc + 1, Naz);
    auto point_at = [&](int i, int j) {
      double inc = M_PI * i / Ninc;
      double az = 2.0 * M_PI * j / Naz;
      return Vec{{std::sin(inc) * std::cos(az), std::sin(inc) * std::sin(az), std::cos(inc)}};
    };
    for (int i = 0; i <= Ninc; ++i)
      for (int j = 0; j < Naz; ++j) f(i, j) = problem.eval(point_at(i, j)).value;
    auto is_min = [&](int i, int j) {
      double fij = f(i, j);
      if (i == 0 || i == Ninc) {  // poles: compare against the adjacent ring
        int ring = (i == 0) ? 1 : Ninc - 1;
        if (j != 0) return false;
        for (int jj = 0; jj < Naz; ++jj)
          if (f(ring, jj) < fij) return false;
        return true;
      }
      for (int dj : {-1, 1})
        if (f(i, (j + dj + Naz) % Naz) < fij) return false;
      for (int di : {-1, 1})
        if (f(i + di, j) < fij) return false;
      return true;
    };
    for (int i = 0; i <= Ninc; ++i)
      for (int j = 0; j < Naz; ++j)
        if (is_min(i, j)) candidates.push_back(point_at(i, j));
  }

  TRConfig polish;
  // refine to far below grid tolerance without demanding sub-roundoff gradients
  polish.grad_tol = 1e-7;
  polish.curv_tol = 1e-7;
  polish.max_iters = 200;
  polish.delta0 = std::min(1.0, 4.0 * resolution);

  std::vector<GridMinimizer> out;
  for (const Vec& c : candidates) {
    auto [xp, trace] = minimize(problem, {problem.kind, c}, polish);
    if (trace.status != TRStatus::Stationary) continue;
    bool dup = false;
    for (const auto& m : out)
      if (distance(xp, m.point, quot) < 1e-4) {
        dup = true;
        break;
      }
    if (!dup) out.push_back({xp, trace.records.back().f});
  }
  std::sort(out.begin(), out.end(), [](const GridMinimizer& a, const GridMinimizer& b) {
    return a.f < b.f;
  });
  return out;
}

/// Central finite differences of t -> f(retract(x, t*u)) at orders one and
/// two, against the analytic Riemannian derivatives. Per direction, the best
/// step wins (small steps drown in roundoff, large ones in truncation); the
/// report keeps the worst direction.
struct FdReport {
  double max_grad_rel_err = 0.0;
  double max_hess_rel_err = 0.0;

  bool pass(double grad_tol = 1e-5, double hess_tol = 1e-4) const {
    return max_grad_rel_err < grad_tol && max_hess_rel_err < hess_tol;
  }
};

inline FdReport fd_check(const Problem& problem, const ManifoldPoint& x,
                         const std::vector<TangentVector>& directions,
                         const std::vector<double>& steps = {1e-2, 1e-3, 3e-4, 1e-4, 3e-5,
                                                             1e-5}) {
  for (double h : steps)
    if (!(h > 1e-12)) throw std::invalid_argument("fd_check: step underflow");

  EuclideanDerivatives eu = problem.eval(x.coords);
  const double f0 = eu.value;
  TangentVector g = riemannian_grad(x, eu);

  FdReport rep;
  for (const TangentVector& dir : directions) {
    TangentVector u = dir;
    double nu = u.coords.norm();
    if (nu < 1e-300) continue;
    u.coords /= nu;

    double d1 = g.coords.dot(u.coords);
    Vec hu = riemannian_hess_vec(x, eu, u).coords;
    double d2 = hu.dot(u.coords);
    // a direction can be nearly orthogonal to the gradient (or sit on a zero
    // curvature crossing); errors are measured against the operator scale so
    // such directions do not blow up the relative error
    double scale1 = std::max({std::abs(d1), g.coords.norm(), 1e-12});
    double scale2 = std::max({std::abs(d2), hu.norm(), 1e-12});

    double best1 = std::numeric_limits<double>::infinity();
    double best2 = std::numeric_limits<double>::infinity();
    for (double h : steps) {
      TangentVector th = u;
      th.coords *= h;
      double fp = problem.eval(retract(x, th).coords).value;
      th.coords = -th.coords;
      double fm = problem.eval(retract(x, th).coords).value;
      double fd1 = (fp - fm) / (2.0 * h);
      double fd2 = (fp - 2.0 * f0 + fm) / (h * h);
      best1 = std::min(best1, std::abs(fd1 - d1) / std::max(scale1, std::abs(fd1)));
      best2 = std::min(best2, std::abs(fd2 - d2) / std::max(scale2, std::abs(fd2)));
    }
    rep.max_grad_rel_err = std::max(rep.max_grad_rel_err, best1);
    rep.max_hess_rel_err = std::max(rep.max_hess_rel_err, best2);
  }
  return rep;
}

}  // namespace rtropt
