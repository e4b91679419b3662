#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rtropt/manifold.hpp"

namespace rtropt {

/// Quadratic model min <g,xi> + 1/2 <H xi, xi> over the ball ||xi|| <= radius,
/// expressed in an orthonormal tangent basis.
struct TRSubproblem {
  Vec g;
  Mat H;
  double radius = 1.0;
};

struct TRSolution {
  Vec xi;
  double model_decrease = 0.0;  // model(0) - model(xi), >= 0 at the optimum
  bool on_boundary = false;
  double multiplier = 0.0;  // Lagrange multiplier of the norm constraint
  bool hard_case = false;
};

inline double model_value(const TRSubproblem& p, const Vec& xi) {
  if (xi.size() != p.g.size() || p.H.rows() != p.g.size() || p.H.cols() != p.g.size())
    throw std::invalid_argument("model_value: dimension mismatch");
  return p.g.dot(xi) + 0.5 * xi.dot(p.H * xi);
}

namespace detail {

// lexicographic tie-break between xi and -xi: prefer <xi,g> <= 0, then the
// lexicographically smaller vector
inline Vec resolve_sign(Vec xi, const Vec& g) {
  double gx = g.dot(xi);
  double scale = std::max(1.0, g.norm() * xi.norm());
  if (gx > 1e-14 * scale) return -xi;
  if (gx < -1e-14 * scale) return xi;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (xi(i) < 0.0) return xi;
    if (xi(i) > 0.0) return -xi;
  }
  return xi;
}

}  // namespace detail

/// Globally minimizes the quadratic model over the ball, via a dense
/// eigendecomposition and safeguarded Newton on the secular equation in the
/// multiplier. Handles the hard case by augmenting with a bottom eigenvector
/// component to reach the boundary.
inline TRSolution solve_exact(const TRSubproblem& p) {
  const Eigen::Index n = p.g.size();
  if (p.H.rows() != n || p.H.cols() != n)
    throw std::invalid_argument("solve_exact: H/g dimension mismatch");
  if (!(p.radius > 0.0)) throw std::invalid_argument("solve_exact: radius must be positive");
  if (!p.g.allFinite() || !p.H.allFinite())
    throw std::invalid_argument("solve_exact: non-finite entries");
  double hscale = std::max(1.0, p.H.cwiseAbs().maxCoeff());
  if ((p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-8 * hscale)
    throw std::invalid_argument("solve_exact: H is not symmetric");

  const Mat Hs = 0.5 * (p.H + p.H.transpose());
  const double delta = p.radius;

  if (n == 0) return {Vec(0), 0.0, false, 0.0, false};

  Eigen::SelfAdjointEigenSolver<Mat> eig(Hs);
  const Vec lam = eig.eigenvalues();  // ascending
  const Mat V = eig.eigenvectors();
  const Vec gt = V.transpose() * p.g;
  const double lam_min = lam(0);
  const double gnorm = p.g.norm();

  auto finish = [&](Vec xi, double multiplier, bool boundary, bool hard) {
    TRSolution s;
    s.xi = std::move(xi);
    s.model_decrease = -(p.g.dot(s.xi) + 0.5 * s.xi.dot(Hs * s.xi));
    if (s.model_decrease < 0.0 && s.model_decrease > -1e-12 * std::max(1.0, hscale * delta * delta))
      s.model_decrease = 0.0;
    s.on_boundary = boundary;
    s.multiplier = multiplier;
    s.hard_case = hard;
    return s;
  };

  // norm of the regularized step for multiplier mu, skipping the bottom
  // cluster when requested
  const double cluster_tol = 1e-12 * std::max(1.0, std::abs(lam_min));
  auto step_norm = [&](double mu, bool skip_bottom) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (skip_bottom && lam(i) <= lam_min + cluster_tol) continue;
      double d = lam(i) + mu;
      s += (gt(i) / d) * (gt(i) / d);
    }
    return std::sqrt(s);
  };
  auto assemble = [&](double mu, bool skip_bottom) {
    Vec xit = Vec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (skip_bottom && lam(i) <= lam_min + cluster_tol) continue;
      xit(i) = -gt(i) / (lam(i) + mu);
    }
    return Vec(V * xit);
  };

  // interior Newton step when H is positive definite
  if (lam_min > 0.0) {
    double nrm = step_norm(0.0, false);
    if (nrm <= delta) {
      Vec xi = assemble(0.0, false);
      return finish(std::move(xi), 0.0, nrm >= delta * (1.0 - 1e-12), false);
    }
  }

  // gradient weight on the bottom eigenspace decides the hard case
  double g_bottom = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (lam(i) <= lam_min + cluster_tol) g_bottom += gt(i) * gt(i);
  g_bottom = std::sqrt(g_bottom);
  const bool degenerate_g = (gnorm == 0.0) || (g_bottom < 1e-10 * gnorm);

  if (lam_min <= 0.0 && degenerate_g) {
    // candidate multiplier -lam_min; if the perpendicular part already fits in
    // the ball, pad with a bottom eigenvector to reach the boundary
    double mu = -lam_min;
    double nperp = step_norm(mu, true);
    if (nperp <= delta) {
      // mu = 0 with consistent g is already an interior optimum; only a
      // strictly negative bottom eigenvalue forces a boundary eigen-step
      bool hard = lam_min < 0.0;
      Vec xi = assemble(mu, true);
      if (hard) {
        double tau = std::sqrt(std::max(0.0, delta * delta - nperp * nperp));
        xi += detail::resolve_sign(tau * V.col(0), p.g);
      }
      return finish(std::move(xi), mu, hard || nperp >= delta * (1.0 - 1e-12), hard);
    }
  }

  // boundary solution: root of ||xi(mu)|| = delta on (max(0,-lam_min), inf).
  // The root can sit anywhere between machine-epsilon and ||g||/delta above
  // the floor, so bracket in log-distance from the floor first and polish
  // with Newton on 1/delta - 1/||xi(mu)|| afterwards.
  const double mu_floor = std::max(0.0, -lam_min);
  const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  double off_lo = 1e-18 * lam_scale;  // distance above the floor
  double off_hi = std::max(1.0, gnorm / delta + 2.0 * lam_scale);
  while (step_norm(mu_floor + off_hi, false) > delta) {
    off_hi *= 4.0;
    if (!std::isfinite(off_hi)) throw std::runtime_error("solve_exact: secular bracket overflow");
  }
  while (step_norm(mu_floor + off_lo, false) < delta && off_lo > 1e-300) off_lo /= 16.0;

  double mu = mu_floor + std::sqrt(off_lo * off_hi);
  for (int it = 0; it < 200; ++it) {
    double nrm = step_norm(mu, false);
    if (std::abs(nrm - delta) <= 1e-10 * delta) break;
    if (nrm > delta)
      off_lo = mu - mu_floor;
    else
      off_hi = mu - mu_floor;
    // Newton on phi(mu) = 1/nrm - 1/delta
    double dsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = lam(i) + mu;
      dsum += gt(i) * gt(i) / (d * d * d);
    }
    double phi = 1.0 / nrm - 1.0 / delta;
    double dphi = dsum / (nrm * nrm * nrm);
    double next = (dphi > 0.0) ? mu - phi / dphi : mu_floor;
    // fall back to geometric bisection when Newton leaves the bracket or
    // barely moves (it crawls when started far on the flat side)
    double next_off = next - mu_floor;
    if (!(next_off > off_lo && next_off < off_hi) ||
        std::abs(next - mu) < 1e-3 * (off_hi - off_lo))
      next = mu_floor + std::sqrt(off_lo * off_hi);
    if (next == mu) break;
    mu = next;
  }

  Vec xi = assemble(mu, false);
  double nrm = xi.norm();
  if (!xi.allFinite() || !(nrm > 0.0)) {
    // the gradient weight on the bottom eigenspace is below representable
    // resolution; resolve as the hard case at the exact floor
    double nperp = step_norm(mu_floor, true);
    Vec base = assemble(mu_floor, true);
    double tau = std::sqrt(std::max(0.0, delta * delta - nperp * nperp));
    Vec cand = detail::resolve_sign(tau * V.col(0), p.g);
    return finish(base + cand, mu_floor, true, true);
  }
  // exact boundary length, preserving direction
  xi *= delta / nrm;
  return finish(std::move(xi), mu, true, false);
}

}  // namespace rtropt
