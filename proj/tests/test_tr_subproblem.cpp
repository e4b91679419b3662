#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "rtropt/tr_subproblem.hpp"

using namespace rtropt;
using Catch::Approx;

namespace {

Mat random_symmetric(int d, std::mt19937_64& rng, double scale = 2.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Mat H(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) H(i, j) = gauss(rng);
  return Mat(0.5 * (H + H.transpose()));
}

// g made orthogonal to the bottom eigenvector and a radius wide enough that
// the perpendicular step fits: the boundary needs an explicit eigen component
TRSubproblem make_hard_case(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Mat H = random_symmetric(d, rng);
  Eigen::SelfAdjointEigenSolver<Mat> eig(H);
  Mat V = eig.eigenvectors();
  Vec lam = eig.eigenvalues();
  lam(0) = -std::abs(lam(0)) - 0.5;  // force a negative bottom eigenvalue
  H = V * lam.asDiagonal() * V.transpose();
  Vec g(d);
  for (int i = 0; i < d; ++i) g(i) = gauss(rng);
  g -= V.col(0).dot(g) * V.col(0);
  double nperp = 0.0;
  for (int i = 1; i < d; ++i) {
    double c = V.col(i).dot(g) / (lam(i) - lam(0));
    nperp += c * c;
  }
  double radius = 1.5 * std::sqrt(nperp) + 0.3;
  return {g, Mat(0.5 * (H + H.transpose())), radius};
}

void check_optimality_certificate(const TRSubproblem& p, const TRSolution& s) {
  const Eigen::Index d = p.g.size();
  Mat Hs = 0.5 * (p.H + p.H.transpose());
  double scale = std::max(1.0, p.g.norm() + Hs.norm() * p.radius);
  REQUIRE(s.xi.norm() <= p.radius * (1.0 + 1e-10));
  REQUIRE(s.model_decrease >= 0.0);
  REQUIRE(s.multiplier >= -1e-12);
  REQUIRE(std::abs(s.multiplier * (p.radius - s.xi.norm())) <= 1e-8 * scale * p.radius);
  // (H + mu I) xi = -g and H + mu I >= 0
  Vec resid = Hs * s.xi + s.multiplier * s.xi + p.g;
  REQUIRE(resid.norm() <= 1e-8 * scale);
  Eigen::SelfAdjointEigenSolver<Mat> eig(Hs, Eigen::EigenvaluesOnly);
  REQUIRE(eig.eigenvalues()(0) + s.multiplier >= -1e-8 * scale);
  (void)d;
}

}  // namespace

TEST_CASE("unconstrained Newton step inside the ball") {
  TRSubproblem p{Vec{{1.0, 0.0}}, Mat::Identity(2, 2), 10.0};
  TRSolution s = solve_exact(p);
  CHECK((s.xi - Vec{{-1.0, 0.0}}).norm() < 1e-12);
  CHECK_FALSE(s.on_boundary);
  CHECK(s.multiplier == Approx(0.0).margin(1e-14));
  CHECK_FALSE(s.hard_case);
}

TEST_CASE("pure negative-curvature step hits the boundary with the stated decrease") {
  Mat H = Vec{{-1.0, 1.0}}.asDiagonal();
  TRSubproblem p{Vec::Zero(2), H, 1.0};
  TRSolution s = solve_exact(p);
  CHECK(std::abs(s.xi(0)) == Approx(1.0));
  CHECK(s.xi(1) == Approx(0.0).margin(1e-12));
  CHECK(s.model_decrease == Approx(0.5));
  CHECK(s.on_boundary);
  CHECK(s.hard_case);
  check_optimality_certificate(p, s);

  // deterministic tie-break: repeated solves return the same vector, and it is
  // the lexicographically smaller of the pair
  TRSolution s2 = solve_exact(p);
  CHECK(s.xi == s2.xi);
  CHECK(s.xi(0) < 0.0);
}

TEST_CASE("hard case detected and matched against the grid oracle") {
  Mat H = Vec{{-1.0, 1.0}}.asDiagonal();
  TRSubproblem p{Vec{{0.0, 0.1}}, H, 1.0};
  TRSolution s = solve_exact(p);
  CHECK(s.hard_case);
  CHECK(std::abs(s.xi(0)) > 0.1);  // nonzero eigen component
  CHECK(s.on_boundary);
  double grid = testing::trs_grid_min(p.g, p.H, p.radius, 1e-3);  // resolution 1e-3
  CHECK(std::abs(model_value(p, s.xi) - grid) < 1e-5);
  check_optimality_certificate(p, s);
}

TEST_CASE("model_value basics and the naive-loop oracle") {
  Mat H = Vec{{-1.0, 1.0}}.asDiagonal();
  TRSubproblem p{Vec::Zero(2), H, 1.0};
  CHECK(model_value(p, Vec::Zero(2)) == 0.0);
  CHECK(model_value(p, Vec{{1.0, 0.0}}) == Approx(-0.5));
  CHECK_THROWS_AS(model_value(p, Vec::Zero(3)), std::invalid_argument);

  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 50; ++rep) {
    int d = 2 + static_cast<int>(rng() % 4);
    Mat Hr = random_symmetric(d, rng);
    Vec g(d), xi(d);
    for (int i = 0; i < d; ++i) {
      g(i) = gauss(rng);
      xi(i) = gauss(rng);
    }
    TRSubproblem q{g, Hr, 1.0};
    REQUIRE(model_value(q, xi) == Approx(testing::naive_model_value(g, Hr, xi)).margin(1e-12));
  }
}

TEST_CASE("solver errors on malformed input") {
  Mat bad(2, 2);
  bad << 0.0, 1.0, -1.0, 0.0;  // skew
  CHECK_THROWS_AS(solve_exact({Vec::Zero(2), bad, 1.0}), std::invalid_argument);
  Mat nan_mat = Mat::Constant(2, 2, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(solve_exact({Vec::Zero(2), nan_mat, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_exact({Vec::Zero(2), Mat::Identity(2, 2), 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_exact({Vec::Zero(3), Mat::Identity(2, 2), 1.0}), std::invalid_argument);
}

TEST_CASE("global optimality against grid search on random instances") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> urad(0.1, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    int d = (rep % 2 == 0) ? 2 : 3;
    TRSubproblem p;
    if (rep % 10 < 2) {
      p = make_hard_case(d, rng);
    } else {
      p.H = random_symmetric(d, rng);
      p.g = Vec(d);
      for (int i = 0; i < d; ++i) p.g(i) = gauss(rng);
      p.radius = urad(rng);
    }
    TRSolution s = solve_exact(p);
    check_optimality_certificate(p, s);
    double grid = testing::trs_grid_min(p.g, p.H, p.radius, d == 2 ? 5e-3 : 2e-2);
    REQUIRE(model_value(p, s.xi) <= grid + 1e-5);
  }
}

TEST_CASE("negative-curvature and Cauchy decrease bounds") {
  std::mt19937_64 rng(211);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> urad(0.1, 2.0);
  for (int rep = 0; rep < 300; ++rep) {
    int d = 2 + static_cast<int>(rng() % 5);
    Mat H = random_symmetric(d, rng);
    Vec g(d);
    for (int i = 0; i < d; ++i) g(i) = gauss(rng);
    double radius = urad(rng);
    TRSubproblem p{g, H, radius};
    TRSolution s = solve_exact(p);

    Eigen::SelfAdjointEigenSolver<Mat> eig(p.H, Eigen::EigenvaluesOnly);
    double lam_min = eig.eigenvalues()(0);
    double lam_abs = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (lam_min < 0.0)
      REQUIRE(s.model_decrease >= 0.5 * (-lam_min) * radius * radius * (1.0 - 1e-9));
    if (g.norm() > 0.0) {
      double cauchy = 0.5 * g.norm() * std::min(radius, g.norm() / std::max(lam_abs, 1e-300));
      REQUIRE(s.model_decrease >= cauchy * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("scaling the model scales the decrease and keeps the step") {
  std::mt19937_64 rng(307);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 50; ++rep) {
    int d = 2 + static_cast<int>(rng() % 4);
    Mat H = random_symmetric(d, rng);
    Vec g(d);
    for (int i = 0; i < d; ++i) g(i) = gauss(rng);
    double c = std::exp(gauss(rng));
    TRSubproblem p{g, H, 1.3};
    TRSubproblem pc{Vec(c * g), Mat(c * H), 1.3};
    TRSolution s = solve_exact(p);
    TRSolution sc = solve_exact(pc);
    REQUIRE((s.xi - sc.xi).norm() <= 1e-10 * std::max(1.0, s.xi.norm()));
    REQUIRE(sc.model_decrease ==
            Approx(c * s.model_decrease).epsilon(1e-10).margin(1e-12 * c));
  }
}
