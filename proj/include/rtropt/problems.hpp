#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtropt/manifold.hpp"

namespace rtropt {

using CMat = Eigen::MatrixXcd;

/// Known minimizers (up to the quotient) for test harnesses and certification.
struct SolutionSet {
  std::vector<Vec> points;
  Quotient quotient = Quotient::None;
};

/// Parameter box claimed for the objective class; symbolic constants stay
/// unknown and only documented in `form`.
struct RidabilityParams {
  std::optional<double> alpha, beta, gamma, delta;
  std::string form;
};

/// An objective bundle: ambient value/gradient/Hessian-vector product over a
/// manifold, plus optional solution metadata.
struct Problem {
  ManifoldKind kind;
  std::function<EuclideanDerivatives(const Vec&)> eval;
  std::string label;
  std::optional<SolutionSet> solution_set;
  std::optional<RidabilityParams> ridability;
};

inline double nearest_solution_distance(const Problem& problem, const ManifoldPoint& x) {
  if (!problem.solution_set || problem.solution_set->points.empty())
    throw std::logic_error("nearest_solution_distance: problem has no known solution set");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& s : problem.solution_set->points)
    best = std::min(best, distance(x, {x.kind, s}, problem.solution_set->quotient));
  return best;
}

// -- seeded instance data ------------------------------------------------------

inline Mat make_symmetric_gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
  return (G + G.transpose()) / std::sqrt(2.0);
}

inline CMat make_hermitian_gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  CMat H(n, n);
  for (int i = 0; i < n; ++i) {
    H(i, i) = gauss(rng);
    for (int j = i + 1; j < n; ++j) {
      std::complex<double> v(gauss(rng), gauss(rng));
      H(i, j) = v / std::sqrt(2.0);
      H(j, i) = std::conj(H(i, j));
    }
  }
  return H;
}

/// Q factor of a Gaussian matrix, column signs fixed by a positive R diagonal.
inline Mat make_orthonormal(int n, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Mat G(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(n, k);
  Mat R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

inline Mat make_bernoulli_gaussian(int n, int p, double theta, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) {
      double mask = unif(rng) < theta ? 1.0 : 0.0;
      double g = gauss(rng);
      X(i, j) = mask * g;
    }
  return X;
}

inline CVec make_complex_gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  CVec z(n);
  for (int i = 0; i < n; ++i) z(i) = std::complex<double>(gauss(rng), gauss(rng)) / std::sqrt(2.0);
  return z;
}

inline CVec make_uniform_phases(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
  CVec z(n);
  for (int i = 0; i < n; ++i) z(i) = std::polar(1.0, unif(rng));
  return z;
}

inline Vec make_sign_vector(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = coin(rng) ? 1.0 : -1.0;
  return z;
}

// -- the zoo -------------------------------------------------------------------

/// minimize f(x) = -x'Ax on Sphere(n); minimizers are the top eigenvectors.
inline Problem eigenvector_problem(const Mat& A) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw std::invalid_argument("eigenvector_problem: A must be square");
  double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("eigenvector_problem: A must be symmetric");

  auto As = std::make_shared<const Mat>(0.5 * (A + A.transpose()));
  Problem prob;
  prob.kind = ManifoldKind::sphere(n);
  prob.label = "eigenvector";
  prob.eval = [As](const Vec& x) {
    EuclideanDerivatives eu;
    Vec Ax = (*As) * x;
    eu.value = -x.dot(Ax);
    eu.grad = -2.0 * Ax;
    eu.hess_vec = [As](const Vec& u) { return Vec(-2.0 * ((*As) * u)); };
    return eu;
  };

  Eigen::SelfAdjointEigenSolver<Mat> eig(*As);
  SolutionSet sol;
  sol.points.push_back(eig.eigenvectors().col(n - 1));
  sol.points.push_back(-eig.eigenvectors().col(n - 1));
  sol.quotient = Quotient::None;
  prob.solution_set = std::move(sol);
  prob.ridability =
      RidabilityParams{{}, {}, {}, {}, "(c*gap, c*gap/lam_1, c*gap, 2c*gap/lam_1) with "
                                       "gap = lam_{n-1}-lam_n, constant c unspecified"};
  return prob;
}

/// minimize f(q) = (1/p) sum_k h_mu(q' ybar_k) on Sphere(n), where
/// h_mu(t) = mu log cosh(t/mu) smooths |t|.
inline Problem dictionary_problem(const Mat& Ybar, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("dictionary_problem: mu must be positive");
  if (Ybar.cols() < 1) throw std::invalid_argument("dictionary_problem: need p >= 1 columns");
  const int n = static_cast<int>(Ybar.rows());
  const double p = static_cast<double>(Ybar.cols());

  auto Y = std::make_shared<const Mat>(Ybar);
  Problem prob;
  prob.kind = ManifoldKind::sphere(n);
  prob.label = "dictionary";
  prob.eval = [Y, mu, p](const Vec& q) {
    Eigen::ArrayXd t = (Y->transpose() * q).array() / mu;
    Eigen::ArrayXd at = t.abs();
    // log cosh(t) = |t| + log1p(exp(-2|t|)) - log 2, overflow-safe
    double logcosh_sum = (at + (-2.0 * at).exp().log1p()).sum() - t.size() * std::log(2.0);
    auto th = std::make_shared<const Eigen::ArrayXd>(t.tanh());
    EuclideanDerivatives eu;
    eu.value = mu / p * logcosh_sum;
    eu.grad = (*Y) * th->matrix() / p;
    eu.hess_vec = [Y, th, mu, p](const Vec& w) {
      Eigen::ArrayXd sech2 = 1.0 - th->square();
      return Vec((*Y) * (sech2 * (Y->transpose() * w).array()).matrix() / (p * mu));
    };
    return eu;
  };
  return prob;
}

struct DictionaryInstance {
  Problem problem;
  Mat x0;  // planted sparse coefficients (Ybar = x0, square dictionary = I)
};

/// Sparse-recovery instance: Ybar = X0 with i.i.d. Bernoulli(theta)-Gaussian
/// entries, so the sparsifying directions are the coordinate axes.
inline DictionaryInstance make_dictionary_recovery(int n, int p, double theta, double mu,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DictionaryInstance inst;
  inst.x0 = make_bernoulli_gaussian(n, p, theta, rng);
  inst.problem = dictionary_problem(inst.x0, mu);
  SolutionSet sol;
  Mat I = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    sol.points.push_back(I.col(i));
    sol.points.push_back(-I.col(i));
  }
  sol.quotient = Quotient::None;
  inst.problem.solution_set = std::move(sol);
  inst.problem.ridability = RidabilityParams{
      {}, {}, {}, {}, "(c*theta, c*theta, c*theta/mu, sqrt(2)*mu/7), constant c unspecified"};
  return inst;
}

/// minimize f(z) = (1/4m) sum_k (y_k^2 - |a_k^* z|^2)^2 over C^n (real
/// coordinates of doubled dimension); y_k = |a_k^* x_true|, a_k i.i.d.
/// standard complex Gaussian.
inline Problem phase_retrieval_problem(const CVec& x_true, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("phase_retrieval_problem: need m >= 1");
  const int n = static_cast<int>(x_true.size());
  std::mt19937_64 rng(seed);
  auto A = std::make_shared<CMat>(n, m);
  for (int k = 0; k < m; ++k) A->col(k) = make_complex_gaussian(n, rng);
  auto y2 = std::make_shared<Eigen::ArrayXd>((A->adjoint() * x_true).array().abs2());

  Problem prob;
  prob.kind = ManifoldKind::complex_euclidean(n);
  prob.label = "phase_retrieval";
  prob.eval = [A, y2, m](const Vec& w) {
    CVec z = to_complex(w);
    auto s = std::make_shared<const CVec>(A->adjoint() * z);
    auto r = std::make_shared<const Eigen::ArrayXd>(s->array().abs2() - *y2);
    EuclideanDerivatives eu;
    eu.value = r->square().sum() / (4.0 * m);
    eu.grad = from_complex((*A) * (r->cast<std::complex<double>>() * s->array()).matrix()) / m;
    eu.hess_vec = [A, s, r, m](const Vec& uw) {
      CVec u = to_complex(uw);
      CVec t = A->adjoint() * u;
      Eigen::ArrayXd ds = 2.0 * (s->array().conjugate() * t.array()).real();
      CVec core = (ds.cast<std::complex<double>>() * s->array() +
                   r->cast<std::complex<double>>() * t.array())
                      .matrix();
      return Vec(from_complex((*A) * core) / m);
    };
    return eu;
  };
  SolutionSet sol;
  sol.points.push_back(from_complex(x_true));
  sol.quotient = Quotient::Phase;
  prob.solution_set = std::move(sol);
  prob.ridability = RidabilityParams{
      {}, {}, {}, {}, "(c, c/(n log m), c, c/(n log m)), constant c unspecified"};
  return prob;
}

/// minimize f(u) = -sum_i (a_i'u)^4 on Sphere(n) for orthonormal components;
/// the only minimizers are the signed components.
inline Problem tensor_single_problem(const Mat& components) {
  const int n = static_cast<int>(components.rows());
  const int k = static_cast<int>(components.cols());
  if ((components.transpose() * components - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("tensor_single_problem: components must be orthonormal");

  auto A = std::make_shared<const Mat>(components);
  Problem prob;
  prob.kind = ManifoldKind::sphere(n);
  prob.label = "tensor_single";
  prob.eval = [A](const Vec& u) {
    Eigen::ArrayXd c = (A->transpose() * u).array();
    auto c2 = std::make_shared<const Eigen::ArrayXd>(c.square());
    EuclideanDerivatives eu;
    eu.value = -c2->square().sum();
    eu.grad = -4.0 * ((*A) * (c * (*c2)).matrix());
    eu.hess_vec = [A, c2](const Vec& w) {
      return Vec(-12.0 * ((*A) * ((*c2) * (A->transpose() * w).array()).matrix()));
    };
    return eu;
  };
  SolutionSet sol;
  for (int i = 0; i < k; ++i) {
    sol.points.push_back(A->col(i));
    sol.points.push_back(-A->col(i));
  }
  sol.quotient = Quotient::None;
  prob.solution_set = std::move(sol);
  prob.ridability = RidabilityParams{
      7.0 / n, {}, 3.0, {}, "(7/n, 1/poly(n), 3, 1/poly(n))"};
  return prob;
}

/// minimize g(u_1..u_r) = sum_{i != j} sum_k (a_k'u_i)^2 (a_k'u_j)^2 on
/// Oblique(n, r); zero exactly at distinct signed components.
inline Problem tensor_joint_problem(const Mat& components, int r) {
  const int n = static_cast<int>(components.rows());
  const int k = static_cast<int>(components.cols());
  if (r > n) throw std::invalid_argument("tensor_joint_problem: need r <= n");
  if ((components.transpose() * components - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("tensor_joint_problem: components must be orthonormal");

  auto A = std::make_shared<const Mat>(components);
  ManifoldKind kind = ManifoldKind::oblique(n, r);
  Problem prob;
  prob.kind = kind;
  prob.label = "tensor_joint";
  prob.eval = [A, kind](const Vec& ucoords) {
    auto U = as_matrix(kind, ucoords);
    auto C = std::make_shared<const Mat>(A->transpose() * U);  // k x r
    auto S = std::make_shared<const Mat>(C->cwiseProduct(*C));
    auto srow = std::make_shared<const Vec>(S->rowwise().sum());
    EuclideanDerivatives eu;
    eu.value = srow->squaredNorm() - S->squaredNorm();
    Mat margin = srow->replicate(1, S->cols()) - *S;
    Mat G = 4.0 * ((*A) * C->cwiseProduct(margin));
    eu.grad = Vec::Map(G.data(), kind.ambient_dim());
    eu.hess_vec = [A, C, S, srow, kind](const Vec& wcoords) {
      auto W = as_matrix(kind, wcoords);
      Mat Wc = A->transpose() * W;
      Mat dS = 2.0 * C->cwiseProduct(Wc);
      Vec dsrow = dS.rowwise().sum();
      Mat margin = srow->replicate(1, S->cols()) - *S;
      Mat hessC = 4.0 * (Wc.cwiseProduct(margin) +
                         C->cwiseProduct(dsrow.replicate(1, S->cols()) - dS));
      Mat HU = (*A) * hessC;
      return Vec(Vec::Map(HU.data(), kind.ambient_dim()));
    };
    return eu;
  };
  SolutionSet sol;
  sol.points.push_back(Vec::Map(Mat(components.leftCols(r)).data(), kind.ambient_dim()));
  sol.quotient = Quotient::SignedPermutation;
  prob.solution_set = std::move(sol);
  prob.ridability = RidabilityParams{
      {}, {}, 1.0, {}, "(1/poly(n), 1/poly(n), 1, 1/poly(n))"};
  return prob;
}

/// minimize f(x) = -x^* C x on the unit-modulus torus, C = z z^* + sigma*Delta.
inline Problem phase_sync_problem(const CVec& z_true, const CMat& delta_noise, double sigma) {
  const int n = static_cast<int>(z_true.size());
  for (int i = 0; i < n; ++i)
    if (std::abs(std::abs(z_true(i)) - 1.0) > 1e-12)
      throw std::invalid_argument("phase_sync_problem: z_true entries must be unit-modulus");
  if (delta_noise.rows() != n || delta_noise.cols() != n ||
      (delta_noise - delta_noise.adjoint()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, delta_noise.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("phase_sync_problem: Delta must be Hermitian n x n");

  auto C = std::make_shared<const CMat>(z_true * z_true.adjoint() + sigma * delta_noise);
  Problem prob;
  prob.kind = ManifoldKind::complex_torus(n);
  prob.label = "phase_sync";
  prob.eval = [C](const Vec& w) {
    CVec x = to_complex(w);
    CVec Cx = (*C) * x;
    EuclideanDerivatives eu;
    eu.value = -x.dot(Cx).real();
    eu.grad = -2.0 * from_complex(Cx);
    eu.hess_vec = [C](const Vec& uw) { return Vec(-2.0 * from_complex((*C) * to_complex(uw))); };
    return eu;
  };
  SolutionSet sol;
  sol.points.push_back(from_complex(z_true));
  sol.quotient = Quotient::Phase;
  prob.solution_set = std::move(sol);
  return prob;
}

/// minimize -trace(W'CW) over unit rows w_i in R^2, stored transposed as a
/// 2 x n unit-column matrix; C = z z' + sigma*Delta.
inline Problem z2_sync_problem(const Vec& z_true, const Mat& delta_noise, double sigma) {
  const int n = static_cast<int>(z_true.size());
  for (int i = 0; i < n; ++i)
    if (std::abs(std::abs(z_true(i)) - 1.0) > 1e-12)
      throw std::invalid_argument("z2_sync_problem: z_true entries must be +-1");
  if (delta_noise.rows() != n || delta_noise.cols() != n ||
      (delta_noise - delta_noise.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, delta_noise.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("z2_sync_problem: Delta must be symmetric n x n");

  auto C = std::make_shared<const Mat>(z_true * z_true.transpose() + sigma * delta_noise);
  ManifoldKind kind = ManifoldKind::oblique(2, n);
  Problem prob;
  prob.kind = kind;
  prob.label = "z2_sync";
  prob.eval = [C, kind](const Vec& coords) {
    auto X = as_matrix(kind, coords);  // 2 x n
    Mat XC = X * (*C);
    EuclideanDerivatives eu;
    eu.value = -XC.cwiseProduct(X).sum();
    eu.grad = Vec::Map(Mat(-2.0 * XC).data(), kind.ambient_dim());
    eu.hess_vec = [C, kind](const Vec& vcoords) {
      auto V = as_matrix(kind, vcoords);
      return Vec(Vec::Map(Mat(-2.0 * V * (*C)).data(), kind.ambient_dim()));
    };
    return eu;
  };
  SolutionSet sol;
  Mat Xsol = Mat::Zero(2, n);
  Xsol.row(0) = z_true.transpose();
  sol.points.push_back(Vec::Map(Xsol.data(), kind.ambient_dim()));
  sol.quotient = Quotient::Rotation;
  prob.solution_set = std::move(sol);
  return prob;
}

/// Rounds a 2 x n unit-column iterate to signs: project columns on the
/// dominant direction (top left singular vector) and take signs.
inline Vec z2_round(const ManifoldPoint& x) {
  if (x.kind.family != ManifoldFamily::Oblique || x.kind.n != 2)
    throw std::invalid_argument("z2_round: expects an Oblique(2, n) point");
  auto X = as_matrix(x.kind, x.coords);
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU);
  Vec proj = X.transpose() * svd.matrixU().col(0);
  Vec out(X.cols());
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = proj(i) >= 0.0 ? 1.0 : -1.0;
  return out;
}

/// f(x, y) = x^2 - y^2: gradient zero at the origin, curvature -2 available.
inline Problem saddle_quadratic_problem() {
  Problem prob;
  prob.kind = ManifoldKind::euclidean(2);
  prob.label = "saddle_quadratic";
  prob.eval = [](const Vec& x) {
    EuclideanDerivatives eu;
    eu.value = x(0) * x(0) - x(1) * x(1);
    eu.grad = Vec{{2.0 * x(0), -2.0 * x(1)}};
    eu.hess_vec = [](const Vec& u) { return Vec{{2.0 * u(0), -2.0 * u(1)}}; };
    return eu;
  };
  return prob;
}

/// f(x, y) = x^3 - y^3: gradient and Hessian both vanish at the origin, so no
/// second-order test can see the saddle.
inline Problem saddle_cubic_problem() {
  Problem prob;
  prob.kind = ManifoldKind::euclidean(2);
  prob.label = "saddle_cubic";
  prob.eval = [](const Vec& x) {
    EuclideanDerivatives eu;
    eu.value = x(0) * x(0) * x(0) - x(1) * x(1) * x(1);
    eu.grad = Vec{{3.0 * x(0) * x(0), -3.0 * x(1) * x(1)}};
    eu.hess_vec = [x](const Vec& u) { return Vec{{6.0 * x(0) * u(0), -6.0 * x(1) * u(1)}}; };
    return eu;
  };
  return prob;
}

inline std::pair<Problem, Problem> fig_saddle_fixtures() {
  return {saddle_quadratic_problem(), saddle_cubic_problem()};
}

/// Restriction of a sphere problem to span(B) for orthonormal B: a sphere
/// problem in the subspace coordinates. Used for deflation.
inline Problem restrict_to_subspace(const Problem& problem, const Mat& B) {
  if (problem.kind.family != ManifoldFamily::Sphere)
    throw std::invalid_argument("restrict_to_subspace: only sphere problems");
  const int k = static_cast<int>(B.cols());
  if (B.rows() != problem.kind.n ||
      (B.transpose() * B - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("restrict_to_subspace: B must have orthonormal columns");

  auto Bp = std::make_shared<const Mat>(B);
  auto base_eval = problem.eval;
  Problem out;
  out.kind = ManifoldKind::sphere(k);
  out.label = problem.label + "|restricted";
  out.eval = [Bp, base_eval](const Vec& u) {
    EuclideanDerivatives inner = base_eval((*Bp) * u);
    EuclideanDerivatives eu;
    eu.value = inner.value;
    eu.grad = Bp->transpose() * inner.grad;
    auto hv = inner.hess_vec;
    eu.hess_vec = [Bp, hv](const Vec& w) { return Vec(Bp->transpose() * hv((*Bp) * w)); };
    return eu;
  };
  return out;
}

/// Orthonormal basis of the orthogonal complement of the given linearly
/// independent vectors, from the full Q factor.
inline Mat complement_basis(int n, const std::vector<Vec>& vs) {
  const int k = static_cast<int>(vs.size());
  if (k == 0) return Mat::Identity(n, n);
  Mat V(n, k);
  for (int j = 0; j < k; ++j) V.col(j) = vs[j];
  Eigen::HouseholderQR<Mat> qr(V);
  Mat Q = qr.householderQ();
  return Q.rightCols(n - k);
}

}  // namespace rtropt
