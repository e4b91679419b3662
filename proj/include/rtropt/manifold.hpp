#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtropt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

constexpr double kFeasTol = 1e-12;

enum class ManifoldFamily { Sphere, Oblique, Euclidean, ComplexEuclidean, ComplexTorus };

/// A manifold family plus its dimensions. Points are carried as flat real
/// ambient coordinate vectors; complex entries are interleaved (re, im).
struct ManifoldKind {
  ManifoldFamily family = ManifoldFamily::Euclidean;
  int n = 0;  // vector dim / matrix rows / complex dim
  int p = 1;  // columns (Oblique only)

  static ManifoldKind sphere(int n) { return {ManifoldFamily::Sphere, n, 1}; }
  static ManifoldKind oblique(int n, int p) { return {ManifoldFamily::Oblique, n, p}; }
  static ManifoldKind euclidean(int n) { return {ManifoldFamily::Euclidean, n, 1}; }
  static ManifoldKind complex_euclidean(int n) { return {ManifoldFamily::ComplexEuclidean, n, 1}; }
  static ManifoldKind complex_torus(int n) { return {ManifoldFamily::ComplexTorus, n, 1}; }

  int ambient_dim() const {
    switch (family) {
      case ManifoldFamily::Sphere: return n;
      case ManifoldFamily::Oblique: return n * p;
      case ManifoldFamily::Euclidean: return n;
      case ManifoldFamily::ComplexEuclidean: return 2 * n;
      case ManifoldFamily::ComplexTorus: return 2 * n;
    }
    return 0;
  }

  int tangent_dim() const {
    switch (family) {
      case ManifoldFamily::Sphere: return n - 1;
      case ManifoldFamily::Oblique: return p * (n - 1);
      case ManifoldFamily::Euclidean: return n;
      case ManifoldFamily::ComplexEuclidean: return 2 * n;
      case ManifoldFamily::ComplexTorus: return n;
    }
    return 0;
  }

  bool operator==(const ManifoldKind& o) const {
    return family == o.family && n == o.n && (family != ManifoldFamily::Oblique || p == o.p);
  }
  bool operator!=(const ManifoldKind& o) const { return !(*this == o); }

  std::string name() const {
    switch (family) {
      case ManifoldFamily::Sphere: return "Sphere(" + std::to_string(n) + ")";
      case ManifoldFamily::Oblique:
        return "Oblique(" + std::to_string(n) + "," + std::to_string(p) + ")";
      case ManifoldFamily::Euclidean: return "Euclidean(" + std::to_string(n) + ")";
      case ManifoldFamily::ComplexEuclidean: return "ComplexEuclidean(" + std::to_string(n) + ")";
      case ManifoldFamily::ComplexTorus: return "ComplexTorus(" + std::to_string(n) + ")";
    }
    return "?";
  }
};

struct ManifoldPoint {
  ManifoldKind kind;
  Vec coords;
};

/// A vector in the tangent space at `base`, in the same ambient coordinates.
struct TangentVector {
  ManifoldPoint base;
  Vec coords;

  double norm() const { return coords.norm(); }
};

/// Ambient (Euclidean) derivatives of an objective at one point.
struct EuclideanDerivatives {
  double value = 0.0;
  Vec grad;
  std::function<Vec(const Vec&)> hess_vec;
};

// -- interleaved complex helpers ---------------------------------------------

inline CVec to_complex(const Vec& w) {
  CVec z(w.size() / 2);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = {w(2 * i), w(2 * i + 1)};
  return z;
}

inline Vec from_complex(const CVec& z) {
  Vec w(2 * z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    w(2 * i) = z(i).real();
    w(2 * i + 1) = z(i).imag();
  }
  return w;
}

inline Eigen::Map<const Mat> as_matrix(const ManifoldKind& kind, const Vec& coords) {
  return {coords.data(), kind.n, kind.p};
}

namespace detail {

inline void check_ambient(const ManifoldKind& kind, const Vec& v, const char* where) {
  if (v.size() != kind.ambient_dim())
    throw std::invalid_argument(std::string(where) + ": expected ambient dimension " +
                                std::to_string(kind.ambient_dim()) + ", got " +
                                std::to_string(v.size()));
}

inline void check_same_kind(const ManifoldKind& a, const ManifoldKind& b, const char* where) {
  if (a != b)
    throw std::invalid_argument(std::string(where) + ": manifold kind mismatch (" + a.name() +
                                " vs " + b.name() + ")");
}

}  // namespace detail

/// Max violation of the kind's feasibility constraints (0 for Euclidean kinds).
inline double feasibility_error(const ManifoldKind& kind, const Vec& coords) {
  detail::check_ambient(kind, coords, "feasibility_error");
  switch (kind.family) {
    case ManifoldFamily::Sphere:
      return std::abs(coords.norm() - 1.0);
    case ManifoldFamily::Oblique: {
      double worst = 0.0;
      auto X = as_matrix(kind, coords);
      for (int j = 0; j < kind.p; ++j) worst = std::max(worst, std::abs(X.col(j).norm() - 1.0));
      return worst;
    }
    case ManifoldFamily::ComplexTorus: {
      double worst = 0.0;
      for (int i = 0; i < kind.n; ++i)
        worst = std::max(worst, std::abs(std::hypot(coords(2 * i), coords(2 * i + 1)) - 1.0));
      return worst;
    }
    case ManifoldFamily::Euclidean:
    case ManifoldFamily::ComplexEuclidean:
      return 0.0;
  }
  return 0.0;
}

inline bool is_feasible(const ManifoldPoint& x, double tol = kFeasTol) {
  return feasibility_error(x.kind, x.coords) <= tol;
}

/// Metric projection of an ambient vector onto the manifold (normalization
/// per constraint block; identity for the Euclidean kinds).
inline Vec project_to_manifold(const ManifoldKind& kind, const Vec& v) {
  detail::check_ambient(kind, v, "project_to_manifold");
  switch (kind.family) {
    case ManifoldFamily::Sphere: {
      double nv = v.norm();
      if (nv < 1e-300) throw std::domain_error("project_to_manifold: zero vector");
      return v / nv;
    }
    case ManifoldFamily::Oblique: {
      Vec out = v;
      Eigen::Map<Mat> X(out.data(), kind.n, kind.p);
      for (int j = 0; j < kind.p; ++j) {
        double nc = X.col(j).norm();
        if (nc < 1e-300) throw std::domain_error("project_to_manifold: zero column");
        X.col(j) /= nc;
      }
      return out;
    }
    case ManifoldFamily::ComplexTorus: {
      Vec out = v;
      for (int i = 0; i < kind.n; ++i) {
        double nb = std::hypot(out(2 * i), out(2 * i + 1));
        if (nb < 1e-300) throw std::domain_error("project_to_manifold: zero entry");
        out(2 * i) /= nb;
        out(2 * i + 1) /= nb;
      }
      return out;
    }
    case ManifoldFamily::Euclidean:
    case ManifoldFamily::ComplexEuclidean:
      return v;
  }
  return v;
}

inline ManifoldPoint make_point(const ManifoldKind& kind, const Vec& coords) {
  ManifoldPoint x{kind, coords};
  if (!is_feasible(x, 1e-9))
    throw std::invalid_argument("make_point: coordinates infeasible for " + kind.name());
  return x;
}

/// Orthogonal projection of an ambient vector onto T_x M.
inline TangentVector project_tangent(const ManifoldPoint& x, const Vec& v) {
  detail::check_ambient(x.kind, v, "project_tangent");
  switch (x.kind.family) {
    case ManifoldFamily::Sphere: {
      Vec t = v - x.coords.dot(v) * x.coords;
      return {x, std::move(t)};
    }
    case ManifoldFamily::Oblique: {
      Vec out = v;
      auto X = as_matrix(x.kind, x.coords);
      Eigen::Map<Mat> V(out.data(), x.kind.n, x.kind.p);
      for (int j = 0; j < x.kind.p; ++j) V.col(j) -= X.col(j).dot(V.col(j)) * X.col(j);
      return {x, std::move(out)};
    }
    case ManifoldFamily::ComplexTorus: {
      Vec out = v;
      for (int i = 0; i < x.kind.n; ++i) {
        Eigen::Vector2d xi(x.coords(2 * i), x.coords(2 * i + 1));
        Eigen::Vector2d vi(out(2 * i), out(2 * i + 1));
        vi -= xi.dot(vi) * xi;
        out(2 * i) = vi(0);
        out(2 * i + 1) = vi(1);
      }
      return {x, std::move(out)};
    }
    case ManifoldFamily::Euclidean:
    case ManifoldFamily::ComplexEuclidean:
      return {x, v};
  }
  return {x, v};
}

inline bool is_tangent(const TangentVector& d, double tol = 1e-8) {
  Vec again = project_tangent(d.base, d.coords).coords;
  return (again - d.coords).norm() <= tol * std::max(1.0, d.coords.norm());
}

/// Metric-projection retraction. Exact identity for a zero step.
inline ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& d) {
  detail::check_same_kind(x.kind, d.base.kind, "retract");
  detail::check_ambient(x.kind, d.coords, "retract");
  if (d.coords.isZero(0.0)) return x;
  return {x.kind, project_to_manifold(x.kind, x.coords + d.coords)};
}

inline TangentVector riemannian_grad(const ManifoldPoint& x, const EuclideanDerivatives& eu) {
  return project_tangent(x, eu.grad);
}

/// Riemannian Hessian-vector product for the embedded kinds: tangent
/// projection of the ambient Hessian action plus the per-block normal
/// correction -(x_b . grad_b) u_b on each unit-norm block.
inline TangentVector riemannian_hess_vec(const ManifoldPoint& x, const EuclideanDerivatives& eu,
                                         const TangentVector& u) {
  detail::check_same_kind(x.kind, u.base.kind, "riemannian_hess_vec");
  detail::check_ambient(x.kind, u.coords, "riemannian_hess_vec");
  if (!is_tangent(u))
    throw std::invalid_argument("riemannian_hess_vec: direction is not tangent at the base point");
  Vec hu = eu.hess_vec(u.coords);
  switch (x.kind.family) {
    case ManifoldFamily::Sphere: {
      Vec out = project_tangent(x, hu).coords - x.coords.dot(eu.grad) * u.coords;
      return {x, std::move(out)};
    }
    case ManifoldFamily::Oblique: {
      Vec out = project_tangent(x, hu).coords;
      auto X = as_matrix(x.kind, x.coords);
      auto G = as_matrix(x.kind, eu.grad);
      auto U = as_matrix(x.kind, u.coords);
      Eigen::Map<Mat> O(out.data(), x.kind.n, x.kind.p);
      for (int j = 0; j < x.kind.p; ++j) O.col(j) -= X.col(j).dot(G.col(j)) * U.col(j);
      return {x, std::move(out)};
    }
    case ManifoldFamily::ComplexTorus: {
      Vec out = project_tangent(x, hu).coords;
      for (int i = 0; i < x.kind.n; ++i) {
        double xg = x.coords(2 * i) * eu.grad(2 * i) + x.coords(2 * i + 1) * eu.grad(2 * i + 1);
        out(2 * i) -= xg * u.coords(2 * i);
        out(2 * i + 1) -= xg * u.coords(2 * i + 1);
      }
      return {x, std::move(out)};
    }
    case ManifoldFamily::Euclidean:
    case ManifoldFamily::ComplexEuclidean:
      return {x, std::move(hu)};
  }
  return {x, std::move(hu)};
}

namespace detail {

/// Orthonormal basis of the orthogonal complement of a unit vector, from the
/// Householder reflector that maps x to -sign(x_0) e_0: columns 1..n-1.
inline Mat sphere_complement_basis(const Vec& x) {
  const int n = static_cast<int>(x.size());
  Mat U(n, n - 1);
  if (n == 1) return U;
  double s = x(0) >= 0.0 ? 1.0 : -1.0;
  Vec v = x;
  v(0) += s;  // ||x|| = 1
  double vtv = v.squaredNorm();
  for (int j = 1; j < n; ++j) {
    U.col(j - 1) = -2.0 * (v(j) / vtv) * v;
    U(j, j - 1) += 1.0;
  }
  return U;
}

}  // namespace detail

/// Orthonormal basis U of T_x M (ambient_dim x tangent_dim).
inline Mat tangent_basis(const ManifoldPoint& x) {
  const int amb = x.kind.ambient_dim();
  switch (x.kind.family) {
    case ManifoldFamily::Sphere:
      return detail::sphere_complement_basis(x.coords);
    case ManifoldFamily::Oblique: {
      const int n = x.kind.n, p = x.kind.p;
      Mat U = Mat::Zero(amb, x.kind.tangent_dim());
      auto X = as_matrix(x.kind, x.coords);
      for (int j = 0; j < p; ++j)
        U.block(j * n, j * (n - 1), n, n - 1) = detail::sphere_complement_basis(X.col(j));
      return U;
    }
    case ManifoldFamily::ComplexTorus: {
      Mat U = Mat::Zero(amb, x.kind.n);
      for (int i = 0; i < x.kind.n; ++i) {
        U(2 * i, i) = -x.coords(2 * i + 1);  // i*z direction
        U(2 * i + 1, i) = x.coords(2 * i);
      }
      return U;
    }
    case ManifoldFamily::Euclidean:
    case ManifoldFamily::ComplexEuclidean:
      return Mat::Identity(amb, amb);
  }
  return Mat::Identity(amb, amb);
}

/// Symmetry groups a problem's objective may be invariant under.
enum class Quotient { None, Sign, Phase, SignedPermutation, Rotation };

inline std::string quotient_name(Quotient q) {
  switch (q) {
    case Quotient::None: return "none";
    case Quotient::Sign: return "sign";
    case Quotient::Phase: return "phase";
    case Quotient::SignedPermutation: return "signed_permutation";
    case Quotient::Rotation: return "rotation";
  }
  return "?";
}

namespace detail {

inline double signed_permutation_distance(const ManifoldKind& kind, const Vec& a, const Vec& b) {
  auto X = as_matrix(kind, a);
  auto Y = as_matrix(kind, b);
  const int p = kind.p;
  Mat C = X.transpose() * Y;
  std::vector<bool> used_row(p, false), used_col(p, false);
  double d2 = 0.0;
  for (int k = 0; k < p; ++k) {
    int bi = -1, bj = -1;
    double best = -1.0;
    for (int i = 0; i < p; ++i) {
      if (used_row[i]) continue;
      for (int j = 0; j < p; ++j) {
        if (used_col[j]) continue;
        if (std::abs(C(i, j)) > best) {
          best = std::abs(C(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    used_row[bi] = true;
    used_col[bj] = true;
    double s = C(bi, bj) >= 0.0 ? 1.0 : -1.0;
    d2 += (X.col(bi) - s * Y.col(bj)).squaredNorm();
  }
  return std::sqrt(d2);
}

inline double rotation_distance(const ManifoldKind& kind, const Vec& a, const Vec& b) {
  auto X = as_matrix(kind, a);
  auto Y = as_matrix(kind, b);
  Mat K = X * Y.transpose();  // rows x rows, small
  Eigen::JacobiSVD<Mat> svd(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // orthogonal Procrustes alignment, then an explicit difference (the nuclear
  // norm shortcut cancels catastrophically near zero)
  Mat Q = svd.matrixU() * svd.matrixV().transpose();
  return (X - Q * Y).norm();
}

}  // namespace detail

/// Ambient distance modulo the given symmetry group.
inline double distance(const ManifoldPoint& x, const ManifoldPoint& y,
                       Quotient quotient = Quotient::None) {
  detail::check_same_kind(x.kind, y.kind, "distance");
  switch (quotient) {
    case Quotient::None:
      return (x.coords - y.coords).norm();
    case Quotient::Sign:
      return std::min((x.coords - y.coords).norm(), (x.coords + y.coords).norm());
    case Quotient::Phase: {
      CVec zx = to_complex(x.coords), zy = to_complex(y.coords);
      std::complex<double> cross = zx.dot(zy);  // sum conj(x_i) y_i
      double mag = std::abs(cross);
      std::complex<double> phase =
          mag > 1e-300 ? std::conj(cross) / mag : std::complex<double>(1.0, 0.0);
      return (zx - phase * zy).norm();  // explicit aligned difference
    }
    case Quotient::SignedPermutation:
      return detail::signed_permutation_distance(x.kind, x.coords, y.coords);
    case Quotient::Rotation:
      return detail::rotation_distance(x.kind, x.coords, y.coords);
  }
  return (x.coords - y.coords).norm();
}

// -- sampling -----------------------------------------------------------------

/// Uniform point w.r.t. the invariant measure (normalized Gaussians per sphere
/// block, uniform phases on the torus, standard Gaussian on Euclidean kinds).
inline ManifoldPoint random_point(const ManifoldKind& kind, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  switch (kind.family) {
    case ManifoldFamily::ComplexTorus: {
      std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
      Vec w(kind.ambient_dim());
      for (int i = 0; i < kind.n; ++i) {
        double th = unif(rng);
        w(2 * i) = std::cos(th);
        w(2 * i + 1) = std::sin(th);
      }
      return {kind, std::move(w)};
    }
    default: {
      Vec w(kind.ambient_dim());
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gauss(rng);
      if (kind.family == ManifoldFamily::Sphere || kind.family == ManifoldFamily::Oblique)
        w = project_to_manifold(kind, w);
      return {kind, std::move(w)};
    }
  }
}

/// Gaussian ambient direction projected to T_x M and normalized.
inline TangentVector random_tangent(const ManifoldPoint& x, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vec w(x.kind.ambient_dim());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gauss(rng);
  TangentVector t = project_tangent(x, w);
  double nt = t.coords.norm();
  if (nt > 1e-300) t.coords /= nt;
  return t;
}

}  // namespace rtropt
