// Starts the solver exactly on a saddle of the sphere-constrained quadratic
// -x'Ax (an intermediate eigenvector, where the gradient vanishes) and prints
// the escape to the global minimizer.

#include <cstdio>

#include "rtropt/problems.hpp"
#include "rtropt/solver.hpp"

int main() {
  using namespace rtropt;
  Mat A = Vec{{3.0, 2.0, 1.0}}.asDiagonal();
  Problem prob = eigenvector_problem(A);

  ManifoldPoint saddle{prob.kind, Vec{{0.0, 1.0, 0.0}}};
  TRConfig cfg;
  auto [x, trace] = minimize(prob, saddle, cfg);

  std::printf("start: f = %.6f, |grad| = %.2e (a saddle)\n", trace.records.front().f,
              trace.records.front().grad_norm);
  for (const auto& r : trace.records)
    std::printf("iter %3d  f = %+.9f  |grad| = %.3e  lam_min = %+.3e  %s\n", r.iter, r.f,
                r.grad_norm, r.lambda_min.value_or(0.0), r.accepted ? "" : "(rejected)");
  std::printf("status: %s, final f = %.12f (expected -3)\n", status_name(trace.status).c_str(),
              trace.records.back().f);
  return 0;
}
