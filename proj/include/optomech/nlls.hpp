#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace optomech {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> sigmas;      // 1-sigma standard errors, same order
  double residual_norm = 0.0;      // weighted sum of squared residuals
  int n_iter = 0;                  // accepted steps
  bool converged = false;          // stopped through a step/cost/gradient tolerance
  std::string message;

  double param(std::string_view name) const;
  double sigma(std::string_view name) const;
};

struct LsqOptions {
  int max_iter = 500;
  double xtol = 1e-10;     // stop when the relative step falls below this
  double ftol = 1e-12;     // stop when the relative cost drop falls below this
  double gtol = 1e-8;      // gradient reduction required for converged=true
  double lambda0 = 1e-10;  // initial damping, relative to diag(J^T J)
  double lambda_up = 7.0;
  double lambda_down = 3.0;
  double fd_step = 1e-6;   // relative central-difference step
};

// Fills r (fixed length) with residuals at parameter vector p.
using ResidualFn = std::function<void(std::span<const double> p, std::span<double> r)>;
// Fills J (row-major, n_residuals x n_params) at p.
using JacobianFn = std::function<void(std::span<const double> p, std::span<double> J)>;

// Damped least squares (Levenberg-Marquardt): minimizes |r(p)|^2 starting from
// init. Steps solve (J^T J + lambda diag(J^T J)) dp = -J^T r via Cholesky on a
// Jacobi-scaled copy; lambda shrinks on accepted steps and grows on rejected
// ones. The Jacobian is central finite differences unless an analytic one is
// supplied. Deterministic: identical inputs give identical iterates.
//
// converged=true when the iteration terminates through a tolerance: the
// (possibly rejected) step falls below xtol relative, an accepted step leaves
// the relative cost change below ftol in the weakly damped regime, or the
// gradient vanishes. Exhausting max_iter, or failing to descend while the
// step is still resolvable, reports converged=false with the reason in
// `message` unless the final gradient independently passes the gtol test.
// Standard errors come from the unit-weight covariance
// (J^T J)^{-1} * residual_norm / (m - n); zero when m <= n or singular.
FitResult nonlinear_least_squares(const ResidualFn& residuals, std::size_t n_residuals,
                                  std::vector<double> init,
                                  std::vector<std::string> names,
                                  const LsqOptions& opts = {},
                                  const JacobianFn& jacobian = {});

}  // namespace optomech
