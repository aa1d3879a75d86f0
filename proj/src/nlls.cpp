#include "optomech/nlls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace optomech {

double FitResult::param(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw std::invalid_argument("FitResult: unknown parameter " + std::string(name));
}

double FitResult::sigma(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return sigmas[i];
  throw std::invalid_argument("FitResult: unknown parameter " + std::string(name));
}

namespace {

// In-place Cholesky of the lower triangle; false if a pivot is not positive.
bool cholesky(std::vector<double>& A, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = A[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= A[j * n + k] * A[j * n + k];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    A[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = A[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= A[i * n + k] * A[j * n + k];
      A[i * n + j] = s / ljj;
    }
  }
  return true;
}

void chol_solve(const std::vector<double>& L, std::size_t n, std::vector<double>& x) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * x[k];
    x[i] = s / L[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= L[k * n + i] * x[k];
    x[i] = s / L[i * n + i];
  }
}

}  // namespace

FitResult nonlinear_least_squares(const ResidualFn& residuals, std::size_t n_residuals,
                                  std::vector<double> init,
                                  std::vector<std::string> names,
                                  const LsqOptions& opts, const JacobianFn& jacobian) {
  const std::size_t n = init.size();
  const std::size_t m = n_residuals;
  if (n == 0) throw std::invalid_argument("nonlinear_least_squares: empty parameter vector");
  if (m == 0) throw std::invalid_argument("nonlinear_least_squares: no residuals");
  if (names.empty()) {
    for (std::size_t j = 0; j < n; ++j) names.push_back("p" + std::to_string(j));
  }
  if (names.size() != n)
    throw std::invalid_argument("nonlinear_least_squares: names/init size mismatch");

  std::vector<double> x = std::move(init);
  std::vector<double> r(m), r_try(m), x_try(n);
  std::vector<double> J(m * n);
  std::vector<double> A(n * n), At(n * n), g(n), d(n), delta(n), rhs(n);

  auto eval = [&](const std::vector<double>& p, std::vector<double>& out) {
    residuals(std::span<const double>(p.data(), n), std::span<double>(out.data(), m));
  };

  eval(x, r);
  double cost = 0.0;
  for (double ri : r) cost += ri * ri;
  if (!std::isfinite(cost))
    throw std::invalid_argument("nonlinear_least_squares: residuals not finite at init");

  std::vector<double> pp(n), rp(m), rm(m);
  auto fill_jacobian = [&](const std::vector<double>& p) {
    if (jacobian) {
      jacobian(std::span<const double>(p.data(), n), std::span<double>(J.data(), m * n));
      return;
    }
    pp = p;
    for (std::size_t j = 0; j < n; ++j) {
      double h = opts.fd_step * std::abs(p[j]);
      if (h == 0.0) h = opts.fd_step;
      pp[j] = p[j] + h;
      eval(pp, rp);
      pp[j] = p[j] - h;
      eval(pp, rm);
      pp[j] = p[j];
      const double inv2h = 1.0 / (2.0 * h);
      for (std::size_t i = 0; i < m; ++i) J[i * n + j] = (rp[i] - rm[i]) * inv2h;
    }
  };

  auto build_normal = [&](const std::vector<double>& res) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = j; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += J[i * n + j] * J[i * n + k];
        A[j * n + k] = s;
        A[k * n + j] = s;
      }
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += J[i * n + j] * res[i];
      g[j] = s;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double ajj = A[j * n + j];
      d[j] = ajj > 0.0 ? std::sqrt(ajj) : 1.0;
    }
  };

  // Solves (A + lambda diag A) delta = -g on the Jacobi-scaled system, where
  // the scaled matrix has a unit diagonal. Columns with zero curvature get a
  // bare lambda pivot, which pins their step to zero.
  auto try_solve = [&](double lambda) -> bool {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) At[j * n + k] = A[j * n + k] / (d[j] * d[k]);
      At[j * n + j] = (A[j * n + j] > 0.0 ? 1.0 : 0.0) + lambda;
      rhs[j] = -g[j] / d[j];
    }
    if (!cholesky(At, n)) return false;
    chol_solve(At, n, rhs);
    bool finite = true;
    for (std::size_t j = 0; j < n; ++j) {
      delta[j] = rhs[j] / d[j];
      finite = finite && std::isfinite(delta[j]);
    }
    return finite;
  };

  double lambda = opts.lambda0;
  double g0_inf = -1.0;
  double last_step_rel = std::numeric_limits<double>::infinity();
  int n_accept = 0;
  std::string stop_reason;

  for (int iter = 0; iter < opts.max_iter && stop_reason.empty(); ++iter) {
    fill_jacobian(x);
    build_normal(r);
    double g_inf = 0.0;
    for (std::size_t j = 0; j < n; ++j) g_inf = std::max(g_inf, std::abs(g[j]));
    if (iter == 0) g0_inf = g_inf;
    if (g_inf == 0.0) {
      stop_reason = "gradient identically zero";
      last_step_rel = 0.0;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted && stop_reason.empty(); ++attempt) {
      if (!try_solve(lambda)) {
        lambda *= opts.lambda_up;
        if (lambda > 1e15) stop_reason = "normal equations singular at full damping";
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) x_try[j] = x[j] + delta[j];
      double step_rel = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        step_rel = std::max(step_rel, std::abs(delta[j]) / (std::abs(x[j]) + opts.xtol));
      eval(x_try, r_try);
      double cost_try = 0.0;
      for (double ri : r_try) cost_try += ri * ri;
      if (std::isfinite(cost_try) && cost_try <= cost) {
        const double drop_rel =
            (cost - cost_try) / std::max(cost, std::numeric_limits<double>::min());
        x.swap(x_try);
        r.swap(r_try);
        cost = cost_try;
        lambda = std::max(lambda / opts.lambda_down, 1e-14);
        ++n_accept;
        last_step_rel = step_rel;
        accepted = true;
        if (step_rel < opts.xtol)
          stop_reason = "step below xtol";
        else if (lambda <= 1.0 && drop_rel < opts.ftol)
          stop_reason = "cost change below ftol";
      } else if (step_rel < opts.xtol) {
        // The damped step has shrunk below the parameter resolution without
        // finding any downhill direction: the iterate cannot move, so it is
        // the answer to within xtol (the cost sits at its evaluation floor).
        stop_reason = "step below xtol";
      } else {
        lambda *= opts.lambda_up;
        if (lambda > 1e15) stop_reason = "no downhill step at full damping";
      }
    }
    if (!accepted && stop_reason.empty()) stop_reason = "no downhill step found";
  }
  if (stop_reason.empty()) stop_reason = "max iterations reached";

  // Final gradient assessment and covariance at the returned point.
  fill_jacobian(x);
  build_normal(r);
  double g_inf = 0.0;
  for (std::size_t j = 0; j < n; ++j) g_inf = std::max(g_inf, std::abs(g[j]));

  bool gradient_ok = false;
  if (g_inf == 0.0 || cost == 0.0) {
    gradient_ok = true;
  } else if (g0_inf > 0.0 && g_inf <= opts.gtol * g0_inf) {
    gradient_ok = true;
  } else {
    // Orthogonality of the residual to every Jacobian column (MINPACK-style).
    double cos_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (A[j * n + j] > 0.0)
        cos_max = std::max(cos_max, std::abs(g[j]) / std::sqrt(A[j * n + j] * cost));
    }
    gradient_ok = cos_max <= opts.gtol;
  }
  const bool step_ok = n_accept == 0 || last_step_rel <= 1e-8;
  // Termination through a tolerance is success; running out of iterations or
  // failing to descend is not, unless the final point passes the gradient and
  // step tests anyway.
  const bool stop_converged = stop_reason == "gradient identically zero" ||
                              stop_reason == "step below xtol" ||
                              stop_reason == "cost change below ftol";

  FitResult out;
  out.names = std::move(names);
  out.params = x;
  out.sigmas.assign(n, 0.0);
  out.residual_norm = cost;
  out.n_iter = n_accept;
  out.converged = stop_converged || (gradient_ok && step_ok);
  out.message = stop_reason;

  if (m > n) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) At[j * n + k] = A[j * n + k] / (d[j] * d[k]);
    }
    if (cholesky(At, n)) {
      const double s2 = cost / static_cast<double>(m - n);
      for (std::size_t k = 0; k < n; ++k) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        rhs[k] = 1.0;
        chol_solve(At, n, rhs);
        const double var = rhs[k] / (d[k] * d[k]) * s2;
        out.sigmas[k] = var > 0.0 ? std::sqrt(var) : 0.0;
      }
    } else {
      out.message += "; covariance singular";
    }
  }
  return out;
}

}  // namespace optomech
