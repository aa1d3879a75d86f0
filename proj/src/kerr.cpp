#include "optomech/kerr.hpp"

#include <cmath>
#include <stdexcept>

#include "optomech/cubic.hpp"
#include "optomech/physics.hpp"

namespace optomech {

void KerrCavity::validate() const {
  base.validate();
  if (!(K >= 0.0) || !std::isfinite(K))
    throw std::domain_error("KerrCavity: K must be finite and nonnegative");
}

KerrSolution solve_kerr_occupation(double P_i, double detuning, const KerrCavity& kerr,
                                   const PhysicalConstants& c) {
  kerr.validate();
  if (!(P_i >= 0.0)) throw std::domain_error("solve_kerr_occupation: P_i must be >= 0");
  const double kappa = kerr.base.kappa;
  const double omega_e = kerr.base.omega_c + detuning;
  if (!(omega_e > 0.0))
    throw std::domain_error("solve_kerr_occupation: drive frequency not positive");

  KerrSolution out;
  if (P_i == 0.0) {
    out.branches = {0.0};
    return out;
  }
  if (kerr.K == 0.0) {
    out.n_bar = photon_number_from_incident(P_i, omega_e, detuning, kappa, c);
    out.branches = {out.n_bar};
    return out;
  }

  // Dimensionless form with u = K n / kappa, delta = detuning / kappa:
  //   u^3 + 2 delta u^2 + (1 + 4 delta^2)/4 u - phi/4 = 0,
  // phi = P_i K / (hbar omega_e kappa^2).
  const double delta = detuning / kappa;
  const double phi = P_i * kerr.K / (c.hbar * omega_e * kappa * kappa);
  std::vector<double> u = solve_cubic(2.0 * delta, (1.0 + 4.0 * delta * delta) / 4.0,
                                      -phi / 4.0);

  const double scale = kappa / kerr.K;
  for (double ui : u) {
    if (ui > 0.0) out.branches.push_back(ui * scale);
  }
  if (out.branches.empty())
    throw std::runtime_error("solve_kerr_occupation: no positive steady state found");

  // One more Newton polish in physical variables, where the residual of
  //   F(n) = n (kappa^2 + 4 (detuning + K n)^2) - P_i kappa / (hbar omega_e)
  // is best conditioned.
  const double rhs = P_i * kappa / (c.hbar * omega_e);
  for (double& n : out.branches) {
    for (int it = 0; it < 2; ++it) {
      const double eff = detuning + kerr.K * n;
      const double f = n * (kappa * kappa + 4.0 * eff * eff) - rhs;
      const double df = kappa * kappa + 4.0 * eff * eff + 8.0 * n * kerr.K * eff;
      if (df == 0.0) break;
      const double step = f / df;
      if (!std::isfinite(step) || std::abs(step) > 0.1 * (n + 1.0)) break;
      n -= step;
    }
  }

  out.n_bar = out.branches.front();
  out.multistable = out.branches.size() >= 2;
  return out;
}

double default_kerr_coefficient(const CavityParams& cavity, const PhysicalConstants& c) {
  cavity.validate();
  const double n_ref = photon_number_from_circulating(1e-6, cavity.omega_c, c);
  return cavity.kappa / n_ref;
}

}  // namespace optomech
