#include "optomech/experiment.hpp"

#include <cmath>
#include <stdexcept>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/golden.hpp"
#include "optomech/physics.hpp"

namespace optomech {

void HeatingModel::validate() const {
  if (!(alpha >= 0.0) || !(beta > 0.0) || !(eta >= 0.0))
    throw std::domain_error("HeatingModel: requires alpha >= 0, beta > 0, eta >= 0");
}

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty detuning grid");
  if (grid.size() < 2) return;
  const bool up = grid[1] > grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool step_up = grid[i] > grid[i - 1];
    if (step_up != up || grid[i] == grid[i - 1])
      throw std::invalid_argument("sweep: detuning grid must be strictly monotone");
  }
}

// Backaction row at a known occupation; thermometry suppressed while the mode
// is regenerative.
SweepRow make_row(double delta, double n, double delta_eff, const SystemParams& p,
                  const PhysicalConstants& c) {
  const double x_zp = zero_point_motion(p.mech, c);
  const double B = backaction_prefactor(n, p.coupling.g, x_zp);
  const double Gamma = backaction_damping(B, p.cavity.kappa, p.mech.omega_m, delta_eff);
  const double Omega = backaction_spring(B, p.cavity.kappa, p.mech.omega_m, delta_eff);
  const double gamma_m = p.mech.gamma_m0 + Gamma;

  SweepRow row;
  row.detuning_hz = delta / two_pi;
  row.n_photon = n;
  row.Gamma_hz = Gamma / two_pi;
  row.Omega_hz = Omega / two_pi;
  row.gamma_m_hz = gamma_m / two_pi;
  row.regenerative = gamma_m <= 0.0;
  if (!row.regenerative) {
    const double T_m = effective_temperature(p.mech.gamma_m0, p.bath.T_0, Gamma, p.bath.T_p);
    row.T_m = T_m;
    row.m_bar = phonon_occupancy(T_m, p.mech.omega_m, c);
  }
  return row;
}

}  // namespace

SweepResult sweep_constant_circulating(double P_c, std::span<const double> detuning_grid,
                                       const SystemParams& params,
                                       const PhysicalConstants& c) {
  params.validate();
  if (!(P_c > 0.0)) throw std::domain_error("sweep_constant_circulating: P_c must be positive");
  check_grid(detuning_grid);

  SweepResult out;
  out.mode = SweepMode::constant_circulating;
  out.power = P_c;
  out.kerr_coeff = 0.0;
  out.rows.reserve(detuning_grid.size());
  for (double delta : detuning_grid) {
    const double omega_e = params.cavity.omega_c + delta;
    const double n = photon_number_from_circulating(P_c, omega_e, c);
    out.rows.push_back(make_row(delta, n, delta, params, c));
  }
  return out;
}

SweepResult sweep_constant_incident(double P_i, std::span<const double> detuning_grid,
                                    const KerrCavity& kerr, const SystemParams& params,
                                    const PhysicalConstants& c) {
  params.validate();
  kerr.validate();
  if (kerr.base.omega_c != params.cavity.omega_c || kerr.base.kappa != params.cavity.kappa)
    throw std::invalid_argument(
        "sweep_constant_incident: kerr.base differs from params.cavity");
  if (!(P_i > 0.0)) throw std::domain_error("sweep_constant_incident: P_i must be positive");
  check_grid(detuning_grid);

  SweepResult out;
  out.mode = SweepMode::constant_incident;
  out.power = P_i;
  out.kerr_coeff = kerr.K;
  out.rows.reserve(detuning_grid.size());
  for (double delta : detuning_grid) {
    const KerrSolution sol = solve_kerr_occupation(P_i, delta, kerr, c);
    const double delta_eff = delta + kerr.K * sol.n_bar;
    SweepRow row = make_row(delta, sol.n_bar, delta_eff, params, c);
    row.multistable = sol.multistable;
    out.rows.push_back(row);
  }
  return out;
}

double find_optimal_detuning(const PowerSpec& power, const SystemParams& params,
                             const std::optional<KerrCavity>& kerr,
                             const PhysicalConstants& c) {
  params.validate();
  if (kerr) {
    kerr->validate();
    if (kerr->base.omega_c != params.cavity.omega_c ||
        kerr->base.kappa != params.cavity.kappa)
      throw std::invalid_argument("find_optimal_detuning: kerr.base differs from cavity");
  }

  const double omega_m = params.mech.omega_m;
  const double x_zp = zero_point_motion(params.mech, c);

  auto damping_at = [&](double delta) -> double {
    double n;
    double delta_eff = delta;
    if (std::holds_alternative<IncidentPower>(power) && kerr) {
      const KerrSolution sol =
          solve_kerr_occupation(std::get<IncidentPower>(power).watts, delta, *kerr, c);
      n = sol.n_bar;
      delta_eff = delta + kerr->K * n;
    } else {
      const DriveSettings drive = DriveSettings::at_detuning(params.cavity, delta, power);
      n = resolve_photon_number(drive, params.cavity.kappa, c);
      if (kerr) delta_eff = delta + kerr->K * n;
    }
    const double B = backaction_prefactor(n, params.coupling.g, x_zp);
    return backaction_damping(B, params.cavity.kappa, omega_m, delta_eff);
  };

  constexpr int n_grid = 400;
  const double lo = -3.0 * omega_m;
  const double h = 3.0 * omega_m / n_grid;
  double best_x = lo;
  double best_f = damping_at(lo);
  for (int i = 1; i < n_grid; ++i) {
    const double x = lo + i * h;
    const double f = damping_at(x);
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  const double a = std::max(best_x - h, lo);
  const double b = std::min(best_x + h, -1e-9 * omega_m);
  const double xtol = 1e-3 * params.cavity.kappa;
  return golden_section_maximize(damping_at, a, b, xtol).first;
}

CoolingResult cooling_curve(std::span<const double> powers, const SystemParams& params,
                            const HeatingModel& heating,
                            const std::optional<NoiseModel>& noise,
                            const PhysicalConstants& c) {
  params.validate();
  heating.validate();
  if (powers.empty()) throw std::invalid_argument("cooling_curve: no powers");
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (!(powers[i] > 0.0)) throw std::domain_error("cooling_curve: powers must be positive");
    if (i > 0 && !(powers[i] > powers[i - 1]))
      throw std::invalid_argument("cooling_curve: powers must be strictly increasing");
  }

  const double x_zp = zero_point_motion(params.mech, c);
  CoolingResult out;
  out.rows.reserve(powers.size());
  for (double P : powers) {
    const double delta_star =
        find_optimal_detuning(PowerSpec{CirculatingPower{P}}, params, std::nullopt, c);
    const double omega_e = params.cavity.omega_c + delta_star;
    const double n = photon_number_from_circulating(P, omega_e, c);
    const double B = backaction_prefactor(n, params.coupling.g, x_zp);
    const double Gamma =
        backaction_damping(B, params.cavity.kappa, params.mech.omega_m, delta_star);

    double T_0 = params.bath.T_0;
    double gamma_m0 = params.mech.gamma_m0;
    if (heating.enabled) {
      const double dT = heating.alpha * std::pow(P, heating.beta);
      T_0 += dT;
      gamma_m0 *= 1.0 + heating.eta * dT;
    }

    CoolingRow row;
    row.P_c = P;
    row.detuning_hz = delta_star / two_pi;
    row.gamma_m_hz = (gamma_m0 + Gamma) / two_pi;
    row.T_m = effective_temperature(gamma_m0, T_0, Gamma, params.bath.T_p);
    row.m_bar = phonon_occupancy(row.T_m, params.mech.omega_m, c);
    row.floor = noise ? imprecision_floor(P, *noise) : 0.0;
    out.rows.push_back(row);
  }
  return out;
}

HeatingModel derive_heating_model(const SystemParams& params, double P_top,
                                  double damping_ratio, double cooling_ratio,
                                  double beta, const PhysicalConstants& c) {
  params.validate();
  if (!(P_top > 0.0)) throw std::domain_error("derive_heating_model: P_top must be positive");
  if (!(damping_ratio > 1.0) || !(cooling_ratio > 1.0))
    throw std::domain_error("derive_heating_model: ratios must exceed 1");
  if (!(beta > 0.0)) throw std::domain_error("derive_heating_model: beta must be positive");

  const double delta_star =
      find_optimal_detuning(PowerSpec{CirculatingPower{P_top}}, params, std::nullopt, c);
  const double omega_e = params.cavity.omega_c + delta_star;
  const double n = photon_number_from_circulating(P_top, omega_e, c);
  const double x_zp = zero_point_motion(params.mech, c);
  const double B = backaction_prefactor(n, params.coupling.g, x_zp);
  const double Gamma =
      backaction_damping(B, params.cavity.kappa, params.mech.omega_m, delta_star);

  // With R = damping_ratio, C = cooling_ratio, G = Gamma/gamma_m0,
  // y = eta dT:  R = 1 + y + G  and  C = T_0 R / ((1+y)(T_0+dT) + G T_p).
  const double G = Gamma / params.mech.gamma_m0;
  const double y = damping_ratio - 1.0 - G;
  if (y < 0.0)
    throw CalibrationError(
        "derive_heating_model: backaction alone already exceeds the damping ratio");
  const double T_0 = params.bath.T_0;
  const double warm = (damping_ratio * T_0 / cooling_ratio - G * params.bath.T_p) /
                      (damping_ratio - G);
  const double dT = warm - T_0;
  if (!(dT > 0.0))
    throw CalibrationError(
        "derive_heating_model: requested cooling ratio needs a negative bath shift");

  HeatingModel out;
  out.beta = beta;
  out.alpha = dT / std::pow(P_top, beta);
  out.eta = y / dT;
  out.enabled = true;
  return out;
}

}  // namespace optomech
