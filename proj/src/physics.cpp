#include "optomech/physics.hpp"

#include <cmath>
#include <stdexcept>

#include "optomech/errors.hpp"

namespace optomech {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

inline double sqr(double x) { return x * x; }

}  // namespace

double zero_point_motion(const MechanicalParams& mech, const PhysicalConstants& c) {
  require(mech.mass > 0.0, "zero_point_motion: mass must be positive");
  require(mech.omega_m > 0.0, "zero_point_motion: omega_m must be positive");
  return std::sqrt(c.hbar / (2.0 * mech.mass * mech.omega_m));
}

double photon_number_from_circulating(double P_c, double omega_e,
                                      const PhysicalConstants& c) {
  require(omega_e > 0.0, "photon_number_from_circulating: omega_e must be positive");
  require(P_c >= 0.0, "photon_number_from_circulating: power must be nonnegative");
  return P_c / (c.hbar * sqr(omega_e));
}

double circulating_power(double n, double omega_e, const PhysicalConstants& c) {
  require(omega_e > 0.0, "circulating_power: omega_e must be positive");
  require(n >= 0.0, "circulating_power: photon number must be nonnegative");
  return c.hbar * sqr(omega_e) * n;
}

double incident_power(double n, double omega_e, double detuning, double kappa,
                      const PhysicalConstants& c) {
  require(omega_e > 0.0, "incident_power: omega_e must be positive");
  require(kappa > 0.0, "incident_power: kappa must be positive");
  require(n >= 0.0, "incident_power: photon number must be nonnegative");
  return c.hbar * omega_e * n * (sqr(kappa) + 4.0 * sqr(detuning)) / kappa;
}

double photon_number_from_incident(double P_i, double omega_e, double detuning,
                                   double kappa, const PhysicalConstants& c) {
  require(omega_e > 0.0, "photon_number_from_incident: omega_e must be positive");
  require(kappa > 0.0, "photon_number_from_incident: kappa must be positive");
  require(P_i >= 0.0, "photon_number_from_incident: power must be nonnegative");
  return P_i * kappa / (c.hbar * omega_e * (sqr(kappa) + 4.0 * sqr(detuning)));
}

double backaction_prefactor(double n, double g, double x_zp) {
  require(n >= 0.0, "backaction_prefactor: photon number must be nonnegative");
  require(g > 0.0, "backaction_prefactor: g must be positive");
  require(x_zp > 0.0, "backaction_prefactor: x_zp must be positive");
  return 4.0 * n * sqr(g * x_zp);
}

double backaction_damping(double B, double kappa, double omega_m, double detuning) {
  require(B >= 0.0, "backaction_damping: B must be nonnegative");
  require(kappa > 0.0, "backaction_damping: kappa must be positive");
  require(omega_m > 0.0, "backaction_damping: omega_m must be positive");
  const double lower = kappa / (sqr(kappa) + 4.0 * sqr(detuning + omega_m));
  const double upper = kappa / (sqr(kappa) + 4.0 * sqr(detuning - omega_m));
  return B * (lower - upper);
}

double backaction_spring(double B, double kappa, double omega_m, double detuning) {
  require(B >= 0.0, "backaction_spring: B must be nonnegative");
  require(kappa > 0.0, "backaction_spring: kappa must be positive");
  require(omega_m > 0.0, "backaction_spring: omega_m must be positive");
  const double lower = (detuning + omega_m) / (sqr(kappa) + 4.0 * sqr(detuning + omega_m));
  const double upper = (detuning - omega_m) / (sqr(kappa) + 4.0 * sqr(detuning - omega_m));
  return B * (lower + upper);
}

BackactionResult total_damping(const MechanicalParams& mech, double Gamma,
                               double Omega) {
  mech.validate();
  BackactionResult r;
  r.Gamma = Gamma;
  r.Omega = Omega;
  r.gamma_m_total = mech.gamma_m0 + Gamma;
  r.regenerative = r.gamma_m_total <= 0.0;
  return r;
}

double effective_temperature(double gamma_m0, double T_0, double Gamma, double T_p) {
  require(gamma_m0 > 0.0, "effective_temperature: gamma_m0 must be positive");
  require(T_0 >= 0.0 && T_p >= 0.0, "effective_temperature: temperatures must be nonnegative");
  const double gamma_m = gamma_m0 + Gamma;
  if (gamma_m <= 0.0) {
    throw RegenerativeError(
        "effective_temperature: total damping is not positive; "
        "the mode is regenerative and has no steady-state temperature");
  }
  return (gamma_m0 * T_0 + Gamma * T_p) / gamma_m;
}

double phonon_occupancy(double T, double omega_m, const PhysicalConstants& c) {
  require(omega_m > 0.0, "phonon_occupancy: omega_m must be positive");
  require(T >= 0.0, "phonon_occupancy: temperature must be nonnegative");
  if (T == 0.0) return 0.0;
  // expm1 keeps the high-temperature (small-argument) limit accurate.
  return 1.0 / std::expm1(c.hbar * omega_m / (c.k_B * T));
}

double sideband_resolution(double omega_m, double kappa) {
  require(omega_m > 0.0, "sideband_resolution: omega_m must be positive");
  require(kappa > 0.0, "sideband_resolution: kappa must be positive");
  return omega_m / kappa;
}

double resolve_photon_number(const DriveSettings& drive, double kappa,
                             const PhysicalConstants& c) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CirculatingPower>) {
          return photon_number_from_circulating(p.watts, drive.omega_e, c);
        } else if constexpr (std::is_same_v<T, IncidentPower>) {
          return photon_number_from_incident(p.watts, drive.omega_e, drive.detuning,
                                             kappa, c);
        } else {
          require(p.value >= 0.0, "resolve_photon_number: photon number must be nonnegative");
          return p.value;
        }
      },
      drive.power);
}

}  // namespace optomech
