#include "optomech/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace optomech {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error(what);
}

void require_finite(double v, const std::string& name) {
  require(std::isfinite(v), name + " must be finite");
}

}  // namespace

void CavityParams::validate() const {
  require_finite(omega_c, "omega_c");
  require_finite(kappa, "kappa");
  require(omega_c > 0.0, "omega_c must be positive");
  require(kappa > 0.0, "kappa must be positive");
  require(kappa < omega_c, "kappa must be below omega_c");
}

void MechanicalParams::validate() const {
  require_finite(omega_m, "omega_m");
  require_finite(gamma_m0, "gamma_m0");
  require_finite(mass, "mass");
  require(omega_m > 0.0, "omega_m must be positive");
  require(gamma_m0 > 0.0, "gamma_m0 must be positive");
  require(mass > 0.0, "mass must be positive");
}

void CouplingParams::validate() const {
  require_finite(g, "g");
  require(g > 0.0, "g must be positive");
}

void ThermalEnvironment::validate() const {
  require_finite(T_0, "T_0");
  require_finite(T_p, "T_p");
  require(T_0 >= 0.0, "T_0 must be nonnegative");
  require(T_p >= 0.0, "T_p must be nonnegative");
}

void SystemParams::validate() const {
  cavity.validate();
  mech.validate();
  coupling.validate();
  bath.validate();
}

void DriveSettings::validate(const CavityParams& cav) const {
  require_finite(omega_e, "omega_e");
  require(omega_e > 0.0, "omega_e must be positive");
  // detuning is defined as omega_e - omega_c; allow a few ulp of slack for
  // drives assembled from independently parsed numbers.
  const double expect = omega_e - cav.omega_c;
  const double tol = 4.0 * std::abs(omega_e) * 2.220446049250313e-16;
  require(std::abs(detuning - expect) <= tol,
          "detuning is not omega_e - omega_c");
}

}  // namespace optomech
