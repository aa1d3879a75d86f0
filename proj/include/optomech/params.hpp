#pragma once

#include <variant>

#include "optomech/constants.hpp"

namespace optomech {

// All frequencies and rates in this layer are angular (rad/s); masses kg,
// temperatures K, powers W.  Conversion to ordinary Hz happens only at the
// file/CLI boundary.

struct CavityParams {
  double omega_c = 0.0;  // resonance, rad/s
  double kappa = 0.0;    // full linewidth, rad/s
  void validate() const;
};

struct MechanicalParams {
  double omega_m = 0.0;    // resonance, rad/s
  double gamma_m0 = 0.0;   // intrinsic linewidth, rad/s
  double mass = 0.0;       // effective mass, kg
  double quality() const { return omega_m / gamma_m0; }
  void validate() const;
};

struct CouplingParams {
  double g = 0.0;  // cavity pull per displacement, rad/s per m
  void validate() const;
};

struct ThermalEnvironment {
  double T_0 = 0.0;  // cryostat bath, K
  double T_p = 0.0;  // effective temperature of the drive field, K
  void validate() const;
};

struct SystemParams {
  CavityParams cavity;
  MechanicalParams mech;
  CouplingParams coupling;
  ThermalEnvironment bath;
  void validate() const;
};

// Exactly one power representation is held; the other two are derived on
// demand (resolve_photon_number in physics.hpp), never stored stale.
struct CirculatingPower {
  double watts = 0.0;
};
struct IncidentPower {
  double watts = 0.0;
};
struct PhotonNumber {
  double value = 0.0;
};
using PowerSpec = std::variant<CirculatingPower, IncidentPower, PhotonNumber>;

struct DriveSettings {
  double omega_e = 0.0;   // drive frequency, rad/s
  double detuning = 0.0;  // omega_e - omega_c, rad/s
  PowerSpec power;

  static DriveSettings at_detuning(const CavityParams& cav, double detuning, PowerSpec p) {
    return DriveSettings{cav.omega_c + detuning, detuning, p};
  }
  void validate(const CavityParams& cav) const;
};

struct BackactionResult {
  double Gamma = 0.0;          // radiation damping, rad/s (negative = antidamping)
  double Omega = 0.0;          // radiation spring shift, rad/s
  double gamma_m_total = 0.0;  // gamma_m0 + Gamma, rad/s
  bool regenerative = false;   // gamma_m_total <= 0: no steady state
};

}  // namespace optomech
