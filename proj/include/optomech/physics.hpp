#pragma once

#include "optomech/params.hpp"

namespace optomech {

// Zero-point amplitude x_zp = sqrt(hbar / (2 m omega_m)), meters.
double zero_point_motion(const MechanicalParams& mech, const PhysicalConstants& c = si);

// Circulating-power convention for the overcoupled quarter-wave resonator:
// P_c = hbar omega_e^2 n.
double photon_number_from_circulating(double P_c, double omega_e,
                                      const PhysicalConstants& c = si);
double circulating_power(double n, double omega_e, const PhysicalConstants& c = si);

// Power incident on the input port: P_i = hbar omega_e n (kappa^2 + 4 Delta^2) / kappa.
double incident_power(double n, double omega_e, double detuning, double kappa,
                      const PhysicalConstants& c = si);
double photon_number_from_incident(double P_i, double omega_e, double detuning,
                                   double kappa, const PhysicalConstants& c = si);

// Backaction strength B = 4 n g^2 x_zp^2 (rad^2/s^2); every radiation-pressure
// rate below is linear in B.
double backaction_prefactor(double n, double g, double x_zp);

// Radiation damping of the mechanical mode:
//   Gamma = B [ kappa / (kappa^2 + 4 (Delta + omega_m)^2)
//             - kappa / (kappa^2 + 4 (Delta - omega_m)^2) ]
// Positive (cooling) for red detuning, negative (antidamping) for blue.
double backaction_damping(double B, double kappa, double omega_m, double detuning);

// Radiation spring shift of the mechanical resonance:
//   Omega = B [ (Delta + omega_m) / (kappa^2 + 4 (Delta + omega_m)^2)
//             + (Delta - omega_m) / (kappa^2 + 4 (Delta - omega_m)^2) ]
double backaction_spring(double B, double kappa, double omega_m, double detuning);

BackactionResult total_damping(const MechanicalParams& mech, double Gamma,
                               double Omega = 0.0);

// Damping-weighted mixture of the thermal bath and the (cold) drive field:
//   T_m = (gamma_m0 T_0 + Gamma T_p) / (gamma_m0 + Gamma)
// Throws RegenerativeError when gamma_m0 + Gamma <= 0.
double effective_temperature(double gamma_m0, double T_0, double Gamma, double T_p);

// Bose-Einstein occupancy 1 / (exp(hbar omega_m / k_B T) - 1); zero at T = 0.
double phonon_occupancy(double T, double omega_m, const PhysicalConstants& c = si);

// omega_m / kappa; > 1 means sidebands are resolved.
double sideband_resolution(double omega_m, double kappa);

// Photon number for whichever power representation the drive carries.
double resolve_photon_number(const DriveSettings& drive, double kappa,
                             const PhysicalConstants& c = si);

}  // namespace optomech
