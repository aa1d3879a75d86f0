#pragma once

#include <vector>

#include "optomech/params.hpp"

namespace optomech {

// Cavity whose resonance is pulled down by K per circulating photon. K = 0 is
// exactly the linear cavity.
struct KerrCavity {
  double K = 0.0;  // rad/s per photon, >= 0
  CavityParams base;
  void validate() const;
};

struct KerrSolution {
  double n_bar = 0.0;            // occupation on the low branch
  bool multistable = false;      // more than one positive steady state
  std::vector<double> branches;  // all positive steady states, ascending
};

// Steady-state occupation of the driven Kerr cavity: solves
//   n (kappa^2 + 4 (detuning + K n)^2) = P_i kappa / (hbar omega_e)
// with omega_e = omega_c + detuning (detuning measured from the low-power
// resonance). Cubic in n; n_bar is the root continuously connected to n = 0
// as P_i -> 0 (the branch an upward power ramp follows).
KerrSolution solve_kerr_occupation(double P_i, double detuning, const KerrCavity& kerr,
                                   const PhysicalConstants& c = si);

// K such that the resonance pull K * n_bar equals kappa at P_c = 1 uW, the
// circulating power where nonlinearity becomes visible on this device.
double default_kerr_coefficient(const CavityParams& cavity, const PhysicalConstants& c = si);

}  // namespace optomech
