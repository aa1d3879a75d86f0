#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optomech/params.hpp"

namespace optomech {

enum class SpectrumUnit { displacement, cavity_frequency };

struct SpectrumTrace {
  std::vector<double> frequency_hz;  // strictly increasing, ordinary Hz
  std::vector<double> psd;           // m^2/Hz (displacement) or Hz^2/Hz (cavity_frequency)
  SpectrumUnit unit = SpectrumUnit::displacement;
  int n_avg = 1;
  std::optional<std::uint64_t> seed;
  std::string provenance;
  bool operator==(const SpectrumTrace&) const = default;
};

struct NoiseModel {
  double imprecision_ref = 0.0;  // displacement floor at P_ref, m^2/Hz
  double P_ref = 0.0;            // reference circulating power, W
};

// chi(omega) = 1 / (m (omega_m^2 - omega^2 - i gamma_m omega)), m/N.
std::complex<double> mechanical_susceptibility(double omega, const MechanicalParams& mech,
                                               double gamma_m);

// One-sided thermal displacement noise,
//   S_x(omega) = 4 k_B T gamma_m / m / ((omega_m^2 - omega^2)^2 + gamma_m^2 omega^2),
// normalized so integral_0^inf S_x d omega / 2 pi = k_B T / (m omega_m^2).
// Sampled at omega = 2 pi f this is the PSD per ordinary Hz, in m^2/Hz.
double displacement_psd(double omega, double T_m, double gamma_m,
                        const MechanicalParams& mech, const PhysicalConstants& c = si);

// Cavity resonance fluctuation S_f = (g / 2 pi)^2 S_x, Hz^2/Hz.
double cavity_frequency_psd(double omega, double T_m, double gamma_m,
                            const MechanicalParams& mech, const CouplingParams& coupling,
                            const PhysicalConstants& c = si);

// Equipartition: <x^2> = k_B T / (m omega_m^2).
double mean_square_displacement(double T, const MechanicalParams& mech,
                                const PhysicalConstants& c = si);

// Measurement imprecision scales inversely with drive power:
//   floor(P_c) = imprecision_ref * P_ref / P_c.
double imprecision_floor(double P_c, const NoiseModel& noise);

struct SpectrumModel {
  MechanicalParams mech;
  double T_m = 0.0;     // K
  double gamma_m = 0.0; // total peak linewidth, rad/s
  double floor = 0.0;   // additive white floor, m^2/Hz
};

// Periodogram-averaged synthetic spectrum: each bin is the model PSD scaled by
// an independent chi^2(2 n_avg) / (2 n_avg) draw (relative std 1/sqrt(n_avg)).
// Draws come from mt19937_64 through a sum of inverse-CDF exponentials, so a
// given (seed, grid, params) yields a bit-identical trace; the generator id is
// recorded in the trace provenance.
SpectrumTrace synth_spectrum(const SpectrumModel& model,
                             std::span<const double> frequency_hz, int n_avg,
                             std::uint64_t seed);

}  // namespace optomech
