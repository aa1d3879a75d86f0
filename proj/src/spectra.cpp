#include "optomech/spectra.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "optomech/constants.hpp"

namespace optomech {

std::complex<double> mechanical_susceptibility(double omega, const MechanicalParams& mech,
                                               double gamma_m) {
  const double re = mech.omega_m * mech.omega_m - omega * omega;
  const std::complex<double> denom(re, -gamma_m * omega);
  return 1.0 / (mech.mass * denom);
}

double displacement_psd(double omega, double T_m, double gamma_m,
                        const MechanicalParams& mech, const PhysicalConstants& c) {
  if (T_m < 0.0) throw std::domain_error("displacement_psd: negative temperature");
  if (gamma_m <= 0.0) throw std::domain_error("displacement_psd: gamma_m must be positive");
  const double d = mech.omega_m * mech.omega_m - omega * omega;
  const double denom = d * d + gamma_m * gamma_m * omega * omega;
  return 4.0 * c.k_B * T_m * gamma_m / (mech.mass * denom);
}

double cavity_frequency_psd(double omega, double T_m, double gamma_m,
                            const MechanicalParams& mech, const CouplingParams& coupling,
                            const PhysicalConstants& c) {
  const double g_hz = coupling.g / two_pi;
  return g_hz * g_hz * displacement_psd(omega, T_m, gamma_m, mech, c);
}

double mean_square_displacement(double T, const MechanicalParams& mech,
                                const PhysicalConstants& c) {
  if (T < 0.0) throw std::domain_error("mean_square_displacement: negative temperature");
  return c.k_B * T / (mech.mass * mech.omega_m * mech.omega_m);
}

double imprecision_floor(double P_c, const NoiseModel& noise) {
  if (P_c <= 0.0) throw std::domain_error("imprecision_floor: P_c must be positive");
  if (noise.imprecision_ref < 0.0 || noise.P_ref <= 0.0)
    throw std::domain_error("imprecision_floor: invalid noise model");
  return noise.imprecision_ref * noise.P_ref / P_c;
}

namespace {

// Uniform in (0, 1): top 53 bits of the engine output, offset by half an ulp
// so the value is never exactly 0 or 1. Avoids std::uniform_real_distribution,
// whose output is implementation-defined across standard libraries.
inline double uniform_open01(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

SpectrumTrace synth_spectrum(const SpectrumModel& model,
                             std::span<const double> frequency_hz, int n_avg,
                             std::uint64_t seed) {
  if (n_avg < 1) throw std::domain_error("synth_spectrum: n_avg must be >= 1");
  if (frequency_hz.empty()) throw std::domain_error("synth_spectrum: empty frequency grid");
  for (std::size_t i = 1; i < frequency_hz.size(); ++i) {
    if (!(frequency_hz[i] > frequency_hz[i - 1]))
      throw std::domain_error("synth_spectrum: frequencies must be strictly increasing");
  }
  if (model.floor < 0.0) throw std::domain_error("synth_spectrum: negative noise floor");

  SpectrumTrace trace;
  trace.frequency_hz.assign(frequency_hz.begin(), frequency_hz.end());
  trace.psd.resize(frequency_hz.size());
  trace.unit = SpectrumUnit::displacement;
  trace.n_avg = n_avg;
  trace.seed = seed;
  trace.provenance = "synth mt19937_64 chi2-expsum v1";

  std::mt19937_64 eng(seed);
  for (std::size_t i = 0; i < frequency_hz.size(); ++i) {
    const double omega = two_pi * frequency_hz[i];
    const double mean =
        model.floor + displacement_psd(omega, model.T_m, model.gamma_m, model.mech);
    // Average of n_avg independent exponential(1) periodogram weights, i.e. a
    // chi^2(2 n_avg) / (2 n_avg) multiplier with unit mean.
    double sum = 0.0;
    for (int k = 0; k < n_avg; ++k) sum += -std::log(uniform_open01(eng));
    trace.psd[i] = mean * (sum / static_cast<double>(n_avg));
  }
  return trace;
}

}  // namespace optomech
