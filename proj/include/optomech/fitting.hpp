#pragma once

#include <optional>
#include <span>

#include "optomech/nlls.hpp"
#include "optomech/params.hpp"
#include "optomech/spectra.hpp"

namespace optomech {

// Peak-with-floor model for a thermal noise spectrum,
//   L(f) = floor + (2 area / pi) * fwhm / (4 (f - center)^2 + fwhm^2),
// normalized so the integral of L - floor over all f equals area.
struct LorentzianModel {
  double center = 0.0;  // Hz
  double fwhm = 0.0;    // Hz
  double area = 0.0;    // trace unit x Hz
  double floor = 0.0;   // trace unit
};

double lorentzian_value(const LorentzianModel& mod, double f);

// Automatic starting point: center at the peak bin, floor at the median,
// fwhm from the half-maximum crossing span, area from the summed excess.
LorentzianModel lorentzian_init(const SpectrumTrace& trace);

// Weighted fit of the model to a trace. Bin sigma is value/sqrt(n_avg) on the
// first pass and model/sqrt(n_avg) on a reweighted second pass, which removes
// the bias from weighting by the noisy values themselves. Parameter order:
// center, fwhm, area, floor. Throws NoPeakError when the trace maximum is not
// resolved above the floor noise.
FitResult fit_lorentzian(const SpectrumTrace& trace,
                         std::optional<LorentzianModel> init = std::nullopt);

// Inverse equipartition: T = area * m * omega_m^2 / k_B for an integrated
// displacement PSD in m^2.
double temperature_from_area(double area, const MechanicalParams& mech,
                             const PhysicalConstants& c = si);

struct CalibrationPoint {
  double T = 0.0;                 // K
  double mean_square_freq = 0.0;  // Hz^2
  bool operator==(const CalibrationPoint&) const = default;
};

struct CalibrationResult {
  double g = 0.0;        // rad/s per m
  double g_sigma = 0.0;
  double slope = 0.0;    // Hz^2 per K
  double slope_sigma = 0.0;
  double intercept = 0.0;  // Hz^2 (absorbs temperature-independent imprecision)
  double intercept_sigma = 0.0;
};

// Linear fit mean_square_freq = slope * T + intercept; the slope alone fixes
// the coupling through g / 2 pi = sqrt(slope * m * omega_m^2 / k_B). Throws
// CalibrationError when the fitted slope is not positive.
CalibrationResult calibrate_coupling(std::span<const CalibrationPoint> points,
                                     const MechanicalParams& mech,
                                     const PhysicalConstants& c = si);

struct SweepPoint {
  double detuning = 0.0;    // Hz
  double gamma_m = 0.0;     // total mechanical linewidth, Hz
  double freq_shift = 0.0;  // mechanical resonance shift, Hz
};

struct SweepFitOptions {
  bool free_gamma_m0 = false;  // also fit the intrinsic linewidth
  // Per-block noise levels (Hz). When absent they are estimated from the
  // residuals of an unweighted first pass.
  std::optional<double> sigma_gamma;
  std::optional<double> sigma_shift;
};

// Joint fit of the damping and frequency-shift detuning dependence with the
// circulating power P_c as the free parameter (parameter name "P_c", watts).
// All device parameters are taken from `fixed`; gamma_m0 is held unless
// options.free_gamma_m0 (parameter name "gamma_m0_hz"). Throws
// InsensitivityError when every point sits too far from the mechanical
// sidebands to carry power information.
FitResult fit_detuning_sweep(std::span<const SweepPoint> points,
                             const SystemParams& fixed,
                             const SweepFitOptions& options = {},
                             const PhysicalConstants& c = si);

}  // namespace optomech
