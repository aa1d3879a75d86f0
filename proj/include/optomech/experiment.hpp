#pragma once

#include <optional>
#include <span>
#include <vector>

#include "optomech/kerr.hpp"
#include "optomech/params.hpp"
#include "optomech/spectra.hpp"

namespace optomech {

enum class SweepMode { constant_circulating, constant_incident };

struct SweepRow {
  double detuning_hz = 0.0;  // drive minus low-power resonance, Hz
  double n_photon = 0.0;
  double Gamma_hz = 0.0;     // radiation damping, Hz
  double Omega_hz = 0.0;     // radiation spring shift, Hz
  double gamma_m_hz = 0.0;   // total mechanical linewidth, Hz
  std::optional<double> T_m;   // K; absent while regenerative
  std::optional<double> m_bar; // absent while regenerative
  bool regenerative = false;
  bool multistable = false;  // Kerr steady state not unique at this point
  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepMode mode = SweepMode::constant_circulating;
  double power = 0.0;       // W: circulating or incident, per mode
  double kerr_coeff = 0.0;  // rad/s per photon (0 = linear cavity)
  bool operator==(const SweepResult&) const = default;
};

// Detuning sweep with the incident power readjusted at every point so the
// circulating power stays at P_c. The drive tracks the detuning:
// omega_e = omega_c + delta. Grid in rad/s, strictly monotone.
SweepResult sweep_constant_circulating(double P_c, std::span<const double> detuning_grid,
                                       const SystemParams& params,
                                       const PhysicalConstants& c = si);

// Detuning sweep at fixed incident power P_i; the occupation follows the Kerr
// steady state and the backaction is evaluated at the pulled detuning
// delta + K n. kerr.base must equal params.cavity.
SweepResult sweep_constant_incident(double P_i, std::span<const double> detuning_grid,
                                    const KerrCavity& kerr, const SystemParams& params,
                                    const PhysicalConstants& c = si);

// Detuning (rad/s) maximizing the total damping over [-3 omega_m, 0): coarse
// grid of 400 points, then golden-section refinement to 1e-3 kappa.
double find_optimal_detuning(const PowerSpec& power, const SystemParams& params,
                             const std::optional<KerrCavity>& kerr = std::nullopt,
                             const PhysicalConstants& c = si);

// Power-dependent parasitic load: T_0' = T_0 + alpha P^beta and
// gamma_m0' = gamma_m0 (1 + eta (T_0' - T_0)). Disabled = identity.
struct HeatingModel {
  double alpha = 0.0;  // K / W^beta
  double beta = 1.0;
  double eta = 0.0;    // fractional gamma_m0 increase per K
  bool enabled = false;
  void validate() const;
};

struct CoolingRow {
  double P_c = 0.0;          // W
  double detuning_hz = 0.0;  // optimal detuning, Hz
  double gamma_m_hz = 0.0;   // Hz
  double T_m = 0.0;          // K
  double m_bar = 0.0;
  double floor = 0.0;        // displacement imprecision, m^2/Hz (0 if no model)
  bool operator==(const CoolingRow&) const = default;
};

struct CoolingResult {
  std::vector<CoolingRow> rows;
  bool operator==(const CoolingResult&) const = default;
};

// Cooling curve: for each circulating power (strictly increasing), park at the
// optimal detuning, apply the heating model to the bath and intrinsic
// linewidth, and report the resulting mode temperature and occupancy.
CoolingResult cooling_curve(std::span<const double> powers, const SystemParams& params,
                            const HeatingModel& heating = {},
                            const std::optional<NoiseModel>& noise = std::nullopt,
                            const PhysicalConstants& c = si);

// Solves for the heating model that simultaneously reproduces a measured
// damping ratio gamma_m/gamma_m0 and cooling ratio T_0/T_m at the top power
// P_top (closed form once the backaction at the optimal detuning is known).
// Throws CalibrationError when no nonnegative (alpha, eta) can do it.
HeatingModel derive_heating_model(const SystemParams& params, double P_top,
                                  double damping_ratio, double cooling_ratio,
                                  double beta = 1.0, const PhysicalConstants& c = si);

}  // namespace optomech
