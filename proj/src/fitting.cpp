#include "optomech/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/physics.hpp"

namespace optomech {

double lorentzian_value(const LorentzianModel& mod, double f) {
  const double d = f - mod.center;
  const double denom = 4.0 * d * d + mod.fwhm * mod.fwhm;
  return mod.floor + (2.0 * mod.area / pi) * mod.fwhm / denom;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  double hi = v[h];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + h - 1, v.begin() + h);
    return 0.5 * (v[h - 1] + hi);
  }
  return hi;
}

void check_trace(const SpectrumTrace& trace) {
  if (trace.psd.size() != trace.frequency_hz.size())
    throw std::invalid_argument("fit_lorentzian: grid/psd length mismatch");
  if (trace.psd.size() < 8)
    throw std::invalid_argument("fit_lorentzian: need at least 8 points");
  if (trace.n_avg < 1) throw std::invalid_argument("fit_lorentzian: n_avg must be >= 1");
  for (std::size_t i = 1; i < trace.frequency_hz.size(); ++i)
    if (!(trace.frequency_hz[i] > trace.frequency_hz[i - 1]))
      throw std::invalid_argument("fit_lorentzian: frequencies must be strictly increasing");
}

}  // namespace

LorentzianModel lorentzian_init(const SpectrumTrace& trace) {
  check_trace(trace);
  const auto& f = trace.frequency_hz;
  const auto& y = trace.psd;
  const std::size_t n = y.size();

  LorentzianModel mod;
  mod.floor = median(y);
  const std::size_t k =
      static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  mod.center = f[k];

  const double half = mod.floor + 0.5 * (y[k] - mod.floor);
  double left = f.front();
  for (std::size_t i = k; i-- > 0;) {
    if (y[i] < half) {
      const double t = (half - y[i]) / (y[i + 1] - y[i]);
      left = f[i] + t * (f[i + 1] - f[i]);
      break;
    }
  }
  double right = f.back();
  for (std::size_t i = k + 1; i < n; ++i) {
    if (y[i] < half) {
      const double t = (y[i - 1] - half) / (y[i - 1] - y[i]);
      right = f[i - 1] + t * (f[i] - f[i - 1]);
      break;
    }
  }
  mod.fwhm = right - left;
  const double spacing = k + 1 < n ? f[k + 1] - f[k] : f[k] - f[k - 1];
  if (!(mod.fwhm > 0.0)) mod.fwhm = spacing;

  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double df = i + 1 < n ? f[i + 1] - f[i] : f[i] - f[i - 1];
    area += std::max(y[i] - mod.floor, 0.0) * df;
  }
  mod.area = area > 0.0 ? area : (y[k] - mod.floor) * mod.fwhm * 1.5707963267948966;
  return mod;
}

FitResult fit_lorentzian(const SpectrumTrace& trace, std::optional<LorentzianModel> init) {
  check_trace(trace);
  const auto& f = trace.frequency_hz;
  const auto& y = trace.psd;
  const std::size_t m = y.size();

  const double maxv = *std::max_element(y.begin(), y.end());
  if (!(maxv > 0.0)) throw NoPeakError("fit_lorentzian: trace has no positive values");
  const double floor_est = median(y);
  const double rel_noise = 1.0 / std::sqrt(static_cast<double>(trace.n_avg));
  if (maxv < floor_est * (1.0 + 3.0 * rel_noise))
    throw NoPeakError("fit_lorentzian: maximum not resolved above the floor noise");

  const LorentzianModel start = init ? *init : lorentzian_init(trace);
  std::vector<double> theta{start.center, start.fwhm, start.area, start.floor};
  std::vector<std::string> names{"center_hz", "fwhm_hz", "area", "floor"};

  const double sigma_min = 1e-3 * maxv;  // keeps weights finite on dead bins
  std::vector<double> sigma(m);

  auto residual = [&](std::span<const double> p, std::span<double> r) {
    const LorentzianModel mod{p[0], p[1], p[2], p[3]};
    for (std::size_t i = 0; i < m; ++i)
      r[i] = (lorentzian_value(mod, f[i]) - y[i]) / sigma[i];
  };
  auto jac = [&](std::span<const double> p, std::span<double> J) {
    const double c = p[0], w = p[1], A = p[2];
    for (std::size_t i = 0; i < m; ++i) {
      const double d = f[i] - c;
      const double denom = 4.0 * d * d + w * w;
      const double inv2 = 1.0 / (denom * denom);
      const double pref = 2.0 * A / pi;
      J[i * 4 + 0] = pref * 8.0 * d * w * inv2 / sigma[i];
      J[i * 4 + 1] = pref * (4.0 * d * d - w * w) * inv2 / sigma[i];
      J[i * 4 + 2] = (2.0 / pi) * w / denom / sigma[i];
      J[i * 4 + 3] = 1.0 / sigma[i];
    }
  };

  // Pass 1: data-based weights.
  for (std::size_t i = 0; i < m; ++i) sigma[i] = std::max(y[i], sigma_min) * rel_noise;
  FitResult pass1 = nonlinear_least_squares(residual, m, theta, names, {}, jac);

  // Pass 2: weights from the fitted model, which are independent of the bin
  // noise and therefore unbiased.
  const LorentzianModel mid{pass1.params[0], pass1.params[1], pass1.params[2],
                            pass1.params[3]};
  for (std::size_t i = 0; i < m; ++i)
    sigma[i] = std::max(lorentzian_value(mid, f[i]), sigma_min) * rel_noise;
  FitResult out = nonlinear_least_squares(residual, m, pass1.params, names, {}, jac);

  if (out.params[1] < 0.0) {  // (fwhm, area) -> (-fwhm, -area) is the same curve
    out.params[1] = -out.params[1];
    out.params[2] = -out.params[2];
  }
  return out;
}

double temperature_from_area(double area, const MechanicalParams& mech,
                             const PhysicalConstants& c) {
  if (area < 0.0) throw std::domain_error("temperature_from_area: negative area");
  mech.validate();
  return area * mech.mass * mech.omega_m * mech.omega_m / c.k_B;
}

CalibrationResult calibrate_coupling(std::span<const CalibrationPoint> points,
                                     const MechanicalParams& mech,
                                     const PhysicalConstants& c) {
  mech.validate();
  std::vector<double> temps;
  for (const auto& p : points) temps.push_back(p.T);
  std::sort(temps.begin(), temps.end());
  temps.erase(std::unique(temps.begin(), temps.end()), temps.end());
  if (temps.size() < 3)
    throw std::invalid_argument("calibrate_coupling: need at least 3 distinct temperatures");

  const double n = static_cast<double>(points.size());
  double T_bar = 0.0, y_bar = 0.0;
  for (const auto& p : points) {
    T_bar += p.T;
    y_bar += p.mean_square_freq;
  }
  T_bar /= n;
  y_bar /= n;
  double Sxx = 0.0, Sxy = 0.0;
  for (const auto& p : points) {
    Sxx += (p.T - T_bar) * (p.T - T_bar);
    Sxy += (p.T - T_bar) * (p.mean_square_freq - y_bar);
  }

  CalibrationResult out;
  out.slope = Sxy / Sxx;
  out.intercept = y_bar - out.slope * T_bar;
  if (!(out.slope > 0.0))
    throw CalibrationError("calibrate_coupling: fitted slope is not positive");

  double ss = 0.0;
  for (const auto& p : points) {
    const double r = p.mean_square_freq - out.slope * p.T - out.intercept;
    ss += r * r;
  }
  const double dof = n - 2.0;
  const double s2 = dof > 0.0 ? ss / dof : 0.0;
  out.slope_sigma = std::sqrt(s2 / Sxx);
  out.intercept_sigma = std::sqrt(s2 * (1.0 / n + T_bar * T_bar / Sxx));

  // slope = (g / 2 pi)^2 k_B / (m omega_m^2)
  const double g_hz = std::sqrt(out.slope * mech.mass * mech.omega_m * mech.omega_m / c.k_B);
  out.g = two_pi * g_hz;
  out.g_sigma = out.g * out.slope_sigma / (2.0 * out.slope);
  return out;
}

FitResult fit_detuning_sweep(std::span<const SweepPoint> points,
                             const SystemParams& fixed, const SweepFitOptions& options,
                             const PhysicalConstants& c) {
  fixed.validate();
  const std::size_t np = points.size();
  const std::size_t n_par = options.free_gamma_m0 ? 2 : 1;
  if (np < n_par + 1)
    throw std::invalid_argument("fit_detuning_sweep: not enough sweep points");

  const double kappa = fixed.cavity.kappa;
  const double omega_m = fixed.mech.omega_m;
  const double x_zp = zero_point_motion(fixed.mech, c);
  const double gx2 = fixed.coupling.g * fixed.coupling.g * x_zp * x_zp;

  // Per-watt response of each observable (the model is linear in P_c).
  std::vector<double> c_gamma(np), c_shift(np);
  double kernel_max = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    const double delta = two_pi * points[i].detuning;
    const double omega_e = fixed.cavity.omega_c + delta;
    if (!(omega_e > 0.0))
      throw std::invalid_argument("fit_detuning_sweep: detuning below -f_c");
    const double B_unit = 4.0 * gx2 / (c.hbar * omega_e * omega_e);  // B at P_c = 1 W
    c_gamma[i] = backaction_damping(B_unit, kappa, omega_m, delta) / two_pi;
    c_shift[i] = backaction_spring(B_unit, kappa, omega_m, delta) / two_pi;
    kernel_max = std::max(kernel_max,
                          std::abs(backaction_damping(1.0, kappa, omega_m, delta)) +
                              std::abs(backaction_spring(1.0, kappa, omega_m, delta)));
  }
  const double kernel_ref =
      std::abs(backaction_damping(1.0, kappa, omega_m, -omega_m)) +
      std::abs(backaction_spring(1.0, kappa, omega_m, -omega_m));
  if (kernel_max < 1e-2 * kernel_ref)
    throw InsensitivityError(
        "fit_detuning_sweep: all points lie far from the mechanical sidebands; "
        "the sweep carries no circulating-power information");

  const double gamma_m0_hz = fixed.mech.gamma_m0 / two_pi;

  // Unweighted closed-form solution as the starting point (exact for the
  // fixed-gamma_m0 model, which is linear in P_c).
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    num += c_gamma[i] * (points[i].gamma_m - gamma_m0_hz) + c_shift[i] * points[i].freq_shift;
    den += c_gamma[i] * c_gamma[i] + c_shift[i] * c_shift[i];
  }
  if (!(den > 0.0))
    throw InsensitivityError("fit_detuning_sweep: zero response to circulating power");
  const double P0 = num / den;

  double sg = options.sigma_gamma.value_or(0.0);
  double ss = options.sigma_shift.value_or(0.0);
  if (!options.sigma_gamma || !options.sigma_shift) {
    double rg = 0.0, rs = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      const double dg = gamma_m0_hz + c_gamma[i] * P0 - points[i].gamma_m;
      const double ds = c_shift[i] * P0 - points[i].freq_shift;
      rg += dg * dg;
      rs += ds * ds;
    }
    const double est_g = std::sqrt(rg / static_cast<double>(np));
    const double est_s = std::sqrt(rs / static_cast<double>(np));
    if (!options.sigma_gamma) sg = est_g;
    if (!options.sigma_shift) ss = est_s;
  }
  if (sg <= 0.0 || ss <= 0.0) sg = ss = 1.0;  // noiseless data: any common weight

  const std::size_t m = 2 * np;
  auto residual = [&](std::span<const double> p, std::span<double> r) {
    const double P = p[0];
    const double g0 = options.free_gamma_m0 ? p[1] : gamma_m0_hz;
    for (std::size_t i = 0; i < np; ++i) {
      r[i] = (g0 + c_gamma[i] * P - points[i].gamma_m) / sg;
      r[np + i] = (c_shift[i] * P - points[i].freq_shift) / ss;
    }
  };
  auto jac = [&](std::span<const double>, std::span<double> J) {
    for (std::size_t i = 0; i < np; ++i) {
      J[i * n_par] = c_gamma[i] / sg;
      J[(np + i) * n_par] = c_shift[i] / ss;
      if (n_par == 2) {
        J[i * n_par + 1] = 1.0 / sg;
        J[(np + i) * n_par + 1] = 0.0;
      }
    }
  };

  std::vector<double> init{P0};
  std::vector<std::string> names{"P_c"};
  if (options.free_gamma_m0) {
    init.push_back(gamma_m0_hz);
    names.push_back("gamma_m0_hz");
  }
  return nonlinear_least_squares(residual, m, std::move(init), std::move(names), {}, jac);
}

}  // namespace optomech
