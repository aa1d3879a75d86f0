#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "optomech/errors.hpp"
#include "optomech/experiment.hpp"
#include "optomech/fitting.hpp"
#include "optomech/nlls.hpp"
#include "optomech/physics.hpp"
#include "optomech/spectra.hpp"

using namespace optomech;

namespace {

const SystemParams device{
    CavityParams{two_pi * 5.22e9, two_pi * 230e3},
    MechanicalParams{two_pi * 1.525e6, two_pi * 1.525e6 / 3.1e5, 6.2e-15},
    CouplingParams{two_pi * 6.4e12},
    ThermalEnvironment{0.05, 1e-5},
};

}  // namespace

// ---------------------------------------------------------------------------
// damped least-squares core
// ---------------------------------------------------------------------------

TEST_CASE("linear model solves in at most two accepted steps") {
  // y = 3 + 2x sampled exactly; residuals are linear in the parameters
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0, 4.0};
  auto res = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      r[i] = p[0] + p[1] * xs[i] - (3.0 + 2.0 * xs[i]);
  };
  const FitResult fit =
      nonlinear_least_squares(res, xs.size(), {0.0, 0.0}, {"a", "b"});
  CHECK(fit.converged);
  CHECK(fit.n_iter <= 2);
  CHECK(fit.param("a") == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.param("b") == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.residual_norm < 1e-18);
}

TEST_CASE("Rosenbrock valley from the classic start") {
  auto res = [](std::span<const double> p, std::span<double> r) {
    r[0] = 1.0 - p[0];
    r[1] = 10.0 * (p[1] - p[0] * p[0]);
  };
  const FitResult fit = nonlinear_least_squares(res, 2, {-1.2, 1.0}, {"x", "y"});
  CHECK(fit.converged);
  CHECK(fit.param("x") == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.param("y") == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("starting at the minimum terminates immediately and reports success") {
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  auto res = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      r[i] = p[0] + p[1] * xs[i] - (1.0 - 0.5 * xs[i]);
  };
  const FitResult fit =
      nonlinear_least_squares(res, xs.size(), {1.0, -0.5}, {"a", "b"});
  CHECK(fit.converged);
  CHECK(fit.n_iter <= 1);
}

TEST_CASE("analytic and finite-difference Jacobians land on the same optimum") {
  // exponential decay with offset: y = p0 exp(-p1 t) + p2
  const std::vector<double> ts{0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  std::vector<double> ys(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    ys[i] = 2.5 * std::exp(-0.8 * ts[i]) + 0.3;
  auto res = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < ts.size(); ++i)
      r[i] = p[0] * std::exp(-p[1] * ts[i]) + p[2] - ys[i];
  };
  auto jac = [&](std::span<const double> p, std::span<double> J) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double e = std::exp(-p[1] * ts[i]);
      J[i * 3 + 0] = e;
      J[i * 3 + 1] = -p[0] * ts[i] * e;
      J[i * 3 + 2] = 1.0;
    }
  };
  const std::vector<double> start{1.0, 0.3, 0.0};
  const FitResult fd = nonlinear_least_squares(res, ts.size(), start, {});
  const FitResult an = nonlinear_least_squares(res, ts.size(), start, {}, {}, jac);
  CHECK(fd.converged);
  CHECK(an.converged);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(fd.params[j] == doctest::Approx(an.params[j]).epsilon(1e-7));
  CHECK(an.param("p0") == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(an.param("p1") == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(an.param("p2") == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("standard errors match the closed-form straight-line case") {
  // Perturbation (1, -2, 1) is orthogonal to both regressors, so the best
  // line is exactly y = 1 + 2x and the residual vector is the perturbation.
  const double eps = 0.01;
  const std::vector<double> xs{-1.0, 0.0, 1.0};
  const std::vector<double> vs{1.0, -2.0, 1.0};
  auto res = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      r[i] = p[0] + p[1] * xs[i] - (1.0 + 2.0 * xs[i] + eps * vs[i]);
  };
  const FitResult fit = nonlinear_least_squares(res, 3, {0.0, 0.0}, {"a", "b"});
  CHECK(fit.converged);
  CHECK(fit.param("a") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.param("b") == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.residual_norm == doctest::Approx(6.0 * eps * eps).epsilon(1e-9));
  CHECK(fit.sigma("a") == doctest::Approx(eps * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(fit.sigma("b") == doctest::Approx(eps * std::sqrt(3.0)).epsilon(1e-6));
}

TEST_CASE("underdetermined problems report zero standard errors") {
  auto res = [](std::span<const double> p, std::span<double> r) {
    r[0] = p[0] + p[1] - 1.0;
  };
  const FitResult fit = nonlinear_least_squares(res, 1, {0.0, 0.0}, {});
  CHECK(fit.sigmas[0] == 0.0);
  CHECK(fit.sigmas[1] == 0.0);
}

TEST_CASE("solver input validation") {
  auto res = [](std::span<const double>, std::span<double> r) { r[0] = 1.0; };
  CHECK_THROWS_AS(nonlinear_least_squares(res, 0, {1.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(nonlinear_least_squares(res, 1, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(nonlinear_least_squares(res, 1, {1.0}, {"a", "b"}),
                  std::invalid_argument);
  auto nan_res = [](std::span<const double>, std::span<double> r) {
    r[0] = std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(nonlinear_least_squares(nan_res, 1, {1.0}, {}), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Lorentzian spectral fits
// ---------------------------------------------------------------------------

namespace {

SpectrumTrace exact_trace(const LorentzianModel& mod, double span, int points,
                          int n_avg = 100) {
  SpectrumTrace t;
  t.unit = SpectrumUnit::displacement;
  t.n_avg = n_avg;
  for (int i = 0; i < points; ++i) {
    const double f = mod.center - span / 2.0 + span * i / (points - 1);
    t.frequency_hz.push_back(f);
    t.psd.push_back(lorentzian_value(mod, f));
  }
  return t;
}

}  // namespace

TEST_CASE("area normalization of the peak model") {
  // integral of (value - floor) over a wide window approaches the area
  const LorentzianModel mod{0.0, 3.0, 7.0, 0.5};
  const int nsteps = 400000;
  const double lo = -6000.0, hi = 6000.0;
  double acc = 0.0;
  const double h = (hi - lo) / nsteps;
  for (int i = 0; i <= nsteps; ++i) {
    const double w = (i == 0 || i == nsteps) ? 0.5 : 1.0;
    acc += w * (lorentzian_value(mod, lo + i * h) - mod.floor);
  }
  acc *= h;
  // tails beyond +-6000 carry about fwhm/(pi*6000) of the area
  CHECK(acc == doctest::Approx(7.0).epsilon(5e-4));
  // peak height is 2 area / (pi fwhm) above the floor
  CHECK(lorentzian_value(mod, 0.0) - mod.floor ==
        doctest::Approx(2.0 * 7.0 / (pi * 3.0)).epsilon(1e-12));
}

TEST_CASE("noiseless Lorentzian is recovered to solver precision") {
  const LorentzianModel truth{1.525e6, 4.92, 1.2e-24, 1e-26};
  const SpectrumTrace t = exact_trace(truth, 200.0, 801);
  const FitResult fit = fit_lorentzian(t);
  CHECK(fit.converged);
  CHECK(fit.param("center_hz") == doctest::Approx(truth.center).epsilon(1e-9));
  CHECK(fit.param("fwhm_hz") == doctest::Approx(truth.fwhm).epsilon(1e-6));
  CHECK(fit.param("area") == doctest::Approx(truth.area).epsilon(1e-6));
  CHECK(fit.param("floor") == doctest::Approx(truth.floor).epsilon(1e-3));
}

TEST_CASE("automatic starting point lands near the truth") {
  const LorentzianModel truth{1.525e6, 4.92, 1.2e-24, 1e-26};
  const LorentzianModel init = lorentzian_init(exact_trace(truth, 200.0, 801));
  CHECK(init.center == doctest::Approx(truth.center).epsilon(1e-4));
  CHECK(init.fwhm == doctest::Approx(truth.fwhm).epsilon(0.25));
  CHECK(init.area == doctest::Approx(truth.area).epsilon(0.35));
}

TEST_CASE("seeded noisy spectra: temperature round trip within 5 percent") {
  const double T_true = 0.05;
  const SpectrumModel model{device.mech, T_true, device.mech.gamma_m0, 1e-26};
  std::vector<double> f(1601);
  const double f_m = device.mech.omega_m / two_pi;
  for (int i = 0; i < 1601; ++i) f[i] = f_m - 100.0 + 200.0 * i / 1600;

  for (const std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
    const SpectrumTrace t = synth_spectrum(model, f, 100, seed);
    const FitResult fit = fit_lorentzian(t);
    CHECK(fit.converged);
    const double T_hat = temperature_from_area(fit.param("area"), device.mech);
    CHECK(T_hat == doctest::Approx(T_true).epsilon(0.05));
    CHECK(fit.param("fwhm_hz") ==
          doctest::Approx(device.mech.gamma_m0 / two_pi).epsilon(0.05));
  }
}

TEST_CASE("a featureless trace raises NoPeakError") {
  SpectrumModel model{device.mech, 0.0, device.mech.gamma_m0, 1e-26};  // floor only
  std::vector<double> f(256);
  for (int i = 0; i < 256; ++i) f[i] = 1e6 + i;
  const SpectrumTrace t = synth_spectrum(model, f, 200, 5);
  CHECK_THROWS_AS(fit_lorentzian(t), NoPeakError);

  SpectrumTrace zeros;
  zeros.frequency_hz = f;
  zeros.psd.assign(f.size(), 0.0);
  zeros.n_avg = 1;
  CHECK_THROWS_AS(fit_lorentzian(zeros), NoPeakError);
}

TEST_CASE("trace validation failures are invalid_argument, not NoPeakError") {
  SpectrumTrace t;
  t.frequency_hz = {1.0, 2.0, 3.0};
  t.psd = {1.0, 2.0, 1.0};
  t.n_avg = 1;
  CHECK_THROWS_AS(fit_lorentzian(t), std::invalid_argument);  // too short
}

TEST_CASE("temperature from integrated displacement area") {
  // forward: equipartition variance at 50 mK maps back to 50 mK
  const double area = mean_square_displacement(0.05, device.mech);
  CHECK(temperature_from_area(area, device.mech) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(temperature_from_area(0.0, device.mech) == 0.0);
  CHECK_THROWS_AS(temperature_from_area(-1e-30, device.mech), std::domain_error);
}

// ---------------------------------------------------------------------------
// coupling calibration
// ---------------------------------------------------------------------------

namespace {

std::vector<CalibrationPoint> exact_calibration(double slope, double intercept,
                                                std::initializer_list<double> temps) {
  std::vector<CalibrationPoint> pts;
  for (const double T : temps) pts.push_back({T, slope * T + intercept});
  return pts;
}

}  // namespace

TEST_CASE("exact equipartition line returns the reference coupling") {
  const double slope = 993.46396064603266;  // Hz^2 per K for g/2pi = 6.4e12 Hz/m
  const auto pts = exact_calibration(slope, 0.0, {0.05, 0.1, 0.15, 0.2, 0.3});
  const CalibrationResult cal = calibrate_coupling(pts, device.mech);
  CHECK(cal.g == doctest::Approx(two_pi * 6.4e12).epsilon(1e-10));
  CHECK(cal.slope == doctest::Approx(slope).epsilon(1e-12));
  CHECK(cal.intercept == doctest::Approx(0.0).scale(slope));
  CHECK(cal.slope_sigma == doctest::Approx(0.0).scale(slope));
}

TEST_CASE("an imprecision pedestal shifts the intercept, not the slope") {
  const double slope = 993.46396064603266;
  const auto pts = exact_calibration(slope, 55.0, {0.05, 0.1, 0.15, 0.2, 0.3});
  const CalibrationResult cal = calibrate_coupling(pts, device.mech);
  CHECK(cal.slope == doctest::Approx(slope).epsilon(1e-12));
  CHECK(cal.intercept == doctest::Approx(55.0).epsilon(1e-10));
  CHECK(cal.g == doctest::Approx(two_pi * 6.4e12).epsilon(1e-10));
}

TEST_CASE("noisy calibration: median recovery within 3 percent over 20 seeds") {
  const double slope = 993.46396064603266;
  std::vector<double> gs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(900 + seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<CalibrationPoint> pts;
    for (const double T : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4}) {
      const double clean = slope * T;
      pts.push_back({T, clean * (1.0 + noise(rng))});
    }
    gs.push_back(calibrate_coupling(pts, device.mech).g);
  }
  std::sort(gs.begin(), gs.end());
  const double med = 0.5 * (gs[9] + gs[10]);
  CHECK(med == doctest::Approx(two_pi * 6.4e12).epsilon(0.03));
}

TEST_CASE("decreasing area with temperature is a calibration failure") {
  const auto pts = exact_calibration(-40.0, 500.0, {0.05, 0.1, 0.2, 0.3});
  CHECK_THROWS_AS(calibrate_coupling(pts, device.mech), CalibrationError);
}

TEST_CASE("fewer than three distinct temperatures is a usage error") {
  std::vector<CalibrationPoint> pts{{0.05, 50.0}, {0.05, 51.0}, {0.1, 100.0}};
  CHECK_THROWS_AS(calibrate_coupling(pts, device.mech), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// detuning-sweep power fit
// ---------------------------------------------------------------------------

namespace {

std::vector<SweepPoint> sweep_points_at(double P_c, double lo, double hi, int n) {
  std::vector<double> grid;
  for (int i = 0; i < n; ++i)
    grid.push_back(two_pi * (lo + (hi - lo) * i / (n - 1)));
  const SweepResult sw = sweep_constant_circulating(P_c, grid, device);
  std::vector<SweepPoint> pts;
  for (const auto& row : sw.rows)
    pts.push_back({row.detuning_hz, row.gamma_m_hz, row.Omega_hz});
  return pts;
}

}  // namespace

TEST_CASE("noiseless sweep returns the injected circulating power") {
  const auto pts = sweep_points_at(900e-9, -3.5e6, 3.5e6, 41);
  const FitResult fit = fit_detuning_sweep(pts, device);
  CHECK(fit.converged);
  CHECK(fit.param("P_c") == doctest::Approx(900e-9).epsilon(1e-9));
}

TEST_CASE("freeing the intrinsic linewidth still recovers both parameters") {
  const auto pts = sweep_points_at(900e-9, -3.5e6, 3.5e6, 41);
  SweepFitOptions opt;
  opt.free_gamma_m0 = true;
  const FitResult fit = fit_detuning_sweep(pts, device, opt);
  CHECK(fit.converged);
  CHECK(fit.param("P_c") == doctest::Approx(900e-9).epsilon(1e-8));
  CHECK(fit.param("gamma_m0_hz") ==
        doctest::Approx(device.mech.gamma_m0 / two_pi).epsilon(1e-8));
}

TEST_CASE("explicit block weights do not move the noiseless optimum") {
  const auto pts = sweep_points_at(900e-9, -3.5e6, 3.5e6, 41);
  SweepFitOptions opt;
  opt.sigma_gamma = 0.7;
  opt.sigma_shift = 0.02;
  const FitResult fit = fit_detuning_sweep(pts, device, opt);
  CHECK(fit.converged);
  CHECK(fit.param("P_c") == doctest::Approx(900e-9).epsilon(1e-9));
}

TEST_CASE("fitted power is monotone in the injected power") {
  const auto lo = sweep_points_at(300e-9, -3.0e6, 3.0e6, 25);
  const auto hi = sweep_points_at(600e-9, -3.0e6, 3.0e6, 25);
  const double P_lo = fit_detuning_sweep(lo, device).param("P_c");
  const double P_hi = fit_detuning_sweep(hi, device).param("P_c");
  CHECK(P_lo < P_hi);
  CHECK(P_lo == doctest::Approx(300e-9).epsilon(1e-9));
  CHECK(P_hi == doctest::Approx(600e-9).epsilon(1e-9));
}

TEST_CASE("an undriven sweep fits to zero power") {
  // gamma stays at its intrinsic value, shift stays at zero
  std::vector<SweepPoint> pts;
  const double g0 = device.mech.gamma_m0 / two_pi;
  for (int i = 0; i < 11; ++i) pts.push_back({-3.0e6 + 0.6e6 * i, g0, 0.0});
  const FitResult fit = fit_detuning_sweep(pts, device);
  CHECK(fit.param("P_c") == doctest::Approx(0.0).scale(1e-9).epsilon(1e-9));
}

TEST_CASE("a sweep far outside the sidebands carries no power information") {
  std::vector<SweepPoint> pts;
  const double g0 = device.mech.gamma_m0 / two_pi;
  for (int i = 0; i < 11; ++i) {
    const double detuning_hz = -20.0e6 + 0.2e6 * i;  // |delta| >= 12 omega_m
    pts.push_back({detuning_hz, g0, 0.0});
  }
  CHECK_THROWS_AS(fit_detuning_sweep(pts, device), InsensitivityError);
}

TEST_CASE("too few sweep points is a usage error") {
  std::vector<SweepPoint> pts{{-1.525e6, 10.0, 0.0}};
  CHECK_THROWS_AS(fit_detuning_sweep(pts, device), std::invalid_argument);
}
