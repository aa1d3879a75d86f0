// Release gate for the toolkit. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any of them fails. argv[1]
// must be the path to the command-line binary (used by the determinism
// check, criterion 12).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optomech/config.hpp"
#include "optomech/csv.hpp"
#include "optomech/errors.hpp"
#include "optomech/experiment.hpp"
#include "optomech/fitting.hpp"
#include "optomech/kerr.hpp"
#include "optomech/physics.hpp"
#include "optomech/quadrature.hpp"
#include "optomech/spectra.hpp"

using namespace optomech;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << " (" << detail
            << ")\n";
  if (!ok) ++failures;
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <class Body>
void criterion(int n, Body&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(n, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  const Config cfg = paper_device();
  const SystemParams dev = cfg.to_system();
  const double wm = dev.mech.omega_m;
  const double kappa = dev.cavity.kappa;
  const double x_zp = zero_point_motion(dev.mech);

  // 1. Bose occupancy of the 1.525 MHz mode at the two operating temperatures.
  criterion(1, [&] {
    const double m50 = phonon_occupancy(0.05, wm);
    const double m10 = phonon_occupancy(0.01, wm);
    const bool ok = m50 >= 676.0 && m50 <= 690.0 && std::abs(m50 / 700.0 - 1.0) <= 0.03 &&
                    m10 >= 133.0 && m10 <= 147.0;
    report(1, ok, "m_bar(50 mK) = " + num(m50) + ", m_bar(10 mK) = " + num(m10));
  });

  // 2. Deep resolved-sideband operating point.
  criterion(2, [&] {
    const double r = sideband_resolution(wm, kappa);
    report(2, std::abs(r - 6.63) <= 0.01, "omega_m / kappa = " + num(r));
  });

  // 3. Backaction comparable to the intrinsic damping at 900 nW, and a
  //    regenerative window somewhere on the blue side below 2 omega_m.
  criterion(3, [&] {
    const double gamma_ref = wm / 3.0e5;
    const DriveSettings drive =
        DriveSettings::at_detuning(dev.cavity, -wm, CirculatingPower{900e-9});
    const double n = resolve_photon_number(drive, kappa);
    const double B = backaction_prefactor(n, dev.coupling.g, x_zp);
    const double Gamma = backaction_damping(B, kappa, wm, -wm);
    const double ratio = Gamma / gamma_ref;

    std::vector<double> grid;
    for (int i = 1; i <= 3049; ++i) grid.push_back(two_pi * (i * 1.0e3));
    const SweepResult sweep = sweep_constant_circulating(900e-9, grid, dev);
    bool regen = false;
    for (const auto& row : sweep.rows) regen = regen || row.regenerative;

    const bool ok = ratio >= 0.5 && ratio <= 2.5 && regen;
    report(3, ok, "Gamma/gamma_ref = " + num(ratio) +
                      (regen ? ", blue-side instability found"
                             : ", no blue-side instability"));
  });

  // 4. Damping and spring are odd in the detuning; blue detuning antidamps.
  criterion(4, [&] {
    std::mt19937_64 rng(20260823ULL);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 1000 && ok; ++i) {
      const double delta = (0.01 + 2.99 * uni(rng)) * wm;
      const double P = 1e-8 * std::pow(100.0, uni(rng));
      const double n = photon_number_from_circulating(P, dev.cavity.omega_c);
      const double B = backaction_prefactor(n, dev.coupling.g, x_zp);
      const double gp = backaction_damping(B, kappa, wm, delta);
      const double gm = backaction_damping(B, kappa, wm, -delta);
      const double sp = backaction_spring(B, kappa, wm, delta);
      const double sm = backaction_spring(B, kappa, wm, -delta);
      if (!(gp < 0.0)) ok = false;
      const double gerr = std::abs(gp + gm) / std::max(std::abs(gp), std::abs(gm));
      const double serr = std::abs(sp + sm) /
                          std::max({std::abs(sp), std::abs(sm), 1e-300});
      worst = std::max({worst, gerr, serr});
      if (gerr > 1e-12 || serr > 1e-12) ok = false;
    }
    report(4, ok, "1000 draws, worst odd-symmetry error = " + num(worst));
  });

  // 5. Damping-weighted bath mixture with a cold drive field.
  criterion(5, [&] {
    const double g0 = dev.mech.gamma_m0;
    const double T = effective_temperature(g0, 0.05, 4.0 * g0, 1e-5);
    report(5, std::abs(T / 0.010 - 1.0) <= 0.001, "T_m = " + num(T) + " K");
  });

  // 6. The added damping is linear in circulating power across a decade.
  criterion(6, [&] {
    std::vector<double> powers;
    for (int i = 0; i < 9; ++i) powers.push_back(0.73e-6 * std::pow(10.0, i / 8.0));
    const CoolingResult cool = cooling_curve(powers, dev);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(cool.rows.size());
    for (const auto& row : cool.rows) {
      const double x = std::log(row.P_c);
      const double y = std::log(row.gamma_m_hz - cfg.system.gamma_m0);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    report(6, std::abs(slope - 1.0) <= 0.001, "log-log slope = " + num(slope));
  });

  // 7. The thermal spectrum integrates to the equipartition value for random
  //    high-Q oscillators.
  criterion(7, [&] {
    std::mt19937_64 rng(7ULL);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double w0 = two_pi * std::pow(10.0, 5.0 + 2.0 * uni(rng));
      const double Q = std::pow(10.0, 3.0 + 2.0 * uni(rng));
      const double mass = std::pow(10.0, -16.0 + 3.0 * uni(rng));
      const double T = 0.01 + 0.99 * uni(rng);
      const MechanicalParams osc{w0, w0 / Q, mass};
      const double gamma = osc.gamma_m0;
      const double expected = si.k_B * T / (mass * w0 * w0);
      const auto f = [&](double w) { return displacement_psd(w, T, gamma, osc); };
      const double tol = 1e-4 * expected * two_pi;
      const double lo = w0 - 300.0 * gamma;
      const double hi = w0 + 300.0 * gamma;
      const double integral = integrate(f, 0.0, lo, tol) + integrate(f, lo, hi, tol) +
                              integrate(f, hi, 40.0 * w0, tol);
      const double rel = std::abs(integral / two_pi / expected - 1.0);
      worst = std::max(worst, rel);
      if (rel > 0.005) ok = false;
    }
    report(7, ok, "20 random oscillators, worst equipartition error = " + num(worst));
  });

  // 8. Line fits on noisy synthetic spectra recover width and area.
  criterion(8, [&] {
    const SpectrumModel model{dev.mech, 0.05, dev.mech.gamma_m0, 1e-26};
    std::vector<double> grid;
    for (int i = 0; i < 1601; ++i)
      grid.push_back(cfg.system.f_m - 100.0 + 200.0 * i / 1600.0);
    const double fwhm_true = dev.mech.gamma_m0 / two_pi;
    const double area_true = mean_square_displacement(0.05, dev.mech);
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const SpectrumTrace trace = synth_spectrum(model, grid, 100, seed);
      try {
        const FitResult fit = fit_lorentzian(trace);
        const double T_hat = temperature_from_area(fit.param("area"), dev.mech);
        const bool close = fit.converged &&
                           std::abs(fit.param("fwhm_hz") / fwhm_true - 1.0) <= 0.05 &&
                           std::abs(fit.param("area") / area_true - 1.0) <= 0.05 &&
                           std::abs(T_hat / 0.05 - 1.0) <= 0.05;
        if (close) ++good;
      } catch (const NoPeakError&) {
      }
    }
    report(8, good >= 48, std::to_string(good) + "/50 seeds within 5%");
  });

  // 9. Coupling calibration from noisy area-vs-temperature data.
  criterion(9, [&] {
    const double slope_true = std::pow(dev.coupling.g / two_pi, 2) * si.k_B /
                              (dev.mech.mass * wm * wm);
    const std::vector<double> temps{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
    std::vector<double> gs;
    std::mt19937_64 rng(99ULL);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<CalibrationPoint> pts;
      for (const double T : temps)
        pts.push_back({T, slope_true * T * (1.0 + noise(rng))});
      gs.push_back(calibrate_coupling(pts, dev.mech).g);
    }
    std::nth_element(gs.begin(), gs.begin() + 50, gs.end());
    const double median = gs[50];
    const double rel = std::abs(median / dev.coupling.g - 1.0);
    report(9, rel <= 0.03, "median g off by " + num(100.0 * rel) + "%");
  });

  // 10. Power inference from a noiseless detuning sweep.
  criterion(10, [&] {
    std::vector<double> grid;
    for (int i = 0; i < 61; ++i)
      grid.push_back(two_pi * (-3.5e6 + 3.0e6 * i / 60.0));
    const SweepResult sweep = sweep_constant_circulating(900e-9, grid, dev);
    std::vector<SweepPoint> pts;
    for (const auto& row : sweep.rows)
      pts.push_back({row.detuning_hz, row.gamma_m_hz, row.Omega_hz});
    const FitResult fit = fit_detuning_sweep(pts, dev);
    const double rel = std::abs(fit.param("P_c") / 900e-9 - 1.0);
    report(10, fit.converged && rel <= 0.02,
           "P_c recovered to " + num(100.0 * rel) + "%");
  });

  // 11. The Kerr pull drags the best cooling detuning monotonically to the
  //     red as the incident power rises; a linear cavity shows no drift.
  criterion(11, [&] {
    std::vector<double> grid;
    for (int i = 0; i < 801; ++i)
      grid.push_back(two_pi * (-2.5 + 2.0 * i / 800.0) * cfg.system.f_m);
    const auto best_detuning = [&](const KerrCavity& kerr, double P_i) {
      const SweepResult sweep = sweep_constant_incident(P_i, grid, kerr, dev);
      const SweepRow* best = &sweep.rows.front();
      for (const auto& row : sweep.rows)
        if (row.Gamma_hz > best->Gamma_hz) best = &row;
      return best->detuning_hz;
    };
    std::vector<double> powers;
    for (int k = 0; k < 8; ++k) powers.push_back(16e-9 * std::pow(10.0, 0.8 * k / 7.0));

    const KerrCavity kerr = cfg.to_kerr();
    bool monotone = true;
    std::vector<double> dets;
    for (const double P : powers) dets.push_back(best_detuning(kerr, P));
    for (std::size_t k = 1; k < dets.size(); ++k)
      if (dets[k] > dets[k - 1]) monotone = false;

    const KerrCavity linear{0.0, dev.cavity};
    double lo = 1e300, hi = -1e300;
    for (const double P : powers) {
      const double d = best_detuning(linear, P);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    const double drift = hi - lo;
    const bool ok = monotone && drift < 1e-3 * cfg.system.kappa;
    report(11, ok, std::string(monotone ? "pull monotone" : "pull not monotone") +
                       ", linear-cavity drift = " + num(drift) + " Hz");
  });

  // 12. Every file the command-line tool writes is byte-identical across runs.
  criterion(12, [&] {
    if (argc < 2) {
      report(12, false, "no CLI binary path supplied");
      return;
    }
    const std::string cli = argv[1];
    const fs::path dir = fs::temp_directory_path() / "optomech_acceptance";
    fs::create_directories(dir);

    const std::vector<CalibrationPoint> cal{
        {0.05, 49.7}, {0.1, 99.3}, {0.2, 198.7}, {0.4, 397.4}};
    write_calibration(dir / "calib_in.csv", cal);

    bool ok = true;
    std::string detail;
    const auto twice = [&](const std::string& label, const std::string& args) {
      const fs::path o1 = dir / (label + "_1");
      const fs::path o2 = dir / (label + "_2");
      for (const fs::path& o : {o1, o2}) {
        const std::string cmd =
            "\"" + cli + "\" " + args + " --out \"" + o.string() + "\" 2>/dev/null";
        if (std::system(cmd.c_str()) != 0) {
          ok = false;
          detail += label + " exited nonzero; ";
          return o1;
        }
      }
      const std::string b1 = slurp(o1);
      if (b1.empty() || b1 != slurp(o2)) {
        ok = false;
        detail += label + " differs; ";
      }
      return o1;
    };

    const fs::path spec = twice("synth", "synth --temp 0.05 --seed 5");
    const fs::path sweep = twice("sweep_cc",
                                 "sweep --mode const-circulating --power 9e-7 "
                                 "--from -3.5e6 --to 3.5e6 --points 61");
    twice("sweep_ci",
          "sweep --mode const-incident --power 1.6e-8 --from -3.5e6 --to -0.5e6 "
          "--points 41");
    twice("cool", "cool --powers 7.3e-7,2e-6,7.3e-6");
    if (ok) {
      twice("fit_spectrum", "fit-spectrum --input \"" + spec.string() + "\"");
      twice("calibrate_g",
            "calibrate-g --input \"" + (dir / "calib_in.csv").string() + "\"");
      twice("fit_sweep", "fit-sweep --input \"" + sweep.string() + "\"");
    }
    report(12, ok, ok ? "7 commands byte-identical across repeat runs" : detail);
  });

  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 12 criteria passed\n";
  return 0;
}
