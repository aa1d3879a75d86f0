#include "optomech/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optomech/config.hpp"
#include "optomech/csv.hpp"
#include "optomech/errors.hpp"
#include "optomech/experiment.hpp"
#include "optomech/fitting.hpp"
#include "optomech/numfmt.hpp"
#include "optomech/physics.hpp"
#include "optomech/spectra.hpp"

namespace optomech {

namespace {

using nlohmann::json;

Config resolve_config(const std::string& flag_path, std::string& source) {
  if (!flag_path.empty()) {
    source = flag_path;
    return load_config(flag_path);
  }
  if (const char* env = std::getenv("OPTOMECH_CONFIG"); env != nullptr && *env != '\0') {
    source = env;
    return load_config(env);
  }
  source = "builtin:paper_device";
  return paper_device();
}

std::vector<double> parse_power_list(const std::string& arg) {
  std::vector<double> powers;
  std::size_t start = 0;
  while (start <= arg.size()) {
    const std::size_t comma = arg.find(',', start);
    const std::string tok =
        arg.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto v = parse_double(tok);
    if (!v) throw std::invalid_argument("--powers: invalid number '" + tok + "'");
    powers.push_back(*v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return powers;
}

std::vector<double> parse_decades(const std::string& arg) {
  const std::size_t c1 = arg.find(':');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos : arg.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("--decades: expected LO:HI:N (log10 watts)");
  const auto lo = parse_double(arg.substr(0, c1));
  const auto hi = parse_double(arg.substr(c1 + 1, c2 - c1 - 1));
  const auto n = parse_double(arg.substr(c2 + 1));
  if (!lo || !hi || !n || *n < 2.0 || *n != static_cast<double>(static_cast<int>(*n)))
    throw std::invalid_argument("--decades: expected LO:HI:N with integer N >= 2");
  const int count = static_cast<int>(*n);
  std::vector<double> powers;
  for (int i = 0; i < count; ++i) {
    const double e = *lo + (*hi - *lo) * i / (count - 1);
    powers.push_back(std::pow(10.0, e));
  }
  return powers;
}

std::vector<double> linspace_angular(double from_hz, double to_hz, int points) {
  if (points < 1) throw std::invalid_argument("--points must be >= 1");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    grid.push_back(two_pi * from_hz);
    return grid;
  }
  for (int i = 0; i < points; ++i)
    grid.push_back(two_pi * (from_hz + (to_hz - from_hz) * i / (points - 1)));
  return grid;
}

json fit_to_json(const FitResult& fit, const char* kind) {
  json j;
  j["schema_version"] = 1;
  j["kind"] = kind;
  j["converged"] = fit.converged;
  j["n_iter"] = fit.n_iter;
  j["message"] = fit.message;
  j["residual_norm"] = fit.residual_norm;
  json params, sigmas;
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = fit.params[i];
    sigmas[fit.names[i]] = fit.sigmas[i];
  }
  j["params"] = params;
  j["sigmas"] = sigmas;
  return j;
}

struct FitFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_converged(const FitResult& fit) {
  if (!fit.converged)
    throw FitFailure("fit did not converge: " + fit.message +
                     " (n_iter=" + std::to_string(fit.n_iter) + ")");
}

}  // namespace

int run_command(int argc, const char* const argv[]) {
  const auto t0 = std::chrono::steady_clock::now();

  CLI::App app{"Microwave-cavity backaction simulator and estimation toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "Device description file (default: $OPTOMECH_CONFIG, else built-in "
                 "paper_device preset)");

  std::string mode, out_path, in_path, powers_arg, decades_arg;
  double power = 0.0, from_hz = 0.0, to_hz = 0.0, temp = 0.0, span = 200.0;
  int points = 0, synth_points = 1601, navg = 100;
  std::uint64_t seed = 1;
  bool free_gamma = false;

  CLI::App* sweep = app.add_subcommand("sweep", "Backaction damping and spring vs detuning");
  sweep->add_option("--mode", mode, "const-circulating or const-incident")
      ->required()
      ->check(CLI::IsMember({"const-circulating", "const-incident"}));
  sweep->add_option("--power", power, "Circulating or incident power, W")->required();
  sweep->add_option("--from", from_hz, "First detuning, Hz")->required();
  sweep->add_option("--to", to_hz, "Last detuning, Hz")->required();
  sweep->add_option("--points", points, "Grid size")->required();
  sweep->add_option("--out", out_path, "Output CSV")->required();

  CLI::App* cool = app.add_subcommand("cool", "Sideband-cooling curve vs circulating power");
  cool->add_option("--powers", powers_arg, "Comma-separated circulating powers, W");
  cool->add_option("--decades", decades_arg, "LO:HI:N log10-spaced powers, W");
  cool->add_option("--out", out_path, "Output CSV")->required();

  CLI::App* synth = app.add_subcommand("synth", "Synthesize a noisy thermal spectrum");
  synth->add_option("--temp", temp, "Mode temperature, K")->required();
  synth->add_option("--navg", navg, "Periodogram averages");
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--span", span, "Grid span centered on the mechanical line, Hz");
  synth->add_option("--points", synth_points, "Grid size");
  synth->add_option("--out", out_path, "Output CSV")->required();

  CLI::App* fitsp = app.add_subcommand("fit-spectrum", "Lorentzian fit of a spectrum CSV");
  fitsp->add_option("--input", in_path, "Spectrum CSV (displacement units)")->required();
  fitsp->add_option("--out", out_path, "Output JSON")->required();

  CLI::App* calg = app.add_subcommand("calibrate-g", "Coupling from area-vs-temperature data");
  calg->add_option("--input", in_path, "Calibration CSV")->required();
  calg->add_option("--out", out_path, "Output JSON")->required();

  CLI::App* fitsw = app.add_subcommand("fit-sweep", "Circulating power from a detuning sweep");
  fitsw->add_option("--input", in_path, "Sweep CSV")->required();
  fitsw->add_option("--out", out_path, "Output JSON")->required();
  fitsw->add_flag("--free-gamma", free_gamma, "Also fit the intrinsic linewidth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  for (int i = 0; i < argc; ++i) {
    if (i) command += ' ';
    command += argv[i];
  }

  std::vector<std::string> outputs;
  std::vector<std::uint64_t> seeds;
  Config cfg;
  std::string cfg_source;
  try {
    cfg = resolve_config(config_path, cfg_source);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  auto report = [&](int code) {
    json rep;
    rep["command"] = command;
    rep["config"] = cfg_source;
    rep["config_digest"] = cfg.digest_hex();
    rep["outputs"] = outputs;
    rep["schema_version"] = 1;
    rep["seeds"] = seeds;
    rep["version"] = toolkit_version;
    rep["wall_time_s"] = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0).count();
    std::cerr << rep.dump() << "\n";
    return code;
  };

  const SystemParams sys = cfg.to_system();
  try {
    if (*sweep) {
      const std::vector<double> grid = linspace_angular(from_hz, to_hz, points);
      SweepResult result;
      if (mode == "const-circulating")
        result = sweep_constant_circulating(power, grid, sys);
      else
        result = sweep_constant_incident(power, grid, cfg.to_kerr(), sys);
      write_sweep(out_path, result);
      outputs.push_back(out_path);
    } else if (*cool) {
      if (powers_arg.empty() == decades_arg.empty())
        throw std::invalid_argument("cool: give exactly one of --powers or --decades");
      const std::vector<double> powers =
          powers_arg.empty() ? parse_decades(decades_arg) : parse_power_list(powers_arg);
      const CoolingResult result =
          cooling_curve(powers, sys, cfg.to_heating(), cfg.to_noise());
      write_cooling(out_path, result);
      outputs.push_back(out_path);
    } else if (*synth) {
      if (synth_points < 8) throw std::invalid_argument("synth: --points must be >= 8");
      if (!(span > 0.0)) throw std::invalid_argument("synth: --span must be positive");
      std::vector<double> grid(static_cast<std::size_t>(synth_points));
      for (int i = 0; i < synth_points; ++i)
        grid[static_cast<std::size_t>(i)] =
            cfg.system.f_m - span / 2.0 + span * i / (synth_points - 1);
      const SpectrumModel model{sys.mech, temp, sys.mech.gamma_m0,
                                cfg.noise.imprecision_ref};
      const SpectrumTrace trace = synth_spectrum(model, grid, navg, seed);
      write_spectrum(out_path, trace);
      outputs.push_back(out_path);
      seeds.push_back(seed);
    } else if (*fitsp) {
      const SpectrumTrace trace = read_spectrum(in_path, SpectrumUnit::displacement);
      const FitResult fit = fit_lorentzian(trace);
      require_converged(fit);
      const double area = fit.param("area");
      if (area < 0.0) throw FitFailure("fitted area is negative");
      json j = fit_to_json(fit, "fit_lorentzian");
      j["derived"]["temperature_K"] = temperature_from_area(area, sys.mech);
      j["derived"]["gamma_m_hz"] = fit.param("fwhm_hz");
      atomic_write_file(out_path, j.dump(2) + "\n");
      outputs.push_back(out_path);
    } else if (*calg) {
      const std::vector<CalibrationPoint> pts = read_calibration(in_path);
      const CalibrationResult cal = calibrate_coupling(pts, sys.mech);
      json j;
      j["schema_version"] = 1;
      j["kind"] = "calibration";
      j["g_hz_per_m"] = cal.g / two_pi;
      j["g_sigma_hz_per_m"] = cal.g_sigma / two_pi;
      j["g_rad_per_s_per_m"] = cal.g;
      j["slope_hz2_per_K"] = cal.slope;
      j["slope_sigma_hz2_per_K"] = cal.slope_sigma;
      j["intercept_hz2"] = cal.intercept;
      j["intercept_sigma_hz2"] = cal.intercept_sigma;
      atomic_write_file(out_path, j.dump(2) + "\n");
      outputs.push_back(out_path);
    } else if (*fitsw) {
      const SweepResult data = read_sweep(in_path);
      std::vector<SweepPoint> pts;
      pts.reserve(data.rows.size());
      for (const auto& row : data.rows)
        pts.push_back(SweepPoint{row.detuning_hz, row.gamma_m_hz, row.Omega_hz});
      SweepFitOptions opts;
      opts.free_gamma_m0 = free_gamma;
      const FitResult fit = fit_detuning_sweep(pts, sys, opts);
      require_converged(fit);
      json j = fit_to_json(fit, "fit_sweep");
      j["params"]["P_c_W"] = fit.param("P_c");
      j["params"].erase("P_c");
      j["sigmas"]["P_c_W"] = fit.sigma("P_c");
      j["sigmas"].erase("P_c");
      atomic_write_file(out_path, j.dump(2) + "\n");
      outputs.push_back(out_path);
    }
  } catch (const FitFailure& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return report(3);
  } catch (const NoPeakError& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return report(3);
  } catch (const CalibrationError& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return report(3);
  } catch (const InsensitivityError& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return report(3);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return report(2);
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return report(2);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return report(2);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return report(2);
  }
  return report(0);
}

}  // namespace optomech
