#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "optomech/experiment.hpp"
#include "optomech/kerr.hpp"
#include "optomech/params.hpp"
#include "optomech/spectra.hpp"

namespace optomech {

// Device description in file units: ordinary Hz, K, W, kg. Conversion to
// angular units happens once, in the to_*() accessors.
struct Config {
  struct System {
    double f_c = 0.0;       // cavity resonance, Hz
    double kappa = 0.0;     // cavity linewidth, Hz
    double f_m = 0.0;       // mechanical resonance, Hz
    double gamma_m0 = 0.0;  // intrinsic mechanical linewidth, Hz
    double mass = 0.0;      // kg
    double g = 0.0;         // cavity pull per displacement, Hz/m
    double T_0 = 0.0;       // bath temperature, K
    double T_p = 0.0;       // drive field temperature, K
  } system;
  struct Kerr {
    double K = 0.0;  // resonance pull per photon, Hz
  } kerr;
  struct Heating {
    double alpha = 0.0;
    double beta = 1.0;
    double eta = 0.0;
    bool enabled = false;
  } heating;
  struct Noise {
    double imprecision_ref = 0.0;  // m^2/Hz at P_ref
    double P_ref = 0.0;            // W
  } noise;

  SystemParams to_system() const;
  KerrCavity to_kerr() const;
  HeatingModel to_heating() const;
  NoiseModel to_noise() const;

  // One "key = value" line per field, sorted by key, shortest number format.
  // Identical physical content gives identical text regardless of the order
  // fields appeared in the file.
  std::string canonical_text() const;
  std::uint64_t digest() const;      // FNV-1a 64 of canonical_text()
  std::string digest_hex() const;
};

// Built-in description of the device all defaults refer to: 5.22 GHz cavity
// (230 kHz linewidth) dispersively coupled to a 1.525 MHz, 6.2 pg mechanical
// mode at 6.4 kHz/nm, in a 50 mK bath driven by a 10 uK cold field.
Config paper_device();

// Parses the dotted-key format ("section.field = value", '#' comments).
// Unknown keys, duplicates, malformed numbers, missing fields, and
// out-of-range values all raise ConfigError naming the key and line.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

}  // namespace optomech
