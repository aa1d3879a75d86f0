#pragma once

#include <stdexcept>

namespace optomech {

// Thermometry requested while the mode is self-oscillating (gamma_m <= 0).
struct RegenerativeError : std::domain_error {
  using std::domain_error::domain_error;
};

// A spectrum shows no peak resolvable above its noise floor.
struct NoPeakError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The supplied data carry no information about the parameter being estimated.
struct InsensitivityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace optomech
