#pragma once

namespace optomech {

// SI defining constants (exact since the 2019 redefinition; hbar = h / 2pi).
struct PhysicalConstants {
  double hbar = 1.054571817e-34;  // J s
  double k_B = 1.380649e-23;      // J / K
};

inline constexpr PhysicalConstants si{};

inline constexpr double pi = 3.141592653589793;
inline constexpr double two_pi = 6.283185307179586;

}  // namespace optomech
