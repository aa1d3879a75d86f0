#pragma once

#include <vector>

namespace optomech {

// Real roots of x^3 + a x^2 + b x + c = 0, ascending, with one Newton polish
// step per root. Uses the trigonometric form for three real roots and
// Cardano's formula otherwise.
std::vector<double> solve_cubic(double a, double b, double c);

}  // namespace optomech
