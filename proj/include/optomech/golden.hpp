#pragma once

#include <stdexcept>
#include <utility>

namespace optomech {

// Golden-section search for the maximum of a unimodal function on [a, b].
// Returns {argmax, max}. Caches interior evaluations, so each iteration costs
// one function call. Stops when the bracket is narrower than xtol.
template <class F>
std::pair<double, double> golden_section_maximize(const F& f, double a, double b,
                                                  double xtol) {
  if (!(b > a)) throw std::invalid_argument("golden_section_maximize: requires b > a");
  if (!(xtol > 0.0)) throw std::invalid_argument("golden_section_maximize: requires xtol > 0");
  constexpr double inv_phi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > xtol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace optomech
