#include "optomech/cubic.hpp"

#include <algorithm>
#include <cmath>

namespace optomech {

namespace {

double polish(double x, double a, double b, double c) {
  // A couple of Newton steps; cheap insurance against cancellation in the
  // closed forms. Skipped when the derivative is tiny (double root at a fold),
  // where Newton would take a wild step.
  for (int i = 0; i < 2; ++i) {
    const double f = ((x + a) * x + b) * x + c;
    const double df = (3.0 * x + 2.0 * a) * x + b;
    if (df == 0.0) break;
    const double step = f / df;
    if (!std::isfinite(step) || std::abs(step) > 0.1 * (1.0 + std::abs(x))) break;
    x -= step;
  }
  return x;
}

}  // namespace

std::vector<double> solve_cubic(double a, double b, double c) {
  // Depressed form t^3 + p t + q with x = t - a/3.
  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a / 27.0 - b / 3.0) * a + c;

  std::vector<double> roots;
  const double half_q = 0.5 * q;
  const double discr = half_q * half_q + p * p * p / 27.0;

  if (discr > 0.0) {
    // One real root (Cardano). Pick the larger-magnitude cube root first to
    // avoid subtracting nearly equal quantities.
    const double s = std::sqrt(discr);
    const double u = std::cbrt(-half_q + s);
    const double v = std::cbrt(-half_q - s);
    roots.push_back(u + v - shift);
  } else if (p == 0.0) {
    roots.push_back(std::cbrt(-q) - shift);  // triple root
  } else {
    // Three real roots (possibly two coincident): trigonometric form,
    // angles (phi + 2 pi k) / 3.
    const double r = std::sqrt(-p / 3.0);
    double cos_arg = -half_q / (r * r * r);
    cos_arg = std::clamp(cos_arg, -1.0, 1.0);
    const double phi = std::acos(cos_arg);
    for (int k = 0; k < 3; ++k)
      roots.push_back(2.0 * r * std::cos((phi + 6.283185307179586 * k) / 3.0) - shift);
  }

  for (double& x : roots) x = polish(x, a, b, c);
  std::sort(roots.begin(), roots.end());
  // Collapse numerically coincident roots from the trig branch at a fold.
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double u, double v) {
                            const double scale = std::max({std::abs(u), std::abs(v), 1e-300});
                            return std::abs(u - v) <= 1e-9 * scale;
                          }),
              roots.end());
  return roots;
}

}  // namespace optomech
