#include "sgev/lambert.hpp"

#include <cmath>

#include "sgev/errors.hpp"

namespace sgev {

namespace {

constexpr double inv_e = 0.36787944117144233;

// Series around the branch point x = -1/e in p = sqrt(2(1 + e x)).
double branch_point_series(double p) {
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 +
                                p * (11.0 / 72.0 +
                                     p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))));
}

double halley_polish(double w, double x) {
  for (int i = 0; i < 50; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= 1e-13 * std::max(1.0, std::abs(x))) return w;
    const double wp1 = w + 1.0;
    double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    double next = w - step;
    if (next < -1.0) next = -1.0 + 0.5 * (w + 1.0);
    if (next == w) return w;
    w = next;
  }
  const double residual = std::abs(w * std::exp(w) - x);
  if (residual <= 1e-12 * std::max(1.0, std::abs(x))) return w;
  throw ConvergenceError("lambert_w0: Halley iteration did not converge", w);
}

}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x)) throw DomainError("lambert_w0: NaN argument");
  if (x < -inv_e) {
    // Tolerate representation error right at the branch point.
    if (x > -inv_e - 1e-15) return -1.0;
    throw DomainError("lambert_w0 requires x >= -1/e");
  }
  if (x == 0.0) return 0.0;
  if (x > 1e300) return lambert_w0_exp(std::log(x));

  const double q = 1.0 + std::exp(1.0) * x;
  if (q <= 0.0) return -1.0;
  if (q < 0.01) {
    const double p = std::sqrt(2.0 * q);
    double w = branch_point_series(p);
    return halley_polish(w, x);
  }

  double w;
  if (x > 2.0) {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  } else if (x > -0.25) {
    // Pade-flavoured start near zero.
    w = x * (1.0 + x) / (1.0 + x * (2.0 + 0.5 * x));
  } else {
    const double p = std::sqrt(2.0 * q);
    w = branch_point_series(p);
  }
  return halley_polish(w, x);
}

double lambert_w0_exp(double y) {
  if (std::isnan(y)) throw DomainError("lambert_w0_exp: NaN argument");
  // Crossover strictly below ln(1e300) = 690.7, where lambert_w0 hands
  // large arguments back to this function.
  if (y <= 689.0) return lambert_w0(std::exp(y));
  // Newton on g(w) = w + log w - y; g is increasing and concave in log w,
  // so the iteration from below converges monotonically.
  double w = y - std::log(y);
  for (int i = 0; i < 50; ++i) {
    const double g = w + std::log(w) - y;
    if (std::abs(g) <= 1e-14 * std::max(1.0, std::abs(y))) return w;
    w -= g * w / (w + 1.0);
  }
  throw ConvergenceError("lambert_w0_exp: iteration did not converge", w);
}

}  // namespace sgev
