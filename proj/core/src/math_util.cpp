#include "sgev/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sgev/errors.hpp"

namespace sgev {

double digamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("digamma requires x > 0");
  }
  double result = 0.0;
  // Recurrence psi(x) = psi(x+1) - 1/x until the asymptotic series applies.
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number series, terms through x^-12.
  double series = -0.5 * inv;
  double p = inv2;
  series -= p / 12.0;
  p *= inv2;
  series += p / 120.0;
  p *= inv2;
  series -= p / 252.0;
  p *= inv2;
  series += p / 240.0;
  p *= inv2;
  series -= p / 132.0;
  p *= inv2;
  series += p * 691.0 / 32760.0;
  return result + std::log(x) + series;
}

double normal_cdf(double z) {
  if (!std::isfinite(z)) {
    if (std::isnan(z)) throw DomainError("normal_cdf: NaN argument");
    return z > 0.0 ? 1.0 : 0.0;
  }
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace {

// Acklam's rational approximation to the probit function.
double probit_estimate(double q) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  if (q < plow) {
    double r = std::sqrt(-2.0 * std::log(q));
    return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  if (q > 1.0 - plow) {
    double r = std::sqrt(-2.0 * std::log(1.0 - q));
    return -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  double r = q - 0.5;
  double s = r * r;
  return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
         (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
}

}  // namespace

double normal_cdf_inv(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("normal_cdf_inv requires q in (0,1)");
  }
  double x = probit_estimate(q);
  // One Halley step against the exact cdf.
  constexpr double sqrt_two_pi = 2.5066282746310002;
  for (int i = 0; i < 2; ++i) {
    double e = normal_cdf(x) - q;
    double u = e * sqrt_two_pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double normal_log_pdf(double z, double mean, double sd) {
  if (!(sd > 0.0)) throw DomainError("normal_log_pdf requires sd > 0");
  const double u = (z - mean) / sd;
  constexpr double half_log_two_pi = 0.9189385332046727;
  return -half_log_two_pi - std::log(sd) - 0.5 * u * u;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace sgev
