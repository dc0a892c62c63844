#pragma once

#include <cmath>
#include <span>

namespace sgev {

inline constexpr double euler_gamma = 0.5772156649015329;

double digamma(double x);

// Standard normal cdf, accurate in both tails.
double normal_cdf(double z);

// Inverse standard normal cdf on (0,1); round-trip error <= 1e-9
// for q in [1e-12, 1 - 1e-12].
double normal_cdf_inv(double q);

double normal_log_pdf(double z, double mean, double sd);

double log_sum_exp(std::span<const double> v);

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace sgev
