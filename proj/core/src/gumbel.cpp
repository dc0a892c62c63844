#include "sgev/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sgev/errors.hpp"

namespace sgev {

namespace {

void validate(const GumbelParams& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || p.sigma <= 0.0) {
    throw DomainError("Gumbel parameters require finite mu and sigma > 0");
  }
}

}  // namespace

double gumbel_log_pdf(double z, const GumbelParams& p) {
  validate(p);
  if (std::isnan(z)) throw DomainError("gumbel_log_pdf: NaN argument");
  const double u = (z - p.mu) / p.sigma;
  return -std::log(p.sigma) - u - std::exp(-u);
}

double gumbel_pdf(double z, const GumbelParams& p) {
  return std::exp(gumbel_log_pdf(z, p));
}

double gumbel_cdf(double z, const GumbelParams& p) {
  validate(p);
  if (std::isnan(z)) throw DomainError("gumbel_cdf: NaN argument");
  const double u = (z - p.mu) / p.sigma;
  return std::exp(-std::exp(-u));
}

double gumbel_quantile(double q, const GumbelParams& p) {
  validate(p);
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("gumbel_quantile requires q in (0,1)");
  }
  return p.mu - p.sigma * std::log(-std::log(q));
}

double gumbel_sample(const GumbelParams& p, Rng& rng) {
  validate(p);
  return p.mu - p.sigma * std::log(-std::log(rng.uniform()));
}

namespace {

struct ProfileSums {
  double s0, s1, s2;
};

// Sums over exp(-(z - z_min)/sigma); shifting by the minimum keeps every
// exponent non-positive.
ProfileSums profile_sums(std::span<const double> z, double z_min, double sigma) {
  ProfileSums s{0.0, 0.0, 0.0};
  for (double zi : z) {
    const double u = zi - z_min;
    const double w = std::exp(-u / sigma);
    s.s0 += w;
    s.s1 += u * w;
    s.s2 += u * u * w;
  }
  return s;
}

}  // namespace

GumbelParams fit_gumbel_mle(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 3) {
    throw DegenerateDataError("fit_gumbel_mle requires at least 3 samples");
  }
  double z_min = samples[0], z_max = samples[0], mean = 0.0;
  for (double z : samples) {
    if (!std::isfinite(z)) throw DomainError("fit_gumbel_mle: non-finite sample");
    z_min = std::min(z_min, z);
    z_max = std::max(z_max, z);
    mean += z;
  }
  mean /= static_cast<double>(n);
  const double spread = z_max - z_min;
  if (spread <= 1e-13 * std::max(1.0, std::abs(z_max))) {
    throw DegenerateDataError("fit_gumbel_mle: all samples equal");
  }
  double var = 0.0;
  for (double z : samples) var += (z - mean) * (z - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);

  // Profile likelihood score in sigma; increasing with derivative >= 1.
  auto score = [&](double sigma) {
    const ProfileSums s = profile_sums(samples, z_min, sigma);
    const double f = sigma - mean + z_min + s.s1 / s.s0;
    const double fp = 1.0 + (s.s2 * s.s0 - s.s1 * s.s1) / (sigma * sigma * s.s0 * s.s0);
    return std::pair<double, double>(f, fp);
  };

  // Method-of-moments start.
  double sigma = sd * std::sqrt(6.0) / std::numbers::pi;
  double lo = 1e-12 * std::max(1.0, spread);
  double hi = sigma;
  while (score(hi).first < 0.0) {
    hi *= 2.0;
    if (hi > 1e12 * std::max(1.0, spread)) {
      throw ConvergenceError("fit_gumbel_mle: no bracket for sigma", hi);
    }
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(mean) + sd);
  bool converged = false;
  for (int i = 0; i < 100; ++i) {
    auto [f, fp] = score(sigma);
    if (std::abs(f) <= tol) {
      converged = true;
      break;
    }
    if (f > 0.0) {
      hi = std::min(hi, sigma);
    } else {
      lo = std::max(lo, sigma);
    }
    double next = sigma - f / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == sigma) {
      converged = true;
      break;
    }
    sigma = next;
  }
  if (!converged && std::abs(score(sigma).first) > 1e-8) {
    throw ConvergenceError(
        "fit_gumbel_mle: sigma iteration stalled at " + std::to_string(sigma), sigma);
  }
  const ProfileSums s = profile_sums(samples, z_min, sigma);
  const double mu = z_min - sigma * std::log(s.s0 / static_cast<double>(n));
  return GumbelParams{mu, sigma};
}

}  // namespace sgev
