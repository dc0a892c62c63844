#pragma once

#include <span>

#include "sgev/rng.hpp"

namespace sgev {

// Location/scale of a Gumbel (type-I extreme value) distribution.
// The mode equals mu; the mean is mu + euler_gamma * sigma.
struct GumbelParams {
  double mu = 0.0;
  double sigma = 1.0;
};

double gumbel_log_pdf(double z, const GumbelParams& p);
double gumbel_pdf(double z, const GumbelParams& p);
double gumbel_cdf(double z, const GumbelParams& p);

// Inverse cdf; q must lie strictly inside (0,1).
double gumbel_quantile(double q, const GumbelParams& p);

double gumbel_sample(const GumbelParams& p, Rng& rng);

// Maximum-likelihood fit.  Requires at least 3 samples, not all equal.
// Solves the 1-D profile likelihood in sigma by Newton-Raphson with a
// method-of-moments start and bisection fallback; mu has a closed form
// given sigma.
GumbelParams fit_gumbel_mle(std::span<const double> samples);

}  // namespace sgev
