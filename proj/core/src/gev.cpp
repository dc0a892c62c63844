#include "sgev/gev.hpp"

#include <cmath>
#include <limits>

#include "sgev/errors.hpp"
#include "sgev/gumbel.hpp"

namespace sgev {

namespace {

void validate(const GevParams& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || !std::isfinite(p.xi) ||
      p.sigma <= 0.0) {
    throw DomainError("GEV parameters require finite fields and sigma > 0");
  }
}

}  // namespace

double gev_cdf(double z, const GevParams& p) {
  validate(p);
  if (std::isnan(z)) throw DomainError("gev_cdf: NaN argument");
  if (p.xi == 0.0) return gumbel_cdf(z, GumbelParams{p.mu, p.sigma});
  const double s = (z - p.mu) / p.sigma;
  const double t = 1.0 + p.xi * s;
  if (t <= 0.0) {
    // xi > 0: lower endpoint; xi < 0: upper endpoint.
    return p.xi > 0.0 ? 0.0 : 1.0;
  }
  return std::exp(-std::exp(-std::log1p(p.xi * s) / p.xi));
}

double gev_log_pdf(double z, const GevParams& p) {
  validate(p);
  if (std::isnan(z)) throw DomainError("gev_log_pdf: NaN argument");
  if (p.xi == 0.0) return gumbel_log_pdf(z, GumbelParams{p.mu, p.sigma});
  const double s = (z - p.mu) / p.sigma;
  const double t = 1.0 + p.xi * s;
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  const double log_t = std::log1p(p.xi * s);
  return -std::log(p.sigma) - (1.0 / p.xi + 1.0) * log_t - std::exp(-log_t / p.xi);
}

double gev_pdf(double z, const GevParams& p) {
  const double lp = gev_log_pdf(z, p);
  return std::isinf(lp) ? 0.0 : std::exp(lp);
}

}  // namespace sgev
