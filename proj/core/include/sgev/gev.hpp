#pragma once

namespace sgev {

// Generalized extreme value distribution.  xi = 0 selects the Gumbel
// branch exactly; small |xi| evaluations stay continuous through log1p.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
};

// Outside the support (1 + xi*(z-mu)/sigma <= 0) the cdf returns its
// limit value (0 below a lower endpoint, 1 above an upper endpoint).
double gev_cdf(double z, const GevParams& p);

// Zero outside the support.
double gev_pdf(double z, const GevParams& p);

double gev_log_pdf(double z, const GevParams& p);

}  // namespace sgev
