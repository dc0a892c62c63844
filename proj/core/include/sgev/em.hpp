#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sgev/model.hpp"
#include "sgev/panel.hpp"
#include "sgev/particle_filter.hpp"

namespace sgev {

struct EmConfig {
  double lambda = 0.3;    // L1 weight on the latent regression coefficients
  int max_iters = 15;
  double tol = 1e-4;      // relative change of the penalized objective
  int particles = 1000;
  double tau = 0.3;       // transition noise std, fixed (never estimated)
  int lag = 2;
  std::uint64_t seed = 1;
};

struct EmIterRecord {
  double q = 0.0;
  double penalized_q = 0.0;
  double max_delta_beta = 0.0;
  Eigen::VectorXd sigma;
};

struct EmTrace {
  std::vector<EmIterRecord> iterations;
};

std::string trace_to_csv(const EmTrace& trace);

struct EmFit {
  SparseGevModel model;
  EmTrace trace;
  FilterDiagnostics diagnostics;   // from the final E-step
  Eigen::MatrixXd latent_mean;     // filtered posterior means, final E-step
};

// Monte Carlo estimate of the expected complete-data log-likelihood
// (additive constants dropped): for each series,
//   -T' ln sigma - sum_t E[(x - mu)/sigma + exp(-(x - mu)/sigma)
//                          + (mu - c - b.r)^2 / (2 tau^2)].
// The exponential term uses the stored posterior samples; the quadratic
// term is exact in the posterior cross-moments.
double q_value(const PosteriorSummary& summary, const TimeSeriesPanel& panel,
               const SparseGevModel& model);

// q minus the L1 penalty expressed in the same units: lambda/(2 tau^2)
// times the coefficient l1 norm.
double penalized_q_value(double q, const SparseGevModel& model, double lambda);

// Per-series expected Lasso: coefficients and unpenalized offsets.
std::pair<std::vector<Eigen::MatrixXd>, Eigen::VectorXd> m_step_beta_c(
    const PosteriorSummary& summary, double lambda, int lag);

// Per-series Newton-Raphson on the scale score in log-parameterization;
// the exponential expectation is re-evaluated from the posterior samples
// at every iterate.
Eigen::VectorXd m_step_sigma(const PosteriorSummary& summary,
                             const TimeSeriesPanel& panel,
                             const Eigen::VectorXd& sigma_old);

// Starting point of the EM loop: beta = 0, per-series offset and scale
// from the marginal Gumbel fit.
SparseGevModel initial_model(const TimeSeriesPanel& panel, const EmConfig& config);

// Generalized EM: alternate the particle E-step with the (beta, c) and
// sigma M-steps until the penalized objective stalls.  The E-step of
// iteration k draws from substream k of the seed, so the whole fit is
// reproducible bit for bit.
EmFit fit(const TimeSeriesPanel& panel, const EmConfig& config);

// Forward-chaining penalty selection: fit on the first 80% of steps,
// score one-step predictions on the rest, prefer the largest lambda
// among ties.
EmConfig select_lambda(const TimeSeriesPanel& panel, const std::vector<EmConfig>& grid);

}  // namespace sgev
