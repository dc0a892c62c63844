#pragma once

#include <Eigen/Core>
#include <vector>

#include "sgev/model.hpp"
#include "sgev/panel.hpp"
#include "sgev/rng.hpp"

namespace sgev {

// Gaussian proposal for one latent coordinate, centered on the exact
// mode of likelihood x prior via the principal Lambert W branch:
//   mean     = mu_tilde + g*tau - sigma * W0(g^2 exp((mu_tilde - x)/sigma + g^2))
//   variance = tau^2 / (g^2 + 1),  g = tau / sigma.
// The W argument is handled in log space, so large exponents cannot
// overflow.
struct ProposalParams {
  double mean = 0.0;
  double variance = 0.0;
};

ProposalParams proposal_params(double x, double mu_tilde, double sigma_i, double tau);

// Importance weight of one particle-step in log space:
// log p(x | mu) + log p(mu | history) - log q(mu).
inline double log_weight_increment(double log_obs, double log_trans, double log_prop) {
  return log_obs + log_trans - log_prop;
}

// Weighted particle set at one time step.  histories[k] is the particle's
// own L x P lag window (row 0 = one step back).
struct ParticleEnsemble {
  Eigen::MatrixXd particles;               // N x P
  Eigen::VectorXd weights;                 // N, sums to 1
  std::vector<Eigen::MatrixXd> histories;  // N entries, L x P
  double ess = 0.0;
};

double effective_sample_size(const Eigen::VectorXd& weights);

// Ancestor indices for a systematic draw: one uniform offset, N evenly
// spaced pointers through the cumulative weights.
std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, Rng& rng);

struct PfStepResult {
  ParticleEnsemble ensemble;  // post-resample state: uniform weights, ess = N
  Eigen::MatrixXd proposed;   // N x P pre-resample proposals
  Eigen::VectorXd weights;    // pre-resample normalized weights
  double ess = 0.0;           // pre-resample effective sample size
  double min_weight = 0.0;
  double max_weight = 0.0;
};

// One filter step: propose each coordinate from its Lambert-W Gaussian,
// weight by observation x transition / proposal, normalize by
// log-sum-exp, resample systematically.  Deterministic given step_rng:
// particle k, series i draws from substream k*P + i regardless of
// evaluation order.
PfStepResult pf_step(const ParticleEnsemble& ensemble, const Eigen::VectorXd& x_t,
                     const SparseGevModel& model, Eigen::Index t_index,
                     const Rng& step_rng);

// Posterior moments the M-step consumes.  Sums run over the modeled
// steps t = L..T-1; lagged vectors use the flatten_history layout.
struct PosteriorSummary {
  Eigen::MatrixXd mean_mu;        // T x P, E[mu_t^i | x_{1:t}]
  Eigen::MatrixXd second_moment;  // T x P, E[(mu_t^i)^2 | x_{1:t}]
  Eigen::MatrixXd lag_gram;       // (P L) x (P L): sum_t E[r_t r_t^T]
  Eigen::MatrixXd target_lag_cross;  // P x (P L): row i = sum_t E[mu_t^i r_t^T]
  Eigen::VectorXd lag_sum;        // sum_t E[r_t]
  Eigen::VectorXd target_sum;     // sum_t E[mu_t^i]
  Eigen::VectorXd target_sq_sum;  // sum_t E[(mu_t^i)^2]
  int n_steps = 0;                // T - L
  int lag = 0;
  // Weighted posterior samples per modeled step, for expectations of
  // non-linear functions of mu (the exponential likelihood term).
  std::vector<Eigen::MatrixXd> mu_samples;  // each N x P
  std::vector<Eigen::VectorXd> mu_weights;  // each N
};

struct FilterDiagnostics {
  std::vector<double> ess;         // pre-resample, per modeled step
  std::vector<double> min_weight;
  std::vector<double> max_weight;
};

struct FilterResult {
  PosteriorSummary summary;
  FilterDiagnostics diagnostics;
  ParticleEnsemble last;
};

// Runs the filter over the panel.  Initial latent values for t < L are
// drawn per particle from N(x_t^i, tau^2).  Moments are accumulated from
// the weighted pre-resample ensemble at each step; resampling follows
// every step.
FilterResult run_filter(const TimeSeriesPanel& panel, const SparseGevModel& model,
                        int n_particles, const Rng& rng);

std::string diagnostics_to_csv(const FilterDiagnostics& diag, int lag);

}  // namespace sgev
