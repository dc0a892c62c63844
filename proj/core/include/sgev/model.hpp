#pragma once

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "sgev/graph.hpp"
#include "sgev/panel.hpp"
#include "sgev/rng.hpp"

namespace sgev {

// Latent-location dynamic linear model with Gumbel observations:
//   mu_t^i = c^i + sum_{l,j} beta^i_{j,l} mu^j_{t-l} + N(0, tau^2)
//   x_t^i ~ Gumbel(mu_t^i, sigma^i)
// beta[i] is a P x L matrix: row j, column l-1 holds beta^i_{j,l}.
// Zero coefficients are stored as exact zeros, so support extraction is
// unambiguous.
struct SparseGevModel {
  int P = 0;
  int L = 1;
  Eigen::VectorXd c;
  std::vector<Eigen::MatrixXd> beta;
  Eigen::VectorXd sigma;
  double tau = 0.1;
};

void validate_model(const SparseGevModel& model);

// History orientation: row l-1 (0-based) holds the lag-l values, so row 0
// is one step back.
double transition_mean(const SparseGevModel& model, int i,
                       const Eigen::MatrixXd& mu_history);

// All P transition means at once.
Eigen::VectorXd transition_means(const SparseGevModel& model,
                                 const Eigen::MatrixXd& mu_history);

// Lagged history flattened to a vector: index l*P + j holds the lag-(l+1)
// value of series j.  This layout is shared with the regression design.
Eigen::VectorXd flatten_history(const Eigen::MatrixXd& mu_history);

// Draws T steps forward from the given initial lag window.  Per step the
// latent noise draws come first (series 0..P-1), then the observation
// draws, so output is reproducible from the seed alone.
std::pair<TimeSeriesPanel, LatentPath> simulate(const SparseGevModel& model,
                                                Eigen::Index T,
                                                const Eigen::MatrixXd& init,
                                                Rng& rng);

// One-step-ahead forecast: the predicted observation is the Gumbel mean
// mu_bar^i_{T+1} + euler_gamma * sigma^i, with mu_bar^i_{T+1} given by the
// noise-free transition applied to the last L latent means.
Eigen::VectorXd predict_next(const SparseGevModel& model,
                             const Eigen::MatrixXd& mu_history);

// Edge j -> i present iff any lag coefficient beta^i_{j,l} is non-zero;
// score is max_l |beta^i_{j,l}|.
DependencyGraph extract_graph(const SparseGevModel& model);

GroundTruthGraph ground_truth(const SparseGevModel& model);

// Spectral radius of the companion matrix of the lag polynomial; < 1
// means the latent recursion is stationary.
double companion_spectral_radius(const SparseGevModel& model);

// Synthetic benchmark recipe: P series of length T at lag L; offsets
// drawn from a normal with the given mean and variance; random sparse
// coefficient support (expected in-degree edges per target, one uniform
// lag each, magnitudes uniform in [-coef_max, coef_max]) rescaled until
// the companion spectral radius drops below radius_cap.  Generation
// burns in burn_in steps before emitting T samples.
struct SyntheticRecipe {
  int P = 9;
  int T = 40;
  int L = 2;
  double c_mean = 0.2;
  double c_variance = 0.05;
  double tau = 0.31622776601683794;  // sqrt(0.1)
  double sigma = 0.05;
  double expected_in_edges = 2.0;
  double coef_max = 0.8;
  double radius_cap = 0.95;
  int burn_in = 20;
};

SparseGevModel draw_recipe_model(const SyntheticRecipe& recipe, Rng& rng);

struct SyntheticDataset {
  TimeSeriesPanel panel;
  LatentPath latent;
  GroundTruthGraph truth;
  SparseGevModel model;
};

SyntheticDataset make_synthetic_dataset(const SyntheticRecipe& recipe, Rng rng);

// n_datasets independent draws of the recipe; dataset d uses the
// substream keyed d.  Every draw is guaranteed at least one present and
// one absent off-diagonal pair (degenerate supports are redrawn).
std::vector<SyntheticDataset> make_synthetic_suite(int n_datasets, Rng rng,
                                                   const SyntheticRecipe& recipe = {});

nlohmann::json model_to_json(const SparseGevModel& model);
SparseGevModel model_from_json(const nlohmann::json& j);

}  // namespace sgev
