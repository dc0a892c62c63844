#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "sgev/graph.hpp"
#include "sgev/gumbel.hpp"
#include "sgev/math_util.hpp"
#include "sgev/panel.hpp"

namespace sgev {

// Lagged linear predictor fitted on observed values.
struct LinearModel {
  int P = 0;
  int L = 1;
  Eigen::VectorXd c;
  std::vector<Eigen::MatrixXd> coefs;  // per target, P x L

  // recent is L x P, row 0 = most recent observation.
  Eigen::VectorXd predict(const Eigen::MatrixXd& recent) const;
};

struct GrangerFit {
  DependencyGraph graph;
  LinearModel model;
};

// Per-target L1-penalized regression of each series on the lagged panel;
// edge score is the max-lag absolute coefficient.
GrangerFit lasso_granger(const TimeSeriesPanel& panel, double lambda, int lag);

// Kozachenko-Leonenko differential entropy (nats) with max-norm balls:
// H = psi(n) - psi(k) + (d/n) sum_i ln(2 eps_i).  Exact duplicate rows
// are jittered at 1e-10 scale before the neighbor queries.
double knn_entropy(const Eigen::MatrixXd& samples, int k);

struct TeConfig {
  int k = 4;   // neighbor count for the entropy estimator
  int lag = 2;
};

// Directed information transfer src -> dst:
//   [H(x_t, own past) - H(own past)]
// - [H(x_t, own past, src past) - H(own past, src past)].
double transfer_entropy(const TimeSeriesPanel& panel, int src, int dst,
                        const TeConfig& cfg);

// Same assembly with an injected joint-entropy estimator, so exact
// plug-in estimators can drive it on discrete toy processes.
using EntropyFn = std::function<double(const Eigen::MatrixXd&)>;
double transfer_entropy_with(const TimeSeriesPanel& panel, int src, int dst, int lag,
                             const EntropyFn& entropy);

// All ordered pairs scored by transfer entropy clipped at zero.
DependencyGraph te_graph(const TimeSeriesPanel& panel, const TeConfig& cfg);

// Nearest-neighbor regression on the lagged values of the top TE-ranked
// parents (plus the target's own past).
struct TePredictor {
  int P = 0;
  int L = 1;
  int neighbors = 5;
  std::vector<std::vector<int>> features;  // per target: series used as regressors
  Eigen::MatrixXd train;                   // training panel values

  Eigen::VectorXd predict(const Eigen::MatrixXd& recent) const;
};

struct TeFit {
  DependencyGraph graph;
  TePredictor predictor;
};

TeFit te_method(const TimeSeriesPanel& panel, const TeConfig& cfg, int top_parents = 3,
                int regression_neighbors = 5);

enum class MarginalKind { gev, empirical };

// Per-series marginal distribution for the copula transform.
struct Marginal {
  MarginalKind kind = MarginalKind::gev;
  GumbelParams gumbel;
  std::vector<double> sorted;  // empirical support

  double cdf(double x) const;
  double quantile(double q) const;
};

Marginal fit_marginal(std::span<const double> samples, MarginalKind kind);

struct CopulaFit {
  DependencyGraph graph;
  LinearModel u_model;             // structure learned in the transformed space
  std::vector<Marginal> marginals;

  // Predicts the next observation: transform the recent window, apply the
  // linear model in the transformed space, map back through the marginal.
  Eigen::VectorXd predict(const Eigen::MatrixXd& recent) const;
};

// Gaussian copula baseline: map each series through its marginal cdf and
// the standard normal quantile (cdf values clamped to
// [1e-10, 1 - 1e-10]), then run the same lagged Lasso on the transformed
// panel.
CopulaFit copula_method(const TimeSeriesPanel& panel, double lambda, int lag,
                        MarginalKind marginal = MarginalKind::gev);

}  // namespace sgev
