#include "sgev/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>

#include "sgev/errors.hpp"
#include "sgev/kdtree.hpp"
#include "sgev/lasso.hpp"
#include "sgev/rng.hpp"

namespace sgev {

namespace {

void check_lagged_fit_inputs(const TimeSeriesPanel& panel, double lambda, int lag) {
  validate_panel(panel);
  if (lag < 1) throw DimensionError("lag order must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw DomainError("penalty must be finite and non-negative");
  if (panel.steps() <= lag)
    throw DimensionError("lagged regression needs more than " + std::to_string(lag) +
                         " time steps, got " + std::to_string(panel.steps()));
}

// Shared core of the Granger and copula fits: per-target coordinate
// descent on a (possibly transformed) panel.
GrangerFit fit_lagged_lasso(const Eigen::MatrixXd& values, double lambda, int lag) {
  const int P = static_cast<int>(values.cols());
  const Eigen::Index T = values.rows();
  const Eigen::Index n = T - lag;

  Eigen::MatrixXd Y(n, P);
  Eigen::MatrixXd R(n, static_cast<Eigen::Index>(P) * lag);
  for (Eigen::Index t = lag; t < T; ++t) {
    Y.row(t - lag) = values.row(t);
    for (int l = 0; l < lag; ++l)
      R.block(t - lag, static_cast<Eigen::Index>(l) * P, 1, P) = values.row(t - 1 - l);
  }

  GrangerFit fit;
  fit.model.P = P;
  fit.model.L = lag;
  fit.model.c = Eigen::VectorXd::Zero(P);
  fit.model.coefs.assign(static_cast<std::size_t>(P), Eigen::MatrixXd::Zero(P, lag));
  fit.graph.P = P;
  fit.graph.includes_self_loops = true;

  for (int i = 0; i < P; ++i) {
    ExpectedLassoProblem problem = make_problem_from_data(Y.col(i), R);
    LassoSolution sol = solve_expected_lasso(problem, lambda);
    fit.model.c(i) = sol.intercept;
    Eigen::MatrixXd& b = fit.model.coefs[static_cast<std::size_t>(i)];
    for (int l = 0; l < lag; ++l)
      for (int j = 0; j < P; ++j) b(j, l) = sol.beta(static_cast<Eigen::Index>(l) * P + j);
    for (int j = 0; j < P; ++j) {
      double best = 0.0;
      bool any = false;
      for (int l = 0; l < lag; ++l) {
        if (b(j, l) != 0.0) {
          any = true;
          best = std::max(best, std::abs(b(j, l)));
        }
      }
      if (!any) continue;
      GraphEdge e;
      e.src = j;
      e.dst = i;
      e.score = best;
      e.lag_weights.assign(static_cast<std::size_t>(lag), 0.0);
      for (int l = 0; l < lag; ++l) e.lag_weights[static_cast<std::size_t>(l)] = b(j, l);
      fit.graph.edges.push_back(std::move(e));
    }
  }
  return fit;
}

}  // namespace

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& recent) const {
  if (recent.rows() != L || recent.cols() != P)
    throw DimensionError("recent window must be L x P");
  Eigen::VectorXd out(P);
  for (int i = 0; i < P; ++i) {
    double acc = c(i);
    const Eigen::MatrixXd& b = coefs[static_cast<std::size_t>(i)];
    for (int l = 0; l < L; ++l)
      for (int j = 0; j < P; ++j) acc += b(j, l) * recent(l, j);
    out(i) = acc;
  }
  return out;
}

GrangerFit lasso_granger(const TimeSeriesPanel& panel, double lambda, int lag) {
  check_lagged_fit_inputs(panel, lambda, lag);
  return fit_lagged_lasso(panel.values, lambda, lag);
}

double knn_entropy(const Eigen::MatrixXd& samples, int k) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (d < 1) throw DimensionError("entropy estimation needs at least one dimension");
  if (k < 1) throw DomainError("neighbor count must be at least 1");
  if (n <= k)
    throw DegenerateDataError("entropy estimation needs more than k samples, got n=" +
                              std::to_string(n) + " with k=" + std::to_string(k));
  if (!samples.allFinite()) throw DomainError("entropy samples must be finite");

  // Exact row duplicates are separated by tiny deterministic jitter; a
  // fully collapsed sample set has no meaningful differential entropy.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (samples(a, c) < samples(b, c)) return true;
      if (samples(a, c) > samples(b, c)) return false;
    }
    return a < b;
  });
  const auto rows_equal = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < d; ++c)
      if (samples(a, c) != samples(b, c)) return false;
    return true;
  };

  Eigen::MatrixXd points = samples;
  bool any_distinct = false;
  Rng jitter_rng(0x6a177e8bd1e5u);
  for (std::size_t idx = 1; idx < order.size(); ++idx) {
    if (!rows_equal(order[idx - 1], order[idx])) {
      any_distinct = true;
      continue;
    }
    for (Eigen::Index c = 0; c < d; ++c)
      points(order[idx], c) += (2.0 * jitter_rng.uniform() - 1.0) * 1e-10;
  }
  if (!any_distinct) throw DegenerateDataError("all entropy samples are identical");

  KdTreeMax tree(points);
  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eps = tree.kth_neighbor_distance(i, k);
    if (!(eps > 0.0))
      throw DegeneracyError("zero neighbor distance in entropy estimate");
    log_sum += std::log(2.0 * eps);
  }
  return digamma(static_cast<double>(n)) - digamma(static_cast<double>(k)) +
         static_cast<double>(d) / static_cast<double>(n) * log_sum;
}

namespace {

// Columns: optionally x_t of the target, then L lags of each listed
// series, most recent first.  Rows cover t = lag..T-1.
Eigen::MatrixXd te_block(const TimeSeriesPanel& panel, int lag, bool with_present,
                         int present_series, const std::vector<int>& past_series) {
  const Eigen::Index T = panel.steps();
  const Eigen::Index n = T - lag;
  const Eigen::Index d =
      (with_present ? 1 : 0) + static_cast<Eigen::Index>(past_series.size()) * lag;
  Eigen::MatrixXd out(n, d);
  for (Eigen::Index t = lag; t < T; ++t) {
    Eigen::Index col = 0;
    if (with_present) out(t - lag, col++) = panel.values(t, present_series);
    for (int s : past_series)
      for (int l = 1; l <= lag; ++l) out(t - lag, col++) = panel.values(t - l, s);
  }
  return out;
}

}  // namespace

double transfer_entropy_with(const TimeSeriesPanel& panel, int src, int dst, int lag,
                             const EntropyFn& entropy) {
  validate_panel(panel);
  const int P = static_cast<int>(panel.values.cols());
  if (src < 0 || src >= P || dst < 0 || dst >= P)
    throw DimensionError("series index out of range");
  if (src == dst) throw DomainError("transfer entropy needs two distinct series");
  if (lag < 1) throw DimensionError("lag order must be at least 1");
  if (panel.steps() <= lag + 1)
    throw DimensionError("transfer entropy needs more than lag+1 time steps");

  const double h_joint = entropy(te_block(panel, lag, true, dst, {dst}));
  const double h_past = entropy(te_block(panel, lag, false, dst, {dst}));
  const double h_joint_full = entropy(te_block(panel, lag, true, dst, {dst, src}));
  const double h_past_full = entropy(te_block(panel, lag, false, dst, {dst, src}));
  return (h_joint - h_past) - (h_joint_full - h_past_full);
}

double transfer_entropy(const TimeSeriesPanel& panel, int src, int dst,
                        const TeConfig& cfg) {
  return transfer_entropy_with(panel, src, dst, cfg.lag,
                               [&cfg](const Eigen::MatrixXd& m) {
                                 return knn_entropy(m, cfg.k);
                               });
}

DependencyGraph te_graph(const TimeSeriesPanel& panel, const TeConfig& cfg) {
  validate_panel(panel);
  const int P = static_cast<int>(panel.values.cols());
  DependencyGraph graph;
  graph.P = P;
  graph.includes_self_loops = false;
  for (int src = 0; src < P; ++src) {
    for (int dst = 0; dst < P; ++dst) {
      if (src == dst) continue;
      GraphEdge e;
      e.src = src;
      e.dst = dst;
      e.score = std::max(0.0, transfer_entropy(panel, src, dst, cfg));
      graph.edges.push_back(std::move(e));
    }
  }
  return graph;
}

Eigen::VectorXd TePredictor::predict(const Eigen::MatrixXd& recent) const {
  if (recent.rows() != L || recent.cols() != P)
    throw DimensionError("recent window must be L x P");
  const Eigen::Index T = train.rows();
  const Eigen::Index n = T - L;
  if (n < 1) throw DimensionError("predictor has no lagged training rows");
  Eigen::VectorXd out(P);
  for (int i = 0; i < P; ++i) {
    const std::vector<int>& feats = features[static_cast<std::size_t>(i)];
    Eigen::VectorXd query(static_cast<Eigen::Index>(feats.size()) * L);
    {
      Eigen::Index col = 0;
      for (int s : feats)
        for (int l = 0; l < L; ++l) query(col++) = recent(l, s);
    }
    // Squared distance from the query to every lagged training row.
    std::vector<std::pair<double, Eigen::Index>> ranked;
    ranked.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index t = L; t < T; ++t) {
      double dist = 0.0;
      Eigen::Index col = 0;
      for (int s : feats) {
        for (int l = 1; l <= L; ++l) {
          const double diff = train(t - l, s) - query(col++);
          dist += diff * diff;
        }
      }
      ranked.emplace_back(dist, t);
    }
    const Eigen::Index use = std::min<Eigen::Index>(neighbors, n);
    std::partial_sort(ranked.begin(), ranked.begin() + use, ranked.end());
    double acc = 0.0;
    for (Eigen::Index r = 0; r < use; ++r) acc += train(ranked[static_cast<std::size_t>(r)].second, i);
    out(i) = acc / static_cast<double>(use);
  }
  return out;
}

TeFit te_method(const TimeSeriesPanel& panel, const TeConfig& cfg, int top_parents,
                int regression_neighbors) {
  if (top_parents < 0) throw DomainError("parent count must be non-negative");
  if (regression_neighbors < 1)
    throw DomainError("regression neighbor count must be at least 1");
  TeFit fit;
  fit.graph = te_graph(panel, cfg);
  const int P = fit.graph.P;
  fit.predictor.P = P;
  fit.predictor.L = cfg.lag;
  fit.predictor.neighbors = regression_neighbors;
  fit.predictor.train = panel.values;
  fit.predictor.features.assign(static_cast<std::size_t>(P), {});
  for (int i = 0; i < P; ++i) {
    // Own past always enters; parents join by descending score.
    std::vector<std::pair<double, int>> ranked;
    for (int j = 0; j < P; ++j) {
      if (j == i) continue;
      const double s = fit.graph.score(j, i);
      if (s > 0.0) ranked.emplace_back(-s, j);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int>& feats = fit.predictor.features[static_cast<std::size_t>(i)];
    feats.push_back(i);
    for (std::size_t r = 0; r < ranked.size() && r < static_cast<std::size_t>(top_parents); ++r)
      feats.push_back(ranked[r].second);
  }
  return fit;
}

double Marginal::cdf(double x) const {
  if (kind == MarginalKind::gev) return gumbel_cdf(x, gumbel);
  const auto n = static_cast<double>(sorted.size());
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  const auto rank = static_cast<double>(it - sorted.begin());
  return rank / (n + 1.0);
}

double Marginal::quantile(double q) const {
  if (!(q > 0.0) || !(q < 1.0))
    throw DomainError("quantile argument must lie strictly inside (0,1)");
  if (kind == MarginalKind::gev) return gumbel_quantile(q, gumbel);
  const auto n = static_cast<double>(sorted.size());
  // Inverse of the rank/(n+1) grading, linear between order statistics.
  const double r = std::clamp(q * (n + 1.0), 1.0, n);
  const double lo = std::floor(r);
  const auto i = static_cast<std::size_t>(lo) - 1;
  if (r == lo || i + 1 >= sorted.size()) return sorted[i];
  return sorted[i] + (r - lo) * (sorted[i + 1] - sorted[i]);
}

Marginal fit_marginal(std::span<const double> samples, MarginalKind kind) {
  Marginal m;
  m.kind = kind;
  if (kind == MarginalKind::gev) {
    m.gumbel = fit_gumbel_mle(samples);
    return m;
  }
  if (samples.empty()) throw DegenerateDataError("empirical marginal needs samples");
  m.sorted.assign(samples.begin(), samples.end());
  std::sort(m.sorted.begin(), m.sorted.end());
  return m;
}

namespace {

constexpr double kCdfClampLo = 1e-10;
constexpr double kCdfClampHi = 1.0 - 1e-10;

double to_gaussian(const Marginal& m, double x) {
  return normal_cdf_inv(std::clamp(m.cdf(x), kCdfClampLo, kCdfClampHi));
}

double from_gaussian(const Marginal& m, double u) {
  return m.quantile(std::clamp(normal_cdf(u), kCdfClampLo, kCdfClampHi));
}

}  // namespace

Eigen::VectorXd CopulaFit::predict(const Eigen::MatrixXd& recent) const {
  const int P = u_model.P;
  if (recent.rows() != u_model.L || recent.cols() != P)
    throw DimensionError("recent window must be L x P");
  Eigen::MatrixXd u_recent(recent.rows(), recent.cols());
  for (Eigen::Index l = 0; l < recent.rows(); ++l)
    for (int j = 0; j < P; ++j)
      u_recent(l, j) = to_gaussian(marginals[static_cast<std::size_t>(j)], recent(l, j));
  const Eigen::VectorXd u_hat = u_model.predict(u_recent);
  Eigen::VectorXd out(P);
  for (int i = 0; i < P; ++i)
    out(i) = from_gaussian(marginals[static_cast<std::size_t>(i)], u_hat(i));
  return out;
}

CopulaFit copula_method(const TimeSeriesPanel& panel, double lambda, int lag,
                        MarginalKind marginal) {
  check_lagged_fit_inputs(panel, lambda, lag);
  const int P = static_cast<int>(panel.values.cols());
  const Eigen::Index T = panel.steps();

  CopulaFit fit;
  fit.marginals.reserve(static_cast<std::size_t>(P));
  Eigen::MatrixXd U(T, P);
  for (int j = 0; j < P; ++j) {
    std::vector<double> column(panel.values.col(j).data(),
                               panel.values.col(j).data() + T);
    fit.marginals.push_back(fit_marginal(column, marginal));
    for (Eigen::Index t = 0; t < T; ++t)
      U(t, j) = to_gaussian(fit.marginals.back(), panel.values(t, j));
  }

  GrangerFit inner = fit_lagged_lasso(U, lambda, lag);
  fit.graph = std::move(inner.graph);
  fit.u_model = std::move(inner.model);
  return fit;
}

}  // namespace sgev
