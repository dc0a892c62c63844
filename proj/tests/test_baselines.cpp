#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "sgev/baselines.hpp"
#include "sgev/errors.hpp"
#include "sgev/evaluation.hpp"
#include "sgev/math_util.hpp"
#include "sgev/rng.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace {

constexpr double kGaussianEntropy = 1.418938533204672742;  // 0.5 ln(2 pi e)

Eigen::MatrixXd gaussian_matrix(sgev::Rng& rng, int n, int d) {
  Eigen::MatrixXd m(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = rng.normal();
  return m;
}

// Bivariate VAR(1) panel where series 1 drives series 2.
struct VarCase {
  sgev::TimeSeriesPanel panel;
  Eigen::Matrix2d a_rowwise;  // x_t = A x_{t-1} + e with row = target
  double noise_sd;
};

VarCase driven_pair(sgev::Rng& rng, Eigen::Index T) {
  VarCase vc;
  Eigen::MatrixXd coef(2, 2);  // coef(j, i): series j -> series i
  coef << 0.5, 0.6,
          0.0, 0.2;
  vc.noise_sd = 0.4;
  vc.panel = testgen::var_panel(rng, {coef}, Eigen::Vector2d::Zero(), vc.noise_sd, T, 200);
  vc.a_rowwise = coef.transpose();
  return vc;
}

}  // namespace

TEST_CASE("knn entropy nails closed forms") {
  sgev::Rng rng(3001);
  const int n = 50000;

  Eigen::MatrixXd uniform(n, 1);
  for (int i = 0; i < n; ++i) uniform(i, 0) = rng.uniform();
  CHECK(std::abs(sgev::knn_entropy(uniform, 4) - 0.0) < 0.02);

  Eigen::MatrixXd gauss = gaussian_matrix(rng, n, 1);
  CHECK(std::abs(sgev::knn_entropy(gauss, 4) - kGaussianEntropy) < 0.03);

  Eigen::MatrixXd gauss2 = gaussian_matrix(rng, 20000, 2);
  CHECK(std::abs(sgev::knn_entropy(gauss2, 4) - 2.0 * kGaussianEntropy) < 0.06);
}

TEST_CASE("knn entropy shifts exactly under uniform scaling") {
  sgev::Rng rng(3002);
  const Eigen::MatrixXd base = gaussian_matrix(rng, 2000, 2);
  const double h0 = sgev::knn_entropy(base, 4);
  const Eigen::MatrixXd scaled = 3.0 * base;
  const double h1 = sgev::knn_entropy(scaled, 4);
  CHECK(std::abs(h1 - (h0 + 2.0 * std::log(3.0))) < 1e-9);

  // Translation leaves it untouched.
  const Eigen::MatrixXd moved = base.array() + 7.5;
  CHECK(std::abs(sgev::knn_entropy(moved, 4) - h0) < 1e-9);
}

TEST_CASE("knn entropy is invariant to row order") {
  sgev::Rng rng(3003);
  const Eigen::MatrixXd base = gaussian_matrix(rng, 500, 2);
  const double h0 = sgev::knn_entropy(base, 5);
  const std::vector<int> perm = testgen::random_permutation(rng, 500);
  Eigen::MatrixXd shuffled(500, 2);
  for (int r = 0; r < 500; ++r) shuffled.row(r) = base.row(perm[static_cast<std::size_t>(r)]);
  CHECK(std::abs(sgev::knn_entropy(shuffled, 5) - h0) < 1e-9);
}

TEST_CASE("knn entropy handles duplicates and rejects degenerate input") {
  sgev::Rng rng(3004);
  Eigen::MatrixXd dup = gaussian_matrix(rng, 40, 1);
  for (int r = 0; r < 20; ++r) dup(r + 20, 0) = dup(r, 0);  // every point twice
  const double h = sgev::knn_entropy(dup, 3);
  CHECK(std::isfinite(h));

  CHECK_THROWS_AS(sgev::knn_entropy(Eigen::MatrixXd::Constant(30, 1, 2.0), 3),
                  sgev::DegenerateDataError);
  CHECK_THROWS_AS(sgev::knn_entropy(gaussian_matrix(rng, 4, 1), 4),
                  sgev::DegenerateDataError);
  CHECK_THROWS_AS(sgev::knn_entropy(gaussian_matrix(rng, 40, 1), 0), sgev::DomainError);
  Eigen::MatrixXd bad = gaussian_matrix(rng, 20, 1);
  bad(3, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sgev::knn_entropy(bad, 3), sgev::DomainError);
}

TEST_CASE("transfer entropy blocks have the documented shapes") {
  sgev::Rng rng(3005);
  const sgev::TimeSeriesPanel panel = testgen::noise_panel(rng, 30, 3);
  std::vector<Eigen::Index> cols_seen;
  std::vector<Eigen::Index> rows_seen;
  const auto spy = [&](const Eigen::MatrixXd& block) {
    cols_seen.push_back(block.cols());
    rows_seen.push_back(block.rows());
    return sgev::knn_entropy(block, 3);
  };
  const int lag = 2;
  sgev::transfer_entropy_with(panel, 0, 2, lag, spy);
  // Four evaluations: (x, past_dst), (past_dst), (x, past_dst, past_src),
  // (past_dst, past_src).
  REQUIRE(cols_seen.size() == 4);
  CHECK(cols_seen[0] == 1 + lag);
  CHECK(cols_seen[1] == lag);
  CHECK(cols_seen[2] == 1 + 2 * lag);
  CHECK(cols_seen[3] == 2 * lag);
  for (Eigen::Index r : rows_seen) CHECK(r == 30 - lag);
}

TEST_CASE("transfer entropy with plug-in entropy matches the markov closed form") {
  // dst copies src's previous sign and flips it with probability 0.1, so
  // TE(src -> dst) = ln 2 - H(0.1) and TE(dst -> src) = 0.
  sgev::Rng rng(3006);
  const int T = 6000;
  sgev::TimeSeriesPanel panel;
  panel.values.resize(T, 2);
  panel.names = {"src", "dst"};
  double prev_src = 1.0;
  for (int t = 0; t < T; ++t) {
    const double src = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double flip = rng.uniform() < 0.1 ? -1.0 : 1.0;
    panel.values(t, 0) = src;
    panel.values(t, 1) = prev_src * flip;
    prev_src = src;
  }

  const auto plug_in = [](const Eigen::MatrixXd& block) {
    Eigen::MatrixXi coded(block.rows(), block.cols());
    for (Eigen::Index r = 0; r < block.rows(); ++r)
      for (Eigen::Index c = 0; c < block.cols(); ++c)
        coded(r, c) = block(r, c) > 0.0 ? 1 : 0;
    return oracle::plug_in_entropy(coded);
  };

  const double expected =
      std::log(2.0) - (-0.1 * std::log(0.1) - 0.9 * std::log(0.9));
  const double forward = sgev::transfer_entropy_with(panel, 0, 1, 1, plug_in);
  const double backward = sgev::transfer_entropy_with(panel, 1, 0, 1, plug_in);
  CHECK(std::abs(forward - expected) < 0.03);
  CHECK(std::abs(backward) < 0.02);
}

TEST_CASE("knn transfer entropy tracks the gaussian var closed form") {
  sgev::Rng rng(3007);
  const VarCase vc = driven_pair(rng, 6000);
  const Eigen::Matrix2d q = vc.noise_sd * vc.noise_sd * Eigen::Matrix2d::Identity();

  const double closed_fwd = oracle::gaussian_var1_te(vc.a_rowwise, q, 0, 1, 1);
  const double closed_bwd = oracle::gaussian_var1_te(vc.a_rowwise, q, 1, 0, 1);
  CHECK(closed_fwd > 0.15);           // the design genuinely couples 1 -> 2
  CHECK(std::abs(closed_bwd) < 1e-9); // upper-triangular dynamics

  sgev::TeConfig cfg;
  cfg.k = 4;
  cfg.lag = 1;
  const double est_fwd = sgev::transfer_entropy(vc.panel, 0, 1, cfg);
  const double est_bwd = sgev::transfer_entropy(vc.panel, 1, 0, cfg);
  CHECK(std::abs(est_fwd - closed_fwd) < 0.07);
  CHECK(std::abs(est_bwd - closed_bwd) < 0.07);
  CHECK(est_fwd > est_bwd + 0.1);
}

TEST_CASE("te graph scores every ordered pair without self loops") {
  sgev::Rng rng(3008);
  const sgev::TimeSeriesPanel panel = testgen::noise_panel(rng, 40, 3);
  sgev::TeConfig cfg;
  cfg.k = 3;
  cfg.lag = 1;
  const sgev::DependencyGraph g = sgev::te_graph(panel, cfg);
  CHECK(g.P == 3);
  CHECK(!g.includes_self_loops);
  CHECK(g.edges.size() == 6);
  for (const auto& e : g.edges) {
    CHECK(e.src != e.dst);
    CHECK(e.score >= 0.0);
  }
  CHECK_THROWS_AS(sgev::transfer_entropy(panel, 1, 1, cfg), sgev::DomainError);

  const sgev::TimeSeriesPanel tiny = panel.window(0, 2);
  CHECK_THROWS_AS(sgev::transfer_entropy(tiny, 0, 1, cfg), sgev::DimensionError);
}

TEST_CASE("lasso granger ranks a var support perfectly") {
  sgev::Rng rng(3010);
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(4, 4);  // coef(j, i): j -> i
  coef(0, 0) = 0.5;
  coef(0, 1) = 0.6;
  coef(2, 3) = -0.55;
  coef(3, 3) = 0.3;
  const sgev::TimeSeriesPanel panel =
      testgen::var_panel(rng, {coef}, Eigen::Vector4d::Zero(), 0.3, 500, 100);

  const sgev::GrangerFit fit = sgev::lasso_granger(panel, 0.5, 1);
  sgev::GroundTruthGraph truth = sgev::make_truth(4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      if (coef(j, i) != 0.0) truth.set(j, i, true);

  // Self pairs participate here: the support includes a self lag.
  const double auc = oracle::brute_force_auc(fit.graph, truth, true);
  CHECK(auc == 1.0);
  CHECK(sgev::edge_auc(fit.graph, truth, true) == 1.0);
}

TEST_CASE("granger predictions track the autoregression") {
  sgev::Rng rng(3011);
  Eigen::MatrixXd coef(2, 2);
  coef << 0.6, 0.5,
          0.0, 0.25;
  const sgev::TimeSeriesPanel panel =
      testgen::var_panel(rng, {coef}, Eigen::Vector2d::Constant(0.3), 0.2, 400, 100);

  const sgev::GrangerFit fit = sgev::lasso_granger(panel, 0.05, 1);
  double err_sq = 0.0;
  int count = 0;
  for (Eigen::Index t = 300; t < 399; ++t) {
    Eigen::MatrixXd recent(1, 2);
    recent.row(0) = panel.values.row(t);
    const Eigen::VectorXd pred = fit.model.predict(recent);
    const Eigen::VectorXd actual = panel.values.row(t + 1).transpose();
    err_sq += (pred - actual).squaredNorm();
    count += 2;
  }
  const double rmse = std::sqrt(err_sq / count);
  CHECK(rmse < 1.3 * 0.2);
  CHECK(rmse > 0.5 * 0.2);
}

TEST_CASE("granger penalty sweep empties the graph") {
  sgev::Rng rng(3012);
  const VarCase vc = driven_pair(rng, 300);
  const sgev::GrangerFit dense = sgev::lasso_granger(vc.panel, 0.01, 2);
  CHECK(!dense.graph.edges.empty());
  const sgev::GrangerFit empty = sgev::lasso_granger(vc.panel, 1e7, 2);
  CHECK(empty.graph.edges.empty());

  CHECK_THROWS_AS(sgev::lasso_granger(vc.panel, -1.0, 1), sgev::DomainError);
  CHECK_THROWS_AS(sgev::lasso_granger(vc.panel, 0.1, 0), sgev::DimensionError);
  const sgev::TimeSeriesPanel tiny = vc.panel.window(0, 2);
  CHECK_THROWS_AS(sgev::lasso_granger(tiny, 0.1, 2), sgev::DimensionError);
}

TEST_CASE("granger edge scores mirror the fitted coefficients") {
  sgev::Rng rng(3013);
  const VarCase vc = driven_pair(rng, 400);
  const sgev::GrangerFit fit = sgev::lasso_granger(vc.panel, 0.2, 2);
  for (const auto& e : fit.graph.edges) {
    REQUIRE(e.lag_weights.size() == 2);
    double max_mag = 0.0;
    for (int l = 0; l < 2; ++l) {
      const double w = fit.model.coefs[static_cast<std::size_t>(e.dst)](e.src, l);
      CHECK(w == e.lag_weights[static_cast<std::size_t>(l)]);
      max_mag = std::max(max_mag, std::abs(w));
    }
    CHECK(e.score == max_mag);
    CHECK(e.score > 0.0);
  }
}

TEST_CASE("te method fits a usable nearest-neighbour predictor") {
  sgev::Rng rng(3014);
  const VarCase vc = driven_pair(rng, 400);
  sgev::TeConfig cfg;
  cfg.k = 4;
  cfg.lag = 1;
  const sgev::TeFit fit = sgev::te_method(vc.panel, cfg, 2, 5);
  CHECK(fit.graph.edges.size() == 2);

  Eigen::MatrixXd recent(1, 2);
  recent.row(0) = vc.panel.values.row(vc.panel.steps() - 1);
  const Eigen::VectorXd pred = fit.predictor.predict(recent);
  REQUIRE(pred.size() == 2);
  CHECK(pred.allFinite());
  // Predictions live inside the observed value range.
  for (int i = 0; i < 2; ++i) {
    CHECK(pred[i] >= vc.panel.values.col(i).minCoeff() - 1e-12);
    CHECK(pred[i] <= vc.panel.values.col(i).maxCoeff() + 1e-12);
  }
}

TEST_CASE("empirical marginal round trips interior quantiles") {
  sgev::Rng rng(3015);
  std::vector<double> samples(400);
  for (double& s : samples) s = rng.normal();
  const sgev::Marginal m = sgev::fit_marginal(samples, sgev::MarginalKind::empirical);
  for (double q : {0.05, 0.3, 0.5, 0.77, 0.95}) {
    const double x = m.quantile(q);
    CHECK(std::abs(m.cdf(x) - q) < 0.01);
  }
  // cdf is monotone on the sample range.
  double prev = -1.0;
  for (double x = -3.0; x <= 3.0; x += 0.1) {
    const double c = m.cdf(x);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("gev marginal reduces to the gumbel fit") {
  sgev::Rng rng(3016);
  std::vector<double> samples(2000);
  for (double& s : samples) s = sgev::gumbel_sample({0.4, 0.2}, rng);
  const sgev::Marginal m = sgev::fit_marginal(samples, sgev::MarginalKind::gev);
  const sgev::GumbelParams direct = sgev::fit_gumbel_mle(samples);
  CHECK(m.gumbel.mu == direct.mu);
  CHECK(m.gumbel.sigma == direct.sigma);
  for (double q : {0.1, 0.5, 0.9}) {
    CHECK(std::abs(m.cdf(m.quantile(q)) - q) < 1e-10);
  }
}

TEST_CASE("copula support agrees with granger on gaussian dynamics") {
  sgev::Rng rng(3017);
  const VarCase vc = driven_pair(rng, 600);
  const sgev::CopulaFit cop = sgev::copula_method(vc.panel, 0.3, 1,
                                                  sgev::MarginalKind::empirical);
  sgev::GroundTruthGraph truth = sgev::make_truth(2);
  truth.set(0, 0, true);
  truth.set(0, 1, true);
  truth.set(1, 1, true);
  const double auc = sgev::edge_auc(cop.graph, truth, true);
  CHECK(auc >= 0.9);
}

TEST_CASE("copula predictions stay inside the empirical range") {
  sgev::Rng rng(3018);
  const VarCase vc = driven_pair(rng, 300);
  const sgev::CopulaFit cop = sgev::copula_method(vc.panel, 0.05, 2,
                                                  sgev::MarginalKind::empirical);
  Eigen::MatrixXd recent(2, 2);
  recent.row(0) = vc.panel.values.row(vc.panel.steps() - 1);
  recent.row(1) = vc.panel.values.row(vc.panel.steps() - 2);
  const Eigen::VectorXd pred = cop.predict(recent);
  REQUIRE(pred.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(pred[i] >= vc.panel.values.col(i).minCoeff() - 1e-9);
    CHECK(pred[i] <= vc.panel.values.col(i).maxCoeff() + 1e-9);
  }
}

TEST_CASE("copula with gumbel marginals remains rank-faithful") {
  sgev::Rng rng(3019);
  // Gumbel noise VAR keeps the marginal family well specified.
  const int T = 500;
  sgev::TimeSeriesPanel panel;
  panel.values.resize(T, 2);
  panel.names = {"a", "b"};
  double prev0 = 0.0, prev1 = 0.0;
  for (int t = 0; t < T; ++t) {
    const double e0 = sgev::gumbel_sample({0.0, 0.3}, rng);
    const double e1 = sgev::gumbel_sample({0.0, 0.3}, rng);
    const double v0 = 0.5 * prev0 + e0;
    const double v1 = 0.6 * prev0 + 0.2 * prev1 + e1;
    panel.values(t, 0) = v0;
    panel.values(t, 1) = v1;
    prev0 = v0;
    prev1 = v1;
  }
  const sgev::CopulaFit cop = sgev::copula_method(panel, 0.3, 1, sgev::MarginalKind::gev);
  sgev::GroundTruthGraph truth = sgev::make_truth(2);
  truth.set(0, 0, true);
  truth.set(0, 1, true);
  truth.set(1, 1, true);
  CHECK(sgev::edge_auc(cop.graph, truth, true) >= 0.9);
}
