#include "support/generators.hpp"

#include <cmath>

#include "sgev/errors.hpp"

namespace testgen {

sgev::ExpectedLassoProblem lasso_instance(sgev::Rng& rng, int d, int n,
                                          double moment_noise) {
  Eigen::MatrixXd r(n, d);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < d; ++j) r(t, j) = rng.normal();

  Eigen::VectorXd truth = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) {
    if (rng.uniform() < 0.5) truth(j) = 2.0 * rng.uniform() - 1.0;
  }
  const double intercept = 2.0 * rng.uniform() - 1.0;

  Eigen::VectorXd y(n);
  for (int t = 0; t < n; ++t)
    y(t) = intercept + r.row(t).dot(truth) + 0.3 * rng.normal();

  sgev::ExpectedLassoProblem p = sgev::make_problem_from_data(y, r);
  if (moment_noise > 0.0) {
    p.gram.diagonal().array() += moment_noise * n;
    p.target_sq_sum += moment_noise * n;
  }
  return p;
}

sgev::SparseGevModel random_model(sgev::Rng& rng, int P, int L, double edge_prob,
                                  double radius_cap) {
  sgev::SparseGevModel model;
  model.P = P;
  model.L = L;
  model.c.resize(P);
  model.sigma.resize(P);
  model.beta.assign(static_cast<std::size_t>(P), Eigen::MatrixXd::Zero(P, L));
  for (int i = 0; i < P; ++i) {
    model.c(i) = 0.4 * rng.normal();
    model.sigma(i) = 0.05 + 0.1 * rng.uniform();
    for (int j = 0; j < P; ++j) {
      for (int l = 0; l < L; ++l) {
        if (rng.uniform() < edge_prob)
          model.beta[static_cast<std::size_t>(i)](j, l) = 1.6 * rng.uniform() - 0.8;
      }
    }
  }
  model.tau = 0.05 + 0.1 * rng.uniform();
  double radius = sgev::companion_spectral_radius(model);
  while (radius >= radius_cap && radius > 0.0) {
    const double shrink = 0.9 * radius_cap / radius;
    for (auto& b : model.beta) b *= shrink;
    radius = sgev::companion_spectral_radius(model);
  }
  return model;
}

sgev::TimeSeriesPanel noise_panel(sgev::Rng& rng, Eigen::Index T, int P) {
  sgev::TimeSeriesPanel panel;
  panel.values.resize(T, P);
  for (Eigen::Index t = 0; t < T; ++t)
    for (int i = 0; i < P; ++i) panel.values(t, i) = rng.normal();
  panel.names.resize(static_cast<std::size_t>(P));
  for (int i = 0; i < P; ++i) panel.names[static_cast<std::size_t>(i)] = "s" + std::to_string(i + 1);
  return panel;
}

sgev::TimeSeriesPanel var_panel(sgev::Rng& rng, const std::vector<Eigen::MatrixXd>& coefs,
                                const Eigen::VectorXd& intercept, double noise_sd,
                                Eigen::Index T, Eigen::Index burn_in) {
  const auto L = static_cast<Eigen::Index>(coefs.size());
  if (L < 1) throw sgev::DimensionError("var_panel needs at least one lag matrix");
  const Eigen::Index P = intercept.size();
  const Eigen::Index total = T + burn_in;
  Eigen::MatrixXd values(total, P);
  for (Eigen::Index t = 0; t < total; ++t) {
    Eigen::VectorXd row = intercept;
    for (Eigen::Index l = 1; l <= L && l <= t; ++l) {
      for (Eigen::Index i = 0; i < P; ++i)
        for (Eigen::Index j = 0; j < P; ++j)
          row(i) += coefs[static_cast<std::size_t>(l - 1)](j, i) * values(t - l, j);
    }
    for (Eigen::Index i = 0; i < P; ++i) row(i) += noise_sd * rng.normal();
    values.row(t) = row.transpose();
  }
  sgev::TimeSeriesPanel panel;
  panel.values = values.bottomRows(T);
  panel.names.resize(static_cast<std::size_t>(P));
  for (Eigen::Index i = 0; i < P; ++i)
    panel.names[static_cast<std::size_t>(i)] = "s" + std::to_string(i + 1);
  return panel;
}

std::vector<int> random_permutation(sgev::Rng& rng, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(std::min(j, i))]);
  }
  return perm;
}

}  // namespace testgen
