#include "sgev/em.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sgev/errors.hpp"
#include "sgev/gumbel.hpp"
#include "sgev/io.hpp"
#include "sgev/lasso.hpp"

namespace sgev {

namespace {

Eigen::VectorXd flatten_coefs(const Eigen::MatrixXd& b) {
  // Column-major P x L storage already matches the l*P + j layout.
  return Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
}

Eigen::MatrixXd unflatten_coefs(const Eigen::VectorXd& v, int P, int L) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), P, L);
}

void check_summary(const PosteriorSummary& summary, const SparseGevModel& model,
                   const TimeSeriesPanel& panel) {
  if (summary.lag != model.L || summary.mean_mu.cols() != model.P ||
      summary.mean_mu.rows() != panel.steps() || panel.series() != model.P) {
    throw DimensionError("posterior summary does not match panel/model shapes");
  }
  if (summary.n_steps != static_cast<int>(panel.steps()) - model.L) {
    throw DimensionError("posterior summary step count mismatch");
  }
}

ExpectedLassoProblem problem_for_series(const PosteriorSummary& summary, int i) {
  ExpectedLassoProblem p;
  p.gram = summary.lag_gram;
  p.cross = summary.target_lag_cross.row(i).transpose();
  p.reg_sum = summary.lag_sum;
  p.target_sum = summary.target_sum[i];
  p.target_sq_sum = summary.target_sq_sum[i];
  p.n = static_cast<double>(summary.n_steps);
  return p;
}

}  // namespace

double q_value(const PosteriorSummary& summary, const TimeSeriesPanel& panel,
               const SparseGevModel& model) {
  check_summary(summary, model, panel);
  const int P = model.P;
  const int L = model.L;
  const double tp = static_cast<double>(summary.n_steps);
  const double inv_two_tau2 = 1.0 / (2.0 * model.tau * model.tau);

  double q = 0.0;
  for (int i = 0; i < P; ++i) {
    const double sigma = model.sigma[i];
    q -= tp * std::log(sigma);

    // sum_t E[(x - mu)/sigma]
    double x_sum = 0.0;
    for (int t = L; t < panel.steps(); ++t) x_sum += panel.values(t, i);
    q -= (x_sum - summary.target_sum[i]) / sigma;

    // sum_t E[exp(-(x - mu)/sigma)] from the stored samples.
    double exp_term = 0.0;
    for (std::size_t rel = 0; rel < summary.mu_samples.size(); ++rel) {
      const double x = panel.values(L + static_cast<Eigen::Index>(rel), i);
      const auto& mus = summary.mu_samples[rel];
      const auto& w = summary.mu_weights[rel];
      double acc = 0.0;
      for (Eigen::Index k = 0; k < w.size(); ++k) {
        acc += w[k] * std::exp(-(x - mus(k, i)) / sigma);
      }
      exp_term += acc;
    }
    q -= exp_term;

    // sum_t E[(mu - c - b.r)^2] exactly from the cross-moments.
    const Eigen::VectorXd b = flatten_coefs(model.beta[static_cast<std::size_t>(i)]);
    const double c = model.c[i];
    const double quad = summary.target_sq_sum[i] -
                        2.0 * b.dot(summary.target_lag_cross.row(i).transpose()) -
                        2.0 * c * summary.target_sum[i] +
                        2.0 * c * b.dot(summary.lag_sum) +
                        b.dot(summary.lag_gram * b) + tp * c * c;
    q -= quad * inv_two_tau2;
  }
  return q;
}

double penalized_q_value(double q, const SparseGevModel& model, double lambda) {
  double l1 = 0.0;
  for (const auto& b : model.beta) l1 += b.cwiseAbs().sum();
  return q - lambda / (2.0 * model.tau * model.tau) * l1;
}

std::pair<std::vector<Eigen::MatrixXd>, Eigen::VectorXd> m_step_beta_c(
    const PosteriorSummary& summary, double lambda, int lag) {
  const int P = static_cast<int>(summary.target_sum.size());
  if (summary.lag != lag) throw DimensionError("m_step_beta_c: lag mismatch");
  std::vector<Eigen::MatrixXd> beta;
  beta.reserve(static_cast<std::size_t>(P));
  Eigen::VectorXd c(P);
  for (int i = 0; i < P; ++i) {
    const ExpectedLassoProblem problem = problem_for_series(summary, i);
    const LassoSolution sol = solve_expected_lasso(problem, lambda);
    beta.push_back(unflatten_coefs(sol.beta, P, lag));
    c[i] = sol.intercept;
  }
  return {std::move(beta), std::move(c)};
}

Eigen::VectorXd m_step_sigma(const PosteriorSummary& summary,
                             const TimeSeriesPanel& panel,
                             const Eigen::VectorXd& sigma_old) {
  const int P = static_cast<int>(summary.target_sum.size());
  const int L = summary.lag;
  if (sigma_old.size() != P) throw DimensionError("m_step_sigma: sigma size mismatch");
  if (static_cast<Eigen::Index>(summary.mu_samples.size()) !=
      static_cast<Eigen::Index>(summary.n_steps)) {
    throw DimensionError("m_step_sigma: summary lacks posterior samples");
  }

  Eigen::VectorXd sigma_new(P);
  for (int i = 0; i < P; ++i) {
    if (!(sigma_old[i] > 0.0)) throw DomainError("m_step_sigma: sigma_old must be > 0");

    // Residual samples d = x_t - mu_t with their weights.
    std::vector<double> d;
    std::vector<double> w;
    d.reserve(summary.mu_samples.size() * 16);
    w.reserve(summary.mu_samples.size() * 16);
    double d_sum = 0.0;
    double d_abs_max = 0.0;
    for (std::size_t rel = 0; rel < summary.mu_samples.size(); ++rel) {
      const double x = panel.values(L + static_cast<Eigen::Index>(rel), i);
      const auto& mus = summary.mu_samples[rel];
      const auto& weights = summary.mu_weights[rel];
      for (Eigen::Index k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) continue;
        const double dk = x - mus(k, i);
        d.push_back(dk);
        w.push_back(weights[k]);
        d_sum += weights[k] * dk;
        d_abs_max = std::max(d_abs_max, std::abs(dk));
      }
    }
    if (d_abs_max <= 1e-300) {
      throw DegeneracyError("m_step_sigma: residuals vanish for series " +
                            std::to_string(i) + ", scale is at the boundary");
    }

    // Score numerator phi(sigma) = D - T' sigma - sum w d exp(-d/sigma);
    // phi is strictly decreasing with a unique positive root unless the
    // residual spread collapses.
    const double tp = static_cast<double>(summary.n_steps);
    auto phi = [&](double sigma) {
      double acc = 0.0;
      double acc2 = 0.0;
      for (std::size_t m = 0; m < d.size(); ++m) {
        const double e = std::exp(-d[m] / sigma);
        acc += w[m] * d[m] * e;
        acc2 += w[m] * d[m] * d[m] * e;
      }
      const double value = d_sum - tp * sigma - acc;
      const double derivative = -tp - acc2 / (sigma * sigma);
      return std::pair<double, double>(value, derivative);
    };

    // Newton in theta = ln sigma with a maintained bracket.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double sigma = sigma_old[i];
    // Expand to a sign change first: phi decreases, so the root sits
    // above sigma when phi > 0 and below when phi < 0.
    {
      double v = phi(sigma).first;
      int guard = 0;
      if (v > 0.0) {
        while (v > 0.0 && guard++ < 200) {
          lo = sigma;
          sigma *= 2.0;
          v = phi(sigma).first;
        }
        hi = sigma;
      } else if (v < 0.0) {
        while (v < 0.0 && guard++ < 400) {
          hi = sigma;
          sigma *= 0.5;
          if (sigma < 1e-280) {
            throw DegeneracyError("m_step_sigma: scale driven to the boundary for series " +
                                  std::to_string(i));
          }
          v = phi(sigma).first;
        }
        lo = sigma;
      }
    }

    const double tol = 1e-10 * std::max(1.0, std::abs(d_sum));
    bool done = false;
    for (int iter = 0; iter < 200; ++iter) {
      auto [v, dv] = phi(sigma);
      if (std::abs(v) <= tol) {
        done = true;
        break;
      }
      if (v > 0.0) {
        lo = std::max(lo, sigma);
      } else {
        hi = std::min(hi, sigma);
      }
      // Newton step in log space: d phi / d theta = dv * sigma.
      double next = sigma * std::exp(-v / (dv * sigma));
      if (!(next > lo && next < hi) || !std::isfinite(next)) {
        next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * sigma;
      }
      if (next == sigma) {
        done = true;
        break;
      }
      sigma = next;
    }
    if (!done && std::abs(phi(sigma).first) > 1e-8 * std::max(1.0, std::abs(d_sum))) {
      throw ConvergenceError("m_step_sigma: score iteration stalled for series " +
                                 std::to_string(i),
                             sigma);
    }
    sigma_new[i] = sigma;
  }
  return sigma_new;
}

SparseGevModel initial_model(const TimeSeriesPanel& panel, const EmConfig& config) {
  validate_panel(panel);
  if (config.lag < 1 || panel.steps() <= config.lag) {
    throw DimensionError("initial_model: panel needs more than lag steps");
  }
  if (!(config.tau > 0.0)) throw DomainError("initial_model: tau must be > 0");
  SparseGevModel model;
  model.P = static_cast<int>(panel.series());
  model.L = config.lag;
  model.tau = config.tau;
  model.c.resize(model.P);
  model.sigma.resize(model.P);
  model.beta.assign(static_cast<std::size_t>(model.P),
                    Eigen::MatrixXd::Zero(model.P, model.L));
  for (int i = 0; i < model.P; ++i) {
    const Eigen::VectorXd col = panel.values.col(i);
    const GumbelParams marginal =
        fit_gumbel_mle({col.data(), static_cast<std::size_t>(col.size())});
    model.c[i] = marginal.mu;
    model.sigma[i] = marginal.sigma;
  }
  return model;
}

EmFit fit(const TimeSeriesPanel& panel, const EmConfig& config) {
  if (config.max_iters < 1) throw UsageError("fit: max_iters must be >= 1");
  if (!(config.tol > 0.0)) throw UsageError("fit: tol must be > 0");
  if (!(config.lambda >= 0.0)) throw UsageError("fit: lambda must be >= 0");

  EmFit out;
  out.model = initial_model(panel, config);
  const Rng base(config.seed);

  double previous_penalized = std::numeric_limits<double>::quiet_NaN();
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    FilterResult estep;
    try {
      estep = run_filter(panel, out.model, config.particles,
                         base.substream(static_cast<std::uint64_t>(iter)));
      auto [beta, c] = m_step_beta_c(estep.summary, config.lambda, config.lag);
      double max_delta = 0.0;
      for (int i = 0; i < out.model.P; ++i) {
        max_delta = std::max(max_delta,
                             (beta[static_cast<std::size_t>(i)] -
                              out.model.beta[static_cast<std::size_t>(i)])
                                 .cwiseAbs()
                                 .maxCoeff());
      }
      out.model.beta = std::move(beta);
      out.model.c = std::move(c);
      out.model.sigma = m_step_sigma(estep.summary, panel, out.model.sigma);

      const double q = q_value(estep.summary, panel, out.model);
      const double penalized = penalized_q_value(q, out.model, config.lambda);
      out.trace.iterations.push_back(
          EmIterRecord{q, penalized, max_delta, out.model.sigma});
      out.diagnostics = std::move(estep.diagnostics);
      out.latent_mean = estep.summary.mean_mu;

      if (iter >= 2) {
        const double rel = std::abs(penalized - previous_penalized) /
                           std::max(std::abs(previous_penalized), 1e-12);
        if (rel < config.tol) break;
      }
      previous_penalized = penalized;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::numeric) {
        throw ConvergenceError("EM iteration " + std::to_string(iter) +
                                   " failed: " + e.what(),
                               static_cast<double>(iter));
      }
      throw;
    }
  }
  return out;
}

EmConfig select_lambda(const TimeSeriesPanel& panel, const std::vector<EmConfig>& grid) {
  if (grid.empty()) throw UsageError("select_lambda: empty grid");
  validate_panel(panel);
  const Eigen::Index T = panel.steps();

  double best_rmse = std::numeric_limits<double>::infinity();
  double best_lambda = -1.0;
  const EmConfig* best = nullptr;
  std::string failures;
  for (const EmConfig& config : grid) {
    const Eigen::Index train = std::max<Eigen::Index>(config.lag + 2,
                                                      (T * 8) / 10);
    if (train >= T) {
      throw DimensionError("select_lambda: panel too short for a holdout split");
    }
    try {
      const EmFit fitted = fit(panel.window(0, train), config);
      // Filtered means over the whole panel are causal: the row at time
      // t-1 only sees observations up to t-1.
      const FilterResult filtered =
          run_filter(panel, fitted.model, config.particles,
                     Rng(config.seed).substream(0x5e1ec7));
      double err = 0.0;
      Eigen::Index count = 0;
      for (Eigen::Index t = train; t < T; ++t) {
        Eigen::MatrixXd history(config.lag, panel.series());
        for (int l = 0; l < config.lag; ++l) {
          history.row(l) = filtered.summary.mean_mu.row(t - 1 - l);
        }
        const Eigen::VectorXd prediction = predict_next(fitted.model, history);
        err += (prediction - panel.values.row(t).transpose()).squaredNorm();
        count += panel.series();
      }
      const double rmse = std::sqrt(err / static_cast<double>(count));
      // Ties break toward the sparser (larger lambda) model.
      if (rmse < best_rmse - 1e-12 ||
          (std::abs(rmse - best_rmse) <= 1e-12 && config.lambda > best_lambda)) {
        best_rmse = rmse;
        best_lambda = config.lambda;
        best = &config;
      }
    } catch (const Error& e) {
      failures += std::string(failures.empty() ? "" : "; ") + "lambda=" +
                  format_double(config.lambda) + ": " + e.what();
    }
  }
  if (best == nullptr) {
    throw ConvergenceError("select_lambda: every candidate failed (" + failures + ")");
  }
  return *best;
}

std::string trace_to_csv(const EmTrace& trace) {
  std::string out = "iter,q,penalized_q,max_dbeta";
  const Eigen::Index P = trace.iterations.empty() ? 0 : trace.iterations[0].sigma.size();
  for (Eigen::Index i = 0; i < P; ++i) out += ",sigma_" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t it = 0; it < trace.iterations.size(); ++it) {
    const EmIterRecord& rec = trace.iterations[it];
    out += std::to_string(it + 1) + ',' + format_double(rec.q) + ',' +
           format_double(rec.penalized_q) + ',' + format_double(rec.max_delta_beta);
    for (Eigen::Index i = 0; i < rec.sigma.size(); ++i) {
      out += ',' + format_double(rec.sigma[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace sgev
