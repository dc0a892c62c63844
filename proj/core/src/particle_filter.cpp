#include "sgev/particle_filter.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sgev/errors.hpp"
#include "sgev/gumbel.hpp"
#include "sgev/io.hpp"
#include "sgev/lambert.hpp"
#include "sgev/math_util.hpp"

namespace sgev {

ProposalParams proposal_params(double x, double mu_tilde, double sigma_i, double tau) {
  if (!(sigma_i > 0.0) || !(tau > 0.0) || !std::isfinite(x) || !std::isfinite(mu_tilde)) {
    throw DomainError("proposal_params requires finite inputs, sigma > 0, tau > 0");
  }
  const double g = tau / sigma_i;
  // W argument g^2 exp((mu_tilde - x)/sigma + g^2), kept in log space.
  const double log_arg = 2.0 * std::log(g) + (mu_tilde - x) / sigma_i + g * g;
  const double w = lambert_w0_exp(log_arg);
  ProposalParams out;
  out.mean = mu_tilde + g * tau - sigma_i * w;
  out.variance = tau * tau / (g * g + 1.0);
  return out;
}

double effective_sample_size(const Eigen::VectorXd& weights) {
  const double s = weights.squaredNorm();
  if (!(s > 0.0)) throw DegeneracyError("effective_sample_size: zero weight vector");
  return 1.0 / s;
}

std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, Rng& rng) {
  const Eigen::Index n = weights.size();
  if (n == 0) throw DimensionError("systematic_resample: empty weights");
  std::vector<Eigen::Index> ancestors(static_cast<std::size_t>(n));
  const double step = 1.0 / static_cast<double>(n);
  double pointer = rng.uniform() * step;
  double cumulative = weights[0];
  Eigen::Index j = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    while (pointer > cumulative && j + 1 < n) {
      ++j;
      cumulative += weights[j];
    }
    ancestors[static_cast<std::size_t>(k)] = j;
    pointer += step;
  }
  return ancestors;
}

PfStepResult pf_step(const ParticleEnsemble& ensemble, const Eigen::VectorXd& x_t,
                     const SparseGevModel& model, Eigen::Index t_index,
                     const Rng& step_rng) {
  const Eigen::Index n = ensemble.particles.rows();
  const int P = model.P;
  if (x_t.size() != P) throw DimensionError("pf_step: observation size mismatch");
  if (static_cast<Eigen::Index>(ensemble.histories.size()) != n) {
    throw DimensionError("pf_step: history count mismatch");
  }

  PfStepResult result;
  result.proposed.resize(n, P);
  Eigen::VectorXd log_weights(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::MatrixXd& history = ensemble.histories[static_cast<std::size_t>(k)];
    const Eigen::VectorXd mean = transition_means(model, history);
    double logw = std::log(ensemble.weights[k]);
    for (int i = 0; i < P; ++i) {
      const ProposalParams prop = proposal_params(x_t[i], mean[i], model.sigma[i], model.tau);
      Rng draw = step_rng.substream(static_cast<std::uint64_t>(k) *
                                        static_cast<std::uint64_t>(P) +
                                    static_cast<std::uint64_t>(i));
      const double sd = std::sqrt(prop.variance);
      const double mu = prop.mean + sd * draw.normal();
      result.proposed(k, i) = mu;
      const double log_obs = gumbel_log_pdf(x_t[i], GumbelParams{mu, model.sigma[i]});
      const double log_trans = normal_log_pdf(mu, mean[i], model.tau);
      const double log_prop = normal_log_pdf(mu, prop.mean, sd);
      logw += log_weight_increment(log_obs, log_trans, log_prop);
    }
    log_weights[k] = logw;
  }

  const double norm = log_sum_exp({log_weights.data(), static_cast<std::size_t>(n)});
  if (!std::isfinite(norm)) {
    throw DegeneracyError("particle weights collapsed at time index " +
                          std::to_string(t_index));
  }
  result.weights = (log_weights.array() - norm).exp().matrix();
  result.weights /= result.weights.sum();
  result.ess = effective_sample_size(result.weights);
  result.min_weight = result.weights.minCoeff();
  result.max_weight = result.weights.maxCoeff();

  Rng resample_rng = step_rng.substream(static_cast<std::uint64_t>(n) *
                                            static_cast<std::uint64_t>(P) +
                                        1);
  const std::vector<Eigen::Index> ancestors = systematic_resample(result.weights, resample_rng);

  result.ensemble.particles.resize(n, P);
  result.ensemble.histories.resize(static_cast<std::size_t>(n));
  const int L = model.L;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index a = ancestors[static_cast<std::size_t>(k)];
    result.ensemble.particles.row(k) = result.proposed.row(a);
    Eigen::MatrixXd history(L, P);
    const Eigen::MatrixXd& old = ensemble.histories[static_cast<std::size_t>(a)];
    history.row(0) = result.proposed.row(a);
    for (int l = 1; l < L; ++l) history.row(l) = old.row(l - 1);
    result.ensemble.histories[static_cast<std::size_t>(k)] = std::move(history);
  }
  result.ensemble.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  result.ensemble.ess = static_cast<double>(n);
  return result;
}

FilterResult run_filter(const TimeSeriesPanel& panel, const SparseGevModel& model,
                        int n_particles, const Rng& rng) {
  validate_model(model);
  validate_panel(panel);
  const Eigen::Index T = panel.steps();
  const int P = model.P;
  const int L = model.L;
  if (panel.series() != P) throw DimensionError("run_filter: panel series != model P");
  if (T <= L) throw DimensionError("run_filter: panel needs more than L steps");
  if (n_particles < 2) throw DimensionError("run_filter: need at least 2 particles");

  const Eigen::Index n = n_particles;
  FilterResult out;
  PosteriorSummary& s = out.summary;
  s.mean_mu = Eigen::MatrixXd::Zero(T, P);
  s.second_moment = Eigen::MatrixXd::Zero(T, P);
  s.lag_gram = Eigen::MatrixXd::Zero(P * L, P * L);
  s.target_lag_cross = Eigen::MatrixXd::Zero(P, P * L);
  s.lag_sum = Eigen::VectorXd::Zero(P * L);
  s.target_sum = Eigen::VectorXd::Zero(P);
  s.target_sq_sum = Eigen::VectorXd::Zero(P);
  s.n_steps = static_cast<int>(T) - L;
  s.lag = L;
  s.mu_samples.reserve(static_cast<std::size_t>(s.n_steps));
  s.mu_weights.reserve(static_cast<std::size_t>(s.n_steps));

  // Initial lag window: per particle, per step t < L, draws around the
  // observed values.
  const Rng init_rng = rng.substream(0xa11ce);
  ParticleEnsemble ensemble;
  ensemble.particles.resize(n, P);
  ensemble.histories.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(L, P));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::MatrixXd& history = ensemble.histories[static_cast<std::size_t>(k)];
    for (int t = 0; t < L; ++t) {
      Rng draw = init_rng.substream((static_cast<std::uint64_t>(t) << 32) |
                                    static_cast<std::uint64_t>(k));
      // Standing at time L, the value for time t sits at lag L - t.
      for (int i = 0; i < P; ++i) {
        history(L - 1 - t, i) = panel.values(t, i) + model.tau * draw.normal();
      }
    }
    ensemble.particles.row(k) = history.row(0);
  }
  ensemble.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  ensemble.ess = static_cast<double>(n);

  // Uniform-weight moments for the initial rows.
  for (int t = 0; t < L; ++t) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::MatrixXd& history = ensemble.histories[static_cast<std::size_t>(k)];
      for (int i = 0; i < P; ++i) {
        const double v = history(L - 1 - t, i);
        s.mean_mu(t, i) += v;
        s.second_moment(t, i) += v * v;
      }
    }
  }
  s.mean_mu.topRows(L) /= static_cast<double>(n);
  s.second_moment.topRows(L) /= static_cast<double>(n);

  const Rng step_parent = rng.substream(0x57e9);
  for (Eigen::Index t = L; t < T; ++t) {
    const Rng step_rng = step_parent.substream(static_cast<std::uint64_t>(t));
    PfStepResult step = pf_step(ensemble, panel.values.row(t).transpose(), model, t, step_rng);

    // Accumulate weighted moments from the pre-resample ensemble; the
    // regressor vector is each particle's own lag window.
    for (Eigen::Index k = 0; k < n; ++k) {
      const double w = step.weights[k];
      if (w == 0.0) continue;
      const Eigen::VectorXd r = flatten_history(ensemble.histories[static_cast<std::size_t>(k)]);
      const Eigen::VectorXd mu = step.proposed.row(k).transpose();
      s.lag_gram.selfadjointView<Eigen::Lower>().rankUpdate(r, w);
      s.target_lag_cross.noalias() += w * mu * r.transpose();
      s.lag_sum.noalias() += w * r;
      s.target_sum.noalias() += w * mu;
      s.target_sq_sum.array() += w * mu.array().square();
      s.mean_mu.row(t) += w * mu.transpose();
      s.second_moment.row(t) += w * mu.transpose().array().square().matrix();
    }
    s.mu_samples.push_back(step.proposed);
    s.mu_weights.push_back(step.weights);
    out.diagnostics.ess.push_back(step.ess);
    out.diagnostics.min_weight.push_back(step.min_weight);
    out.diagnostics.max_weight.push_back(step.max_weight);
    ensemble = std::move(step.ensemble);
  }
  s.lag_gram = s.lag_gram.selfadjointView<Eigen::Lower>();
  out.last = std::move(ensemble);
  return out;
}

std::string diagnostics_to_csv(const FilterDiagnostics& diag, int lag) {
  std::string out = "t,ess,min_weight,max_weight\n";
  for (std::size_t i = 0; i < diag.ess.size(); ++i) {
    out += std::to_string(lag + static_cast<int>(i)) + ',' + format_double(diag.ess[i]) +
           ',' + format_double(diag.min_weight[i]) + ',' +
           format_double(diag.max_weight[i]) + '\n';
  }
  return out;
}

}  // namespace sgev
