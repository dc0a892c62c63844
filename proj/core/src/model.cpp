#include "sgev/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

#include "sgev/errors.hpp"
#include "sgev/gumbel.hpp"
#include "sgev/math_util.hpp"

namespace sgev {

void validate_model(const SparseGevModel& model) {
  if (model.P < 1 || model.L < 1) {
    throw DimensionError("model requires P >= 1 and L >= 1");
  }
  if (model.c.size() != model.P || model.sigma.size() != model.P ||
      static_cast<int>(model.beta.size()) != model.P) {
    throw DimensionError("model field sizes do not match P=" + std::to_string(model.P));
  }
  for (const auto& b : model.beta) {
    if (b.rows() != model.P || b.cols() != model.L) {
      throw DimensionError("beta block must be P x L");
    }
    if (!b.allFinite()) throw DomainError("beta contains non-finite values");
  }
  if (!(model.tau > 0.0) || !std::isfinite(model.tau)) {
    throw DomainError("model requires tau > 0");
  }
  for (int i = 0; i < model.P; ++i) {
    if (!(model.sigma[i] > 0.0) || !std::isfinite(model.sigma[i])) {
      throw DomainError("model requires sigma > 0");
    }
    if (!std::isfinite(model.c[i])) throw DomainError("model offset must be finite");
  }
}

namespace {

void check_history(const SparseGevModel& model, const Eigen::MatrixXd& mu_history) {
  if (mu_history.rows() != model.L || mu_history.cols() != model.P) {
    throw DimensionError("history must be L x P = " + std::to_string(model.L) + " x " +
                         std::to_string(model.P) + ", got " +
                         std::to_string(mu_history.rows()) + " x " +
                         std::to_string(mu_history.cols()));
  }
}

}  // namespace

double transition_mean(const SparseGevModel& model, int i,
                       const Eigen::MatrixXd& mu_history) {
  check_history(model, mu_history);
  if (i < 0 || i >= model.P) throw DimensionError("series index out of range");
  double acc = model.c[i];
  const Eigen::MatrixXd& b = model.beta[static_cast<std::size_t>(i)];
  for (int l = 0; l < model.L; ++l) {
    for (int j = 0; j < model.P; ++j) {
      acc += b(j, l) * mu_history(l, j);
    }
  }
  return acc;
}

Eigen::VectorXd transition_means(const SparseGevModel& model,
                                 const Eigen::MatrixXd& mu_history) {
  check_history(model, mu_history);
  const Eigen::VectorXd r = flatten_history(mu_history);
  Eigen::VectorXd out(model.P);
  for (int i = 0; i < model.P; ++i) {
    const auto& b = model.beta[static_cast<std::size_t>(i)];
    out[i] = model.c[i] + Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()).dot(r);
  }
  return out;
}

Eigen::VectorXd flatten_history(const Eigen::MatrixXd& mu_history) {
  const Eigen::Index L = mu_history.rows();
  const Eigen::Index P = mu_history.cols();
  Eigen::VectorXd r(L * P);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index j = 0; j < P; ++j) {
      r[l * P + j] = mu_history(l, j);
    }
  }
  return r;
}

std::pair<TimeSeriesPanel, LatentPath> simulate(const SparseGevModel& model,
                                                Eigen::Index T,
                                                const Eigen::MatrixXd& init,
                                                Rng& rng) {
  validate_model(model);
  check_history(model, init);
  if (T <= model.L) throw DimensionError("simulate requires T > L");

  Eigen::MatrixXd history = init;  // row 0 = most recent
  Eigen::MatrixXd mu(T, model.P);
  Eigen::MatrixXd x(T, model.P);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd mean = transition_means(model, history);
    for (int i = 0; i < model.P; ++i) {
      mu(t, i) = mean[i] + model.tau * rng.normal();
    }
    for (int i = 0; i < model.P; ++i) {
      x(t, i) = gumbel_sample(GumbelParams{mu(t, i), model.sigma[i]}, rng);
    }
    for (int l = model.L - 1; l > 0; --l) history.row(l) = history.row(l - 1);
    history.row(0) = mu.row(t);
  }

  TimeSeriesPanel panel;
  panel.values = x;
  panel.names.reserve(static_cast<std::size_t>(model.P));
  for (int i = 0; i < model.P; ++i) panel.names.push_back("x" + std::to_string(i + 1));
  return {panel, LatentPath{mu}};
}

Eigen::VectorXd predict_next(const SparseGevModel& model,
                             const Eigen::MatrixXd& mu_history) {
  validate_model(model);
  const Eigen::VectorXd mean = transition_means(model, mu_history);
  return mean + euler_gamma * model.sigma;
}

DependencyGraph extract_graph(const SparseGevModel& model) {
  validate_model(model);
  DependencyGraph graph;
  graph.P = model.P;
  graph.includes_self_loops = true;
  for (int i = 0; i < model.P; ++i) {
    const auto& b = model.beta[static_cast<std::size_t>(i)];
    for (int j = 0; j < model.P; ++j) {
      double best = 0.0;
      bool any = false;
      for (int l = 0; l < model.L; ++l) {
        if (b(j, l) != 0.0) {
          any = true;
          best = std::max(best, std::abs(b(j, l)));
        }
      }
      if (any) {
        GraphEdge e;
        e.src = j;
        e.dst = i;
        e.score = best;
        e.lag_weights.assign(static_cast<std::size_t>(model.L), 0.0);
        for (int l = 0; l < model.L; ++l) e.lag_weights[static_cast<std::size_t>(l)] = b(j, l);
        graph.edges.push_back(std::move(e));
      }
    }
  }
  return graph;
}

GroundTruthGraph ground_truth(const SparseGevModel& model) {
  validate_model(model);
  GroundTruthGraph truth = make_truth(model.P);
  for (int i = 0; i < model.P; ++i) {
    const auto& b = model.beta[static_cast<std::size_t>(i)];
    for (int j = 0; j < model.P; ++j) {
      for (int l = 0; l < model.L; ++l) {
        if (b(j, l) != 0.0) {
          truth.set(j, i, true);
          break;
        }
      }
    }
  }
  return truth;
}

double companion_spectral_radius(const SparseGevModel& model) {
  validate_model(model);
  const int P = model.P, L = model.L;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(P * L, P * L);
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < P; ++i) {
      for (int j = 0; j < P; ++j) {
        companion(i, l * P + j) = model.beta[static_cast<std::size_t>(i)](j, l);
      }
    }
  }
  for (int l = 1; l < L; ++l) {
    companion.block(l * P, (l - 1) * P, P, P).setIdentity();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SparseGevModel draw_recipe_model(const SyntheticRecipe& recipe, Rng& rng) {
  if (recipe.P < 2 || recipe.L < 1) {
    throw DimensionError("recipe requires P >= 2 and L >= 1");
  }
  SparseGevModel model;
  model.P = recipe.P;
  model.L = recipe.L;
  model.tau = recipe.tau;
  model.c.resize(recipe.P);
  model.sigma = Eigen::VectorXd::Constant(recipe.P, recipe.sigma);
  const double c_sd = std::sqrt(recipe.c_variance);
  for (int i = 0; i < recipe.P; ++i) model.c[i] = rng.normal(recipe.c_mean, c_sd);

  const double edge_prob = recipe.expected_in_edges / static_cast<double>(recipe.P);
  for (int redraw = 0; redraw < 200; ++redraw) {
    model.beta.assign(static_cast<std::size_t>(recipe.P),
                      Eigen::MatrixXd::Zero(recipe.P, recipe.L));
    for (int i = 0; i < recipe.P; ++i) {
      for (int j = 0; j < recipe.P; ++j) {
        if (rng.uniform() >= edge_prob) continue;
        const int lag = static_cast<int>(rng.uniform() * recipe.L);
        const double coef = (2.0 * rng.uniform() - 1.0) * recipe.coef_max;
        model.beta[static_cast<std::size_t>(i)](j, std::min(lag, recipe.L - 1)) = coef;
      }
    }
    int off_diag_edges = 0;
    for (int i = 0; i < recipe.P; ++i) {
      for (int j = 0; j < recipe.P; ++j) {
        if (i == j) continue;
        if (model.beta[static_cast<std::size_t>(i)].row(j).cwiseAbs().maxCoeff() > 0.0) {
          ++off_diag_edges;
        }
      }
    }
    // Need at least one present and one absent off-diagonal pair.
    if (off_diag_edges == 0 || off_diag_edges == recipe.P * (recipe.P - 1)) continue;

    for (int shrink = 0; shrink < 100; ++shrink) {
      const double radius = companion_spectral_radius(model);
      if (radius < recipe.radius_cap) break;
      const double factor = (recipe.radius_cap * 0.98) / radius;
      for (auto& b : model.beta) b *= factor;
    }
    if (companion_spectral_radius(model) < recipe.radius_cap) return model;
  }
  throw ConvergenceError("draw_recipe_model: could not draw a usable support");
}

SyntheticDataset make_synthetic_dataset(const SyntheticRecipe& recipe, Rng rng) {
  Rng model_rng = rng.substream(1);
  Rng path_rng = rng.substream(2);
  SyntheticDataset data;
  data.model = draw_recipe_model(recipe, model_rng);
  data.truth = ground_truth(data.model);

  // Initial lag window fixed at the offsets; burn-in washes it out.
  Eigen::MatrixXd init(recipe.L, recipe.P);
  for (int l = 0; l < recipe.L; ++l) init.row(l) = data.model.c.transpose();
  const Eigen::Index total = recipe.T + recipe.burn_in;
  auto [panel, latent] = simulate(data.model, total, init, path_rng);
  data.panel.names = panel.names;
  data.panel.values = panel.values.bottomRows(recipe.T);
  data.latent.mu = latent.mu.bottomRows(recipe.T);
  return data;
}

std::vector<SyntheticDataset> make_synthetic_suite(int n_datasets, Rng rng,
                                                   const SyntheticRecipe& recipe) {
  if (n_datasets < 1) throw DimensionError("make_synthetic_suite requires n_datasets >= 1");
  std::vector<SyntheticDataset> suite;
  suite.reserve(static_cast<std::size_t>(n_datasets));
  for (int d = 0; d < n_datasets; ++d) {
    suite.push_back(make_synthetic_dataset(recipe, rng.substream(static_cast<std::uint64_t>(d))));
  }
  return suite;
}

nlohmann::json model_to_json(const SparseGevModel& model) {
  validate_model(model);
  nlohmann::json beta = nlohmann::json::array();
  for (int i = 0; i < model.P; ++i) {
    nlohmann::json per_source = nlohmann::json::array();
    for (int j = 0; j < model.P; ++j) {
      nlohmann::json per_lag = nlohmann::json::array();
      for (int l = 0; l < model.L; ++l) {
        per_lag.push_back(model.beta[static_cast<std::size_t>(i)](j, l));
      }
      per_source.push_back(std::move(per_lag));
    }
    beta.push_back(std::move(per_source));
  }
  nlohmann::json j;
  j["P"] = model.P;
  j["L"] = model.L;
  j["tau"] = model.tau;
  j["c"] = std::vector<double>(model.c.data(), model.c.data() + model.P);
  j["sigma"] = std::vector<double>(model.sigma.data(), model.sigma.data() + model.P);
  j["beta"] = std::move(beta);
  return j;
}

SparseGevModel model_from_json(const nlohmann::json& j) {
  SparseGevModel model;
  try {
    model.P = j.at("P").get<int>();
    model.L = j.at("L").get<int>();
    model.tau = j.at("tau").get<double>();
    const auto c = j.at("c").get<std::vector<double>>();
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    if (static_cast<int>(c.size()) != model.P || static_cast<int>(sigma.size()) != model.P) {
      throw DimensionError("model JSON: c/sigma length mismatch");
    }
    model.c = Eigen::Map<const Eigen::VectorXd>(c.data(), model.P);
    model.sigma = Eigen::Map<const Eigen::VectorXd>(sigma.data(), model.P);
    const auto& beta = j.at("beta");
    if (static_cast<int>(beta.size()) != model.P) {
      throw DimensionError("model JSON: beta outer length mismatch");
    }
    for (int i = 0; i < model.P; ++i) {
      const auto& per_source = beta.at(static_cast<std::size_t>(i));
      if (static_cast<int>(per_source.size()) != model.P) {
        throw DimensionError("model JSON: beta source length mismatch");
      }
      Eigen::MatrixXd b(model.P, model.L);
      for (int jx = 0; jx < model.P; ++jx) {
        const auto& per_lag = per_source.at(static_cast<std::size_t>(jx));
        if (static_cast<int>(per_lag.size()) != model.L) {
          throw DimensionError("model JSON: beta lag length mismatch");
        }
        for (int l = 0; l < model.L; ++l) b(jx, l) = per_lag.at(static_cast<std::size_t>(l)).get<double>();
      }
      model.beta.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  validate_model(model);
  return model;
}

}  // namespace sgev
