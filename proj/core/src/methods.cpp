#include "sgev/methods.hpp"

#include "sgev/em.hpp"
#include "sgev/errors.hpp"
#include "sgev/particle_filter.hpp"
#include "sgev/rng.hpp"

namespace sgev {

namespace {

Method make_sparse_gev(const RunSettings& settings) {
  Method m;
  m.name = "sparse-gev";
  m.lag = settings.lag;
  m.run = [settings](const TimeSeriesPanel& panel, std::uint64_t salt) {
    EmConfig cfg;
    cfg.lambda = settings.lambda_sparse;
    cfg.max_iters = settings.em_max_iters;
    cfg.tol = settings.em_tol;
    cfg.particles = settings.particles;
    cfg.tau = settings.tau;
    cfg.lag = settings.lag;
    cfg.seed = mix_seed(settings.seed, salt);
    EmFit fitted = fit(panel, cfg);

    // Forecasts need filtered means under the final coefficients, not
    // the ones from the last E-step's pre-update model.
    const FilterResult fr = run_filter(panel, fitted.model, cfg.particles,
                                       Rng(mix_seed(cfg.seed, 0xf17u)));
    const Eigen::Index T = panel.steps();
    Eigen::MatrixXd hist(settings.lag, fitted.model.P);
    for (int l = 0; l < settings.lag; ++l)
      hist.row(l) = fr.summary.mean_mu.row(T - 1 - l);

    MethodOutput out;
    out.graph = extract_graph(fitted.model);
    out.lag = settings.lag;
    out.predict_next = [model = fitted.model, hist](const Eigen::MatrixXd& recent) {
      (void)recent;  // state lives in the filtered latent means
      return predict_next(model, hist);
    };
    return out;
  };
  return m;
}

Method make_granger(const RunSettings& settings) {
  Method m;
  m.name = "granger";
  m.lag = settings.lag;
  m.run = [settings](const TimeSeriesPanel& panel, std::uint64_t salt) {
    (void)salt;  // deterministic fit
    GrangerFit g = lasso_granger(panel, settings.lambda_granger, settings.lag);
    MethodOutput out;
    out.graph = std::move(g.graph);
    out.lag = settings.lag;
    out.predict_next = [model = std::move(g.model)](const Eigen::MatrixXd& recent) {
      return model.predict(recent);
    };
    return out;
  };
  return m;
}

Method make_te(const RunSettings& settings) {
  Method m;
  m.name = "te";
  m.lag = settings.lag;
  m.run = [settings](const TimeSeriesPanel& panel, std::uint64_t salt) {
    (void)salt;  // deterministic given the panel (fixed jitter stream)
    TeConfig cfg;
    cfg.k = settings.te_k;
    cfg.lag = settings.lag;
    TeFit t = te_method(panel, cfg, settings.te_parents, settings.te_neighbors);
    MethodOutput out;
    out.graph = std::move(t.graph);
    out.lag = settings.lag;
    out.predict_next = [pred = std::move(t.predictor)](const Eigen::MatrixXd& recent) {
      return pred.predict(recent);
    };
    return out;
  };
  return m;
}

Method make_copula(const RunSettings& settings) {
  Method m;
  m.name = "copula";
  m.lag = settings.lag;
  m.run = [settings](const TimeSeriesPanel& panel, std::uint64_t salt) {
    (void)salt;  // deterministic fit
    CopulaFit c = copula_method(panel, settings.lambda_copula, settings.lag,
                                settings.marginal);
    MethodOutput out;
    out.graph = c.graph;
    out.lag = settings.lag;
    out.predict_next = [fitted = std::move(c)](const Eigen::MatrixXd& recent) {
      return fitted.predict(recent);
    };
    return out;
  };
  return m;
}

}  // namespace

Method make_method(const std::string& name, const RunSettings& settings) {
  if (name == "sparse-gev") return make_sparse_gev(settings);
  if (name == "granger") return make_granger(settings);
  if (name == "te") return make_te(settings);
  if (name == "copula") return make_copula(settings);
  throw UsageError("unknown method '" + name +
                   "'; expected sparse-gev, granger, te, or copula");
}

std::vector<Method> make_all_methods(const RunSettings& settings) {
  std::vector<Method> methods;
  for (const std::string& name : method_names())
    methods.push_back(make_method(name, settings));
  return methods;
}

}  // namespace sgev
