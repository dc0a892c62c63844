#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "sgev/baselines.hpp"
#include "sgev/em.hpp"
#include "sgev/errors.hpp"
#include "sgev/evaluation.hpp"
#include "sgev/io.hpp"
#include "sgev/methods.hpp"
#include "sgev/model.hpp"
#include "sgev/particle_filter.hpp"
#include "sgev/rng.hpp"

namespace {

using nlohmann::json;

struct CliOptions {
  std::string config_path;
  std::string method;  // empty = per-command default
  std::optional<double> lambda;
  int lag = 2;
  int particles = 1000;
  double tau = 0.3;
  std::uint64_t seed = 1;
  bool self_loops = false;
  std::string marginal = "gev";
  int windows = 10;
  int series = 9;
  int steps = 40;
  int datasets = 8;
  bool normalize = true;
  bool timings = false;
  std::string input;
  std::string model_path;
  std::string truth_path;
  std::string output = ".";
};

json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw sgev::ParseError(where + ": " + e.what());
  }
}

// Config file values fill every slot the command line left untouched.
void apply_config(CLI::App* sub, CliOptions& o) {
  if (o.config_path.empty()) return;
  const json cfg = [&] {
    try {
      return json::parse(sgev::read_text_file(o.config_path));
    } catch (const json::exception& e) {
      throw sgev::UsageError("config file " + o.config_path + ": " + e.what());
    }
  }();
  if (!cfg.is_object()) throw sgev::UsageError("config file must hold a JSON object");

  static const std::set<std::string> known = {
      "method", "lambda", "lag",     "particles", "tau",      "seed",
      "self_loops", "marginal", "windows", "series",    "steps",    "datasets",
      "normalize",  "timings",  "input",   "model",     "truth",    "output"};
  for (const auto& item : cfg.items())
    if (!known.contains(item.key()))
      throw sgev::UsageError("unknown config key '" + item.key() + "'");

  const auto given = [&](const std::string& flag) {
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  const auto want_number = [&](const std::string& key) {
    if (!cfg.at(key).is_number())
      throw sgev::UsageError("config key '" + key + "' must be a number");
    return cfg.at(key).get<double>();
  };
  const auto want_int = [&](const std::string& key) {
    if (!cfg.at(key).is_number_integer())
      throw sgev::UsageError("config key '" + key + "' must be an integer");
    return cfg.at(key).get<std::int64_t>();
  };
  const auto want_bool = [&](const std::string& key) {
    if (!cfg.at(key).is_boolean())
      throw sgev::UsageError("config key '" + key + "' must be a boolean");
    return cfg.at(key).get<bool>();
  };
  const auto want_string = [&](const std::string& key) {
    if (!cfg.at(key).is_string())
      throw sgev::UsageError("config key '" + key + "' must be a string");
    return cfg.at(key).get<std::string>();
  };

  if (cfg.contains("method") && !given("--method")) o.method = want_string("method");
  if (cfg.contains("lambda") && !given("--lambda")) o.lambda = want_number("lambda");
  if (cfg.contains("lag") && !given("--lag")) o.lag = static_cast<int>(want_int("lag"));
  if (cfg.contains("particles") && !given("--particles"))
    o.particles = static_cast<int>(want_int("particles"));
  if (cfg.contains("tau") && !given("--tau")) o.tau = want_number("tau");
  if (cfg.contains("seed") && !given("--seed")) {
    const std::int64_t s = want_int("seed");
    if (s < 0) throw sgev::UsageError("config key 'seed' must be non-negative");
    o.seed = static_cast<std::uint64_t>(s);
  }
  if (cfg.contains("self_loops") && !given("--self-loops"))
    o.self_loops = want_bool("self_loops");
  if (cfg.contains("marginal") && !given("--marginal")) o.marginal = want_string("marginal");
  if (cfg.contains("windows") && !given("--windows"))
    o.windows = static_cast<int>(want_int("windows"));
  if (cfg.contains("series") && !given("--series"))
    o.series = static_cast<int>(want_int("series"));
  if (cfg.contains("steps") && !given("--steps"))
    o.steps = static_cast<int>(want_int("steps"));
  if (cfg.contains("datasets") && !given("--datasets"))
    o.datasets = static_cast<int>(want_int("datasets"));
  if (cfg.contains("normalize") && !given("--normalize") && !given("--no-normalize"))
    o.normalize = want_bool("normalize");
  if (cfg.contains("timings") && !given("--timings")) o.timings = want_bool("timings");
  if (cfg.contains("input") && !given("--input")) o.input = want_string("input");
  if (cfg.contains("model") && !given("--model")) o.model_path = want_string("model");
  if (cfg.contains("truth") && !given("--truth")) o.truth_path = want_string("truth");
  if (cfg.contains("output") && !given("--out")) o.output = want_string("output");
}

void check_common(const CliOptions& o) {
  if (o.lag < 1) throw sgev::UsageError("--lag must be at least 1");
  if (o.particles < 1) throw sgev::UsageError("--particles must be at least 1");
  if (!(o.tau > 0.0)) throw sgev::UsageError("--tau must be positive");
  if (o.windows < 1) throw sgev::UsageError("--windows must be at least 1");
  if (o.lambda && !(*o.lambda >= 0.0))
    throw sgev::UsageError("--lambda must be non-negative");
  if (o.marginal != "gev" && o.marginal != "empirical")
    throw sgev::UsageError("--marginal must be 'gev' or 'empirical'");
}

sgev::RunSettings to_settings(const CliOptions& o) {
  sgev::RunSettings s;
  s.lag = o.lag;
  s.seed = o.seed;
  s.particles = o.particles;
  s.tau = o.tau;
  if (o.lambda) {
    s.lambda_sparse = *o.lambda;
    s.lambda_granger = *o.lambda;
    s.lambda_copula = *o.lambda;
  }
  s.marginal = o.marginal == "gev" ? sgev::MarginalKind::gev
                                   : sgev::MarginalKind::empirical;
  return s;
}

json resolved_config(const std::string& command, const CliOptions& o,
                     const sgev::RunSettings& s) {
  json c;
  c["command"] = command;
  if (!o.method.empty()) c["method"] = o.method;
  c["lambda_sparse"] = s.lambda_sparse;
  c["lambda_granger"] = s.lambda_granger;
  c["lambda_copula"] = s.lambda_copula;
  c["lag"] = s.lag;
  c["particles"] = s.particles;
  c["tau"] = s.tau;
  c["seed"] = o.seed;
  c["self_loops"] = o.self_loops;
  c["marginal"] = o.marginal;
  c["windows"] = o.windows;
  c["normalize"] = o.normalize;
  if (command == "simulate") {
    c["series"] = o.series;
    c["steps"] = o.steps;
  }
  if (command == "benchmark") c["datasets"] = o.datasets;
  if (!o.input.empty()) c["input"] = o.input;
  if (!o.model_path.empty()) c["model"] = o.model_path;
  if (!o.truth_path.empty()) c["truth"] = o.truth_path;
  c["output"] = o.output;
  return c;
}

std::vector<std::pair<std::string, std::string>> config_meta(const json& cfg) {
  std::vector<std::pair<std::string, std::string>> meta;
  for (const auto& item : cfg.items()) {
    const json& v = item.value();
    meta.emplace_back(item.key(), v.is_string() ? v.get<std::string>() : v.dump());
  }
  return meta;
}

std::string out_path(const CliOptions& o, const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir(o.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw sgev::IoError("cannot create output directory " + o.output);
  return (dir / name).string();
}

void write_json_file(const std::string& path, const json& j) {
  sgev::atomic_write_text(path, j.dump(2) + "\n");
}

std::string meta_prefix(const json& cfg) {
  std::string out;
  for (const auto& [k, v] : config_meta(cfg)) out += "# " + k + " = " + v + "\n";
  return out;
}

int cmd_simulate(const CliOptions& o) {
  if (o.series < 2) throw sgev::UsageError("--series must be at least 2");
  if (o.steps < o.lag + 3) throw sgev::UsageError("--steps too small for the lag order");
  sgev::SyntheticRecipe recipe;
  recipe.P = o.series;
  recipe.T = o.steps;
  recipe.L = o.lag;
  const sgev::SyntheticDataset data =
      sgev::make_synthetic_dataset(recipe, sgev::Rng(o.seed));

  const json cfg = resolved_config("simulate", o, to_settings(o));
  sgev::write_panel_csv(out_path(o, "panel.csv"), data.panel, config_meta(cfg));
  json truth = sgev::truth_to_json(data.truth);
  truth["config"] = cfg;
  write_json_file(out_path(o, "truth.json"), truth);
  json model = sgev::model_to_json(data.model);
  model["config"] = cfg;
  write_json_file(out_path(o, "model.json"), model);

  std::cout << "simulated " << data.panel.steps() << " steps of " << recipe.P
            << " series into " << o.output << " (panel.csv, truth.json, model.json)\n";
  return 0;
}

int cmd_fit(const CliOptions& o) {
  if (o.input.empty()) throw sgev::UsageError("fit requires --input");
  const std::string method = o.method.empty() ? "sparse-gev" : o.method;
  const sgev::RunSettings settings = to_settings(o);
  const sgev::TimeSeriesPanel raw = sgev::read_panel_csv(o.input);

  sgev::TimeSeriesPanel panel = raw;
  std::optional<sgev::NormalizationRecord> record;
  if (o.normalize) {
    auto [scaled, rec] = sgev::normalize_panel(raw);
    panel = std::move(scaled);
    record = std::move(rec);
  }

  CliOptions echo = o;
  echo.method = method;
  const json cfg = resolved_config("fit", echo, settings);

  if (method == "sparse-gev") {
    sgev::EmConfig em;
    em.lambda = settings.lambda_sparse;
    em.max_iters = settings.em_max_iters;
    em.tol = settings.em_tol;
    em.particles = settings.particles;
    em.tau = settings.tau;
    em.lag = settings.lag;
    em.seed = settings.seed;
    const sgev::EmFit fitted = sgev::fit(panel, em);

    json model = sgev::model_to_json(fitted.model);
    if (record) model["normalization"] = sgev::normalization_to_json(*record);
    model["config"] = cfg;
    write_json_file(out_path(o, "model.json"), model);

    json graph = sgev::graph_to_json(sgev::extract_graph(fitted.model));
    graph["config"] = cfg;
    write_json_file(out_path(o, "graph.json"), graph);

    sgev::atomic_write_text(out_path(o, "em_trace.csv"),
                            meta_prefix(cfg) + sgev::trace_to_csv(fitted.trace));
    sgev::atomic_write_text(
        out_path(o, "ess_trace.csv"),
        meta_prefix(cfg) + sgev::diagnostics_to_csv(fitted.diagnostics, em.lag));

    const auto& iters = fitted.trace.iterations;
    std::cout << "fit " << method << ": " << iters.size() << " iterations, penalized Q "
              << sgev::format_double(iters.empty() ? 0.0 : iters.back().penalized_q)
              << ", wrote model.json graph.json em_trace.csv ess_trace.csv in "
              << o.output << "\n";
    // Smoothness diagnostic for choosing --tau: well below 1 means the
    // latent path irons out observation noise instead of copying it.
    double d_mu = 0.0;
    double d_x = 0.0;
    for (Eigen::Index t = 1; t < panel.steps(); ++t) {
      d_mu += (fitted.latent_mean.row(t) - fitted.latent_mean.row(t - 1))
                  .cwiseAbs()
                  .sum();
      d_x += (panel.values.row(t) - panel.values.row(t - 1)).cwiseAbs().sum();
    }
    if (d_x > 0.0)
      std::cout << "path roughness ratio (mean |d mu| / mean |d x|): "
                << sgev::format_double(d_mu / d_x) << "\n";
    return 0;
  }

  const sgev::Method m = sgev::make_method(method, settings);
  const sgev::MethodOutput out = m.run(panel, 0);
  json graph = sgev::graph_to_json(out.graph);
  graph["config"] = cfg;
  write_json_file(out_path(o, "graph.json"), graph);
  std::cout << "fit " << method << ": " << out.graph.edges.size()
            << " scored edges, wrote graph.json in " << o.output << "\n";
  return 0;
}

int cmd_predict(const CliOptions& o) {
  if (o.input.empty()) throw sgev::UsageError("predict requires --input");
  if (o.model_path.empty()) throw sgev::UsageError("predict requires --model");
  const json stored = parse_json_text(sgev::read_text_file(o.model_path), o.model_path);
  const sgev::SparseGevModel model = sgev::model_from_json(stored);
  std::optional<sgev::NormalizationRecord> record;
  if (stored.contains("normalization"))
    record = sgev::normalization_from_json(stored.at("normalization"));

  const sgev::TimeSeriesPanel raw = sgev::read_panel_csv(o.input);
  if (raw.values.cols() != model.P)
    throw sgev::DimensionError("panel has " + std::to_string(raw.values.cols()) +
                               " series but the model covers " + std::to_string(model.P));
  if (raw.steps() < model.L)
    throw sgev::DimensionError("panel shorter than the model lag order");

  sgev::TimeSeriesPanel panel = raw;
  if (record) {
    for (Eigen::Index j = 0; j < panel.values.cols(); ++j)
      for (Eigen::Index t = 0; t < panel.steps(); ++t)
        panel.values(t, j) = record->to_unit(static_cast<int>(j), raw.values(t, j));
  }

  const sgev::FilterResult fr =
      sgev::run_filter(panel, model, o.particles, sgev::Rng(o.seed));
  const Eigen::Index T = panel.steps();
  Eigen::MatrixXd hist(model.L, model.P);
  for (int l = 0; l < model.L; ++l) hist.row(l) = fr.summary.mean_mu.row(T - 1 - l);
  Eigen::VectorXd predicted = sgev::predict_next(model, hist);
  if (record) predicted = sgev::denormalize_row(*record, predicted);

  sgev::TimeSeriesPanel out;
  out.names = raw.names;
  out.t0 = raw.t0 + static_cast<double>(T) * raw.interval;
  out.interval = raw.interval;
  out.values = predicted.transpose();
  const json cfg = resolved_config("predict", o, to_settings(o));
  auto meta = config_meta(cfg);
  meta.emplace_back("forecast_t0", sgev::format_double(out.t0));
  sgev::write_panel_csv(out_path(o, "predictions.csv"), out, meta);
  std::cout << "wrote one-step predictions for " << model.P << " series to "
            << out_path(o, "predictions.csv") << "\n";
  return 0;
}

std::vector<sgev::Method> resolve_methods(const std::string& method,
                                          const sgev::RunSettings& settings) {
  if (method == "all") return sgev::make_all_methods(settings);
  return {sgev::make_method(method, settings)};
}

int cmd_evaluate(const CliOptions& o) {
  if (o.input.empty()) throw sgev::UsageError("evaluate requires --input");
  const std::string method = o.method.empty() ? "all" : o.method;
  const sgev::RunSettings settings = to_settings(o);
  const std::vector<sgev::Method> methods = resolve_methods(method, settings);

  const sgev::TimeSeriesPanel raw = sgev::read_panel_csv(o.input);
  std::optional<sgev::GroundTruthGraph> truth;
  if (!o.truth_path.empty())
    truth = sgev::truth_from_json(
        parse_json_text(sgev::read_text_file(o.truth_path), o.truth_path));

  sgev::BenchmarkConfig bench;
  bench.windows = o.windows;
  bench.self_loops = o.self_loops;
  bench.record_timing = o.timings;

  sgev::BenchmarkResult result;
  result.config = bench;
  if (truth) {
    std::vector<sgev::BenchmarkDataset> suite(1);
    suite[0].name = std::filesystem::path(o.input).stem().string();
    suite[0].panel = raw;
    suite[0].truth = *truth;
    result = sgev::run_benchmark(suite, methods, bench);
  } else {
    auto [panel, record] = sgev::normalize_panel(raw);
    (void)record;
    const std::string dataset = std::filesystem::path(o.input).stem().string();
    for (const sgev::Method& m : methods) {
      sgev::BenchmarkCell cell;
      cell.dataset = dataset;
      try {
        cell.report = sgev::sliding_window_rmse(panel, m, o.windows, 1);
      } catch (const sgev::Error& e) {
        cell.report.method = m.name;
        cell.report.notes.push_back(std::string("prediction task failed: ") + e.what());
        cell.report.partial = true;
      }
      result.cells.push_back(std::move(cell));
    }
    std::vector<std::string> order;
    for (const sgev::Method& m : methods) order.push_back(m.name);
    sgev::summarize_benchmark(result, order);
  }

  CliOptions echo = o;
  echo.method = method;
  const json cfg = resolved_config("evaluate", echo, settings);
  json report = sgev::benchmark_to_json(result);
  report["config"] = cfg;
  write_json_file(out_path(o, "report.json"), report);
  const std::string table = sgev::render_benchmark_table(result);
  sgev::atomic_write_text(out_path(o, "report.txt"), meta_prefix(cfg) + table);
  std::cout << table;
  return 0;
}

int cmd_benchmark(const CliOptions& o) {
  if (o.datasets < 1) throw sgev::UsageError("--datasets must be at least 1");
  const std::string method = o.method.empty() ? "all" : o.method;
  const sgev::RunSettings settings = to_settings(o);
  const std::vector<sgev::Method> methods = resolve_methods(method, settings);

  const std::vector<sgev::SyntheticDataset> drawn =
      sgev::make_synthetic_suite(o.datasets, sgev::Rng(o.seed));
  std::vector<sgev::BenchmarkDataset> suite(drawn.size());
  for (std::size_t d = 0; d < drawn.size(); ++d) {
    suite[d].name = "synthetic-" + std::to_string(d + 1);
    suite[d].panel = drawn[d].panel;
    suite[d].truth = drawn[d].truth;
  }

  sgev::BenchmarkConfig bench;
  bench.windows = o.windows;
  bench.self_loops = o.self_loops;
  bench.record_timing = o.timings;
  const sgev::BenchmarkResult result = sgev::run_benchmark(suite, methods, bench);

  CliOptions echo = o;
  echo.method = method;
  const json cfg = resolved_config("benchmark", echo, settings);
  json report = sgev::benchmark_to_json(result);
  report["config"] = cfg;
  write_json_file(out_path(o, "report.json"), report);
  const std::string table = sgev::render_benchmark_table(result);
  sgev::atomic_write_text(out_path(o, "report.txt"), meta_prefix(cfg) + table);
  std::cout << table;
  return 0;
}

int run(int argc, char** argv) {
  CliOptions o;
  CLI::App app{"Sparse latent-location modeling of extreme-value time series"};
  app.require_subcommand(1);

  const auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path,
                    "JSON config file; command-line flags take precedence");
    sub->add_option("--seed", o.seed, "Seed for every random stream")
        ->capture_default_str();
    sub->add_option("--out", o.output, "Output directory")->capture_default_str();
  };

  CLI::App* sim = app.add_subcommand(
      "simulate", "Draw a synthetic panel with known dependency structure");
  add_shared(sim);
  sim->add_option("--series", o.series, "Number of series")->capture_default_str();
  sim->add_option("--steps", o.steps, "Number of time steps")->capture_default_str();
  sim->add_option("--lag", o.lag, "Lag order of the generating recursion")
      ->capture_default_str();

  CLI::App* fit = app.add_subcommand("fit", "Fit a dependency model to a panel CSV");
  add_shared(fit);
  fit->add_option("--input", o.input, "Panel CSV path");
  fit->add_option("--method", o.method,
                  "sparse-gev (default), granger, te, or copula");
  fit->add_option("--lambda", o.lambda, "L1 penalty (default: per-method tuned value)");
  fit->add_option("--lag", o.lag, "Lag order")->capture_default_str();
  fit->add_option("--particles", o.particles, "Particle count for the latent filter")
      ->capture_default_str();
  fit->add_option("--tau", o.tau, "Latent transition noise std")->capture_default_str();
  fit->add_option("--marginal", o.marginal, "Copula marginal: gev or empirical")
      ->capture_default_str();
  fit->add_flag("--normalize,!--no-normalize", o.normalize,
                "Min-max scale the panel to [0,1] before fitting (default on)");

  CLI::App* predict = app.add_subcommand(
      "predict", "One-step-ahead forecast from a fitted latent model");
  add_shared(predict);
  predict->add_option("--input", o.input, "Panel CSV path");
  predict->add_option("--model", o.model_path, "Fitted model JSON path");
  predict->add_option("--particles", o.particles, "Particle count for the filter")
      ->capture_default_str();

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score methods on one panel: edge AUC and sliding-window RMSE");
  add_shared(evaluate);
  evaluate->add_option("--input", o.input, "Panel CSV path");
  evaluate->add_option("--truth", o.truth_path, "Ground-truth edge JSON (enables AUC)");
  evaluate->add_option("--methods,--method", o.method,
                       "Method name or 'all' (default all)");
  evaluate->add_option("--lambda", o.lambda,
                       "L1 penalty override for every penalized method");
  evaluate->add_option("--lag", o.lag, "Lag order")->capture_default_str();
  evaluate->add_option("--particles", o.particles, "Particle count")
      ->capture_default_str();
  evaluate->add_option("--tau", o.tau, "Latent transition noise std")
      ->capture_default_str();
  evaluate->add_option("--windows", o.windows, "Sliding prediction windows")
      ->capture_default_str();
  evaluate->add_option("--marginal", o.marginal, "Copula marginal: gev or empirical")
      ->capture_default_str();
  evaluate->add_flag("--self-loops", o.self_loops, "Count self pairs in the AUC");
  evaluate->add_flag("--timings", o.timings, "Record wall times in the JSON report");

  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Regenerate the synthetic suite and score every method");
  add_shared(benchmark);
  benchmark->add_option("--datasets", o.datasets, "Synthetic datasets to draw")
      ->capture_default_str();
  benchmark->add_option("--methods,--method", o.method,
                        "Method name or 'all' (default all)");
  benchmark->add_option("--lambda", o.lambda,
                        "L1 penalty override for every penalized method");
  benchmark->add_option("--lag", o.lag, "Lag order")->capture_default_str();
  benchmark->add_option("--particles", o.particles, "Particle count")
      ->capture_default_str();
  benchmark->add_option("--tau", o.tau, "Latent transition noise std")
      ->capture_default_str();
  benchmark->add_option("--windows", o.windows, "Sliding prediction windows")
      ->capture_default_str();
  benchmark->add_option("--marginal", o.marginal, "Copula marginal: gev or empirical")
      ->capture_default_str();
  benchmark->add_flag("--self-loops", o.self_loops, "Count self pairs in the AUC");
  benchmark->add_flag("--timings", o.timings, "Record wall times in the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    throw sgev::UsageError(e.what());
  }

  CLI::App* active = app.get_subcommands().front();
  apply_config(active, o);
  check_common(o);

  const std::string name = active->get_name();
  if (name == "simulate") return cmd_simulate(o);
  if (name == "fit") return cmd_fit(o);
  if (name == "predict") return cmd_predict(o);
  if (name == "evaluate") return cmd_evaluate(o);
  return cmd_benchmark(o);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sgev::Error& e) {
    std::cerr << "sgev: error: " << e.tag() << ": " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "sgev: error: internal: " << e.what() << "\n";
    return 3;
  }
}
