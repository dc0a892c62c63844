#include "sgev/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "sgev/errors.hpp"
#include "sgev/rng.hpp"

namespace sgev {

double NormalizationRecord::to_unit(int series, double x) const {
  return (x - min(series)) / (max(series) - min(series));
}

double NormalizationRecord::from_unit(int series, double u) const {
  return min(series) + u * (max(series) - min(series));
}

std::pair<TimeSeriesPanel, NormalizationRecord> normalize_panel(
    const TimeSeriesPanel& panel) {
  validate_panel(panel);
  const Eigen::Index P = panel.values.cols();
  NormalizationRecord record;
  record.names = panel.names;
  record.min.resize(P);
  record.max.resize(P);
  TimeSeriesPanel out = panel;
  for (Eigen::Index j = 0; j < P; ++j) {
    const double lo = panel.values.col(j).minCoeff();
    const double hi = panel.values.col(j).maxCoeff();
    if (lo == hi)
      throw DegenerateDataError("series '" + panel.names[static_cast<std::size_t>(j)] +
                                "' is constant and cannot be scaled to [0,1]");
    record.min(j) = lo;
    record.max(j) = hi;
    out.values.col(j) = (panel.values.col(j).array() - lo) / (hi - lo);
  }
  return {std::move(out), std::move(record)};
}

Eigen::VectorXd denormalize_row(const NormalizationRecord& record,
                                const Eigen::VectorXd& unit_row) {
  if (unit_row.size() != record.min.size())
    throw DimensionError("prediction width does not match the normalization record");
  Eigen::VectorXd out(unit_row.size());
  for (Eigen::Index j = 0; j < unit_row.size(); ++j)
    out(j) = record.from_unit(static_cast<int>(j), unit_row(j));
  return out;
}

nlohmann::json normalization_to_json(const NormalizationRecord& record) {
  nlohmann::json j;
  j["names"] = record.names;
  j["min"] = std::vector<double>(record.min.data(), record.min.data() + record.min.size());
  j["max"] = std::vector<double>(record.max.data(), record.max.data() + record.max.size());
  return j;
}

NormalizationRecord normalization_from_json(const nlohmann::json& j) {
  try {
    NormalizationRecord record;
    record.names = j.at("names").get<std::vector<std::string>>();
    const auto lo = j.at("min").get<std::vector<double>>();
    const auto hi = j.at("max").get<std::vector<double>>();
    if (lo.size() != record.names.size() || hi.size() != record.names.size())
      throw ParseError("normalization record sizes disagree");
    record.min = Eigen::Map<const Eigen::VectorXd>(lo.data(),
                                                   static_cast<Eigen::Index>(lo.size()));
    record.max = Eigen::Map<const Eigen::VectorXd>(hi.data(),
                                                   static_cast<Eigen::Index>(hi.size()));
    for (Eigen::Index k = 0; k < record.min.size(); ++k)
      if (!(record.min(k) < record.max(k)))
        throw ParseError("normalization record has an empty range");
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad normalization record: ") + e.what());
  }
}

std::vector<double> block_maxima(std::span<const double> raw, std::int64_t block) {
  if (raw.empty()) throw DegenerateDataError("block maxima of an empty series");
  if (block < 1) throw DimensionError("block length must be at least 1");
  if (std::cmp_less(raw.size(), block))
    throw DimensionError("series shorter than one block");
  std::vector<double> out;
  out.reserve(raw.size() / static_cast<std::size_t>(block));
  for (std::size_t start = 0; start + static_cast<std::size_t>(block) <= raw.size();
       start += static_cast<std::size_t>(block)) {
    double best = raw[start];
    for (std::size_t k = 1; k < static_cast<std::size_t>(block); ++k)
      best = std::max(best, raw[start + k]);
    out.push_back(best);
  }
  return out;
}

double edge_auc(const DependencyGraph& scores, const GroundTruthGraph& truth,
                bool self_loops) {
  validate_graph(scores);
  if (scores.P != truth.P)
    throw DimensionError("score graph and truth cover different series counts");

  struct Pair {
    double score;
    bool positive;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(truth.P) * static_cast<std::size_t>(truth.P));
  for (int src = 0; src < truth.P; ++src) {
    for (int dst = 0; dst < truth.P; ++dst) {
      if (src == dst && !self_loops) continue;
      pairs.push_back({scores.score(src, dst), truth.edge(src, dst)});
    }
  }
  std::size_t n_pos = 0;
  for (const Pair& p : pairs) n_pos += p.positive ? 1 : 0;
  const std::size_t n_neg = pairs.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw UndefinedAucError("ranking needs at least one true edge and one non-edge");

  // Mann-Whitney rank sum with average ranks on ties.
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& a, const Pair& b) { return a.score < b.score; });
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j].score == pairs[i].score) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (pairs[k].positive) pos_rank_sum += avg_rank;
    i = j;
  }
  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                                      static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

nlohmann::json report_to_json(const EvalReport& report, bool include_timing) {
  nlohmann::json j;
  j["method"] = report.method;
  if (report.has_auc)
    j["auc"] = report.auc;
  else
    j["auc"] = nullptr;
  if (report.has_rmse)
    j["rmse"] = report.rmse;
  else
    j["rmse"] = nullptr;
  nlohmann::json errs = nlohmann::json::array();
  for (const Eigen::VectorXd& w : report.window_errors)
    errs.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  j["window_errors"] = std::move(errs);
  j["window_failures"] = report.window_failures;
  j["notes"] = report.notes;
  j["partial"] = report.partial;
  if (include_timing) j["wall_seconds"] = report.wall_seconds;
  return j;
}

EvalReport sliding_window_rmse(const TimeSeriesPanel& panel, const Method& method,
                               int windows, std::uint64_t salt_base) {
  validate_panel(panel);
  if (windows < 1) throw DimensionError("window count must be at least 1");
  const Eigen::Index T = panel.steps();
  const Eigen::Index P = panel.values.cols();
  const Eigen::Index train_len = T - windows;
  if (train_len <= method.lag + 1)
    throw DimensionError("panel too short: " + std::to_string(windows) +
                         " windows leave training length " + std::to_string(train_len) +
                         " for lag " + std::to_string(method.lag));

  EvalReport report;
  report.method = method.name;
  report.window_errors.assign(static_cast<std::size_t>(windows), Eigen::VectorXd());
  report.window_failures.assign(static_cast<std::size_t>(windows), std::string());

  double sq_sum = 0.0;
  Eigen::Index clean = 0;
  for (int s = 1; s <= windows; ++s) {
    const Eigen::Index first = s - 1;
    const Eigen::Index test_row = first + train_len;
    try {
      const TimeSeriesPanel train = panel.window(first, train_len);
      const MethodOutput out =
          method.run(train, mix_seed(salt_base, static_cast<std::uint64_t>(s)));
      Eigen::MatrixXd recent(out.lag, P);
      for (int l = 0; l < out.lag; ++l)
        recent.row(l) = train.values.row(train_len - 1 - l);
      const Eigen::VectorXd predicted = out.predict_next(recent);
      if (predicted.size() != P)
        throw DimensionError("predictor returned the wrong number of series");
      const Eigen::VectorXd err = predicted - panel.values.row(test_row).transpose();
      report.window_errors[static_cast<std::size_t>(s - 1)] = err;
      sq_sum += err.squaredNorm();
      ++clean;
    } catch (const Error& e) {
      report.window_failures[static_cast<std::size_t>(s - 1)] = e.what();
      report.partial = true;
    }
  }
  if (clean > 0) {
    report.has_rmse = true;
    report.rmse = std::sqrt(sq_sum / static_cast<double>(clean * P));
  }
  return report;
}

namespace {

std::string format_cell(bool present, double value) {
  if (!present) return "   n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%6.4f", value);
  return buf;
}

}  // namespace

BenchmarkResult run_benchmark(const std::vector<BenchmarkDataset>& suite,
                              const std::vector<Method>& methods,
                              const BenchmarkConfig& cfg) {
  if (suite.empty()) throw DimensionError("benchmark needs at least one dataset");
  if (methods.empty()) throw DimensionError("benchmark needs at least one method");

  BenchmarkResult result;
  result.config = cfg;
  for (std::size_t d = 0; d < suite.size(); ++d) {
    const BenchmarkDataset& dataset = suite[d];
    auto [normalized, record] = normalize_panel(dataset.panel);
    (void)record;
    const std::uint64_t dataset_salt = static_cast<std::uint64_t>(d) + 1;
    for (const Method& method : methods) {
      const auto started = std::chrono::steady_clock::now();
      BenchmarkCell cell;
      cell.dataset = dataset.name;
      cell.report.method = method.name;
      try {
        const MethodOutput out =
            method.run(normalized, mix_seed(dataset_salt, 0));
        cell.report.auc = edge_auc(out.graph, dataset.truth, cfg.self_loops);
        cell.report.has_auc = true;
      } catch (const Error& e) {
        cell.report.notes.push_back(std::string("graph task failed: ") + e.what());
        cell.report.partial = true;
      }
      try {
        EvalReport pred =
            sliding_window_rmse(normalized, method, cfg.windows, dataset_salt);
        cell.report.has_rmse = pred.has_rmse;
        cell.report.rmse = pred.rmse;
        cell.report.window_errors = std::move(pred.window_errors);
        cell.report.window_failures = std::move(pred.window_failures);
        cell.report.partial = cell.report.partial || pred.partial;
      } catch (const Error& e) {
        cell.report.notes.push_back(std::string("prediction task failed: ") + e.what());
        cell.report.partial = true;
      }
      cell.report.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
              .count();
      result.cells.push_back(std::move(cell));
    }
  }

  std::vector<std::string> order;
  order.reserve(methods.size());
  for (const Method& method : methods) order.push_back(method.name);
  summarize_benchmark(result, order);
  return result;
}

void summarize_benchmark(BenchmarkResult& result,
                         const std::vector<std::string>& method_order) {
  result.summary.clear();
  for (const std::string& name : method_order) {
    MethodSummary s;
    s.method = name;
    for (const BenchmarkCell& cell : result.cells) {
      if (cell.report.method != name) continue;
      if (cell.report.has_auc) {
        s.mean_auc += cell.report.auc;
        ++s.auc_cells;
      }
      if (cell.report.has_rmse) {
        s.mean_rmse += cell.report.rmse;
        ++s.rmse_cells;
      }
      if (cell.report.partial) ++s.failed_cells;
    }
    if (s.auc_cells > 0) s.mean_auc /= s.auc_cells;
    if (s.rmse_cells > 0) s.mean_rmse /= s.rmse_cells;
    result.summary.push_back(std::move(s));
  }
}

std::string render_benchmark_table(const BenchmarkResult& result) {
  const auto datasets = static_cast<int>(result.cells.size() /
                                         std::max<std::size_t>(1, result.summary.size()));
  std::string out;
  out += "# datasets: " + std::to_string(datasets) +
         ", prediction windows: " + std::to_string(result.config.windows) + "\n";
  out += std::string("# AUC pair policy: self pairs ") +
         (result.config.self_loops ? "included" : "excluded") + "\n";
  out += "# panels min-max scaled to [0,1] before fitting; RMSE is in scaled units\n";
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s  %8s  %8s  %s\n", "method", "mean AUC",
                "mean RMSE", "clean cells");
  out += line;
  for (const MethodSummary& s : result.summary) {
    const int cells = datasets;
    std::snprintf(line, sizeof(line), "%-12s  %8s  %8s  %d/%d\n", s.method.c_str(),
                  format_cell(s.auc_cells > 0, s.mean_auc).c_str(),
                  format_cell(s.rmse_cells > 0, s.mean_rmse).c_str(),
                  cells - s.failed_cells, cells);
    out += line;
  }
  return out;
}

nlohmann::json benchmark_to_json(const BenchmarkResult& result) {
  nlohmann::json j;
  j["config"]["windows"] = result.config.windows;
  j["config"]["self_loops"] = result.config.self_loops;
  nlohmann::json cells = nlohmann::json::array();
  for (const BenchmarkCell& cell : result.cells) {
    nlohmann::json c = report_to_json(cell.report, result.config.record_timing);
    c["dataset"] = cell.dataset;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  nlohmann::json summary = nlohmann::json::array();
  for (const MethodSummary& s : result.summary) {
    nlohmann::json row;
    row["method"] = s.method;
    if (s.auc_cells > 0)
      row["mean_auc"] = s.mean_auc;
    else
      row["mean_auc"] = nullptr;
    if (s.rmse_cells > 0)
      row["mean_rmse"] = s.mean_rmse;
    else
      row["mean_rmse"] = nullptr;
    row["auc_cells"] = s.auc_cells;
    row["rmse_cells"] = s.rmse_cells;
    row["failed_cells"] = s.failed_cells;
    summary.push_back(std::move(row));
  }
  j["summary"] = std::move(summary);
  return j;
}

}  // namespace sgev
