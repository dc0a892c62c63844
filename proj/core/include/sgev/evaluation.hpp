#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgev/graph.hpp"
#include "sgev/panel.hpp"

namespace sgev {

// Per-series min/max retained so predictions made in [0,1] units can be
// mapped back to original units.
struct NormalizationRecord {
  std::vector<std::string> names;
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  double to_unit(int series, double x) const;
  double from_unit(int series, double u) const;
};

// Min-max scales every series to [0,1].  Constant series have no scale
// and are rejected.
std::pair<TimeSeriesPanel, NormalizationRecord> normalize_panel(
    const TimeSeriesPanel& panel);

Eigen::VectorXd denormalize_row(const NormalizationRecord& record,
                                const Eigen::VectorXd& unit_row);

nlohmann::json normalization_to_json(const NormalizationRecord& record);
NormalizationRecord normalization_from_json(const nlohmann::json& j);

// Non-overlapping block maxima; a trailing partial block is dropped.
std::vector<double> block_maxima(std::span<const double> raw, std::int64_t block);

// Probability that a random true edge outranks a random non-edge under
// the graph's scores; ties earn half credit; pairs absent from the graph
// score 0.  Self pairs are excluded unless self_loops is set.
double edge_auc(const DependencyGraph& scores, const GroundTruthGraph& truth,
                bool self_loops = false);

// A fitted method's answers for one training panel: an edge-score graph
// and a one-step-ahead predictor fed the last `lag` observed rows
// (row 0 = most recent).
struct MethodOutput {
  DependencyGraph graph;
  int lag = 1;
  std::function<Eigen::VectorXd(const Eigen::MatrixXd& recent)> predict_next;
};

// A named fit procedure.  The salt folds the dataset/window identity into
// whatever randomness the method uses, keeping runs reproducible.
struct Method {
  std::string name;
  int lag = 1;
  std::function<MethodOutput(const TimeSeriesPanel& train, std::uint64_t salt)> run;
};

struct EvalReport {
  std::string method;
  bool has_auc = false;
  double auc = 0.0;
  bool has_rmse = false;
  double rmse = 0.0;
  // One entry per window: prediction minus truth per series, empty when
  // that window's fit failed.
  std::vector<Eigen::VectorXd> window_errors;
  std::vector<std::string> window_failures;  // empty string = clean window
  std::vector<std::string> notes;
  bool partial = false;
  double wall_seconds = 0.0;
};

nlohmann::json report_to_json(const EvalReport& report, bool include_timing = false);

// Rolling-origin evaluation: for s = 1..windows, fit on rows
// [s-1, T-windows+s-1) and score the one-step forecast of row
// T-windows+s-1.  RMSE averages the squared errors over every clean
// window and series.
EvalReport sliding_window_rmse(const TimeSeriesPanel& panel, const Method& method,
                               int windows, std::uint64_t salt_base = 0);

struct BenchmarkDataset {
  std::string name;
  TimeSeriesPanel panel;
  GroundTruthGraph truth;
};

struct BenchmarkConfig {
  int windows = 10;
  bool self_loops = false;    // AUC pair policy
  bool record_timing = false; // wall times in the JSON report
};

struct BenchmarkCell {
  std::string dataset;
  EvalReport report;
};

struct MethodSummary {
  std::string method;
  int auc_cells = 0;
  int rmse_cells = 0;
  int failed_cells = 0;
  double mean_auc = 0.0;
  double mean_rmse = 0.0;
};

struct BenchmarkResult {
  BenchmarkConfig config;
  std::vector<BenchmarkCell> cells;      // dataset-major, method-minor order
  std::vector<MethodSummary> summary;
};

// Normalizes every panel, runs every method on every dataset for the
// graph task (AUC) and the prediction task (sliding-window RMSE), and
// aggregates per-method means.  Failures are confined to their cell.
BenchmarkResult run_benchmark(const std::vector<BenchmarkDataset>& suite,
                              const std::vector<Method>& methods,
                              const BenchmarkConfig& cfg);

// Rebuilds result.summary from result.cells in the given method order.
void summarize_benchmark(BenchmarkResult& result,
                         const std::vector<std::string>& method_order);

std::string render_benchmark_table(const BenchmarkResult& result);
nlohmann::json benchmark_to_json(const BenchmarkResult& result);

}  // namespace sgev
