#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace sgev {

// Wide panel: one column per series, one row per time step.
// The value block carries no gaps; ingestion rejects missing cells.
struct TimeSeriesPanel {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  double t0 = 0.0;
  double interval = 1.0;

  Eigen::Index steps() const { return values.rows(); }
  Eigen::Index series() const { return values.cols(); }

  // Row slice [first, first + count), names and metadata preserved.
  TimeSeriesPanel window(Eigen::Index first, Eigen::Index count) const;
};

void validate_panel(const TimeSeriesPanel& panel);

// Latent location path, same shape as the panel it explains.
struct LatentPath {
  Eigen::MatrixXd mu;
};

}  // namespace sgev
