#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <vector>

namespace sgev {

// One scored ordered pair src -> dst.  lag_weights, when present, holds
// the per-lag coefficients (index 0 = lag 1) behind the score.
struct GraphEdge {
  int src = 0;
  int dst = 0;
  double score = 0.0;
  std::vector<double> lag_weights;
};

// Scored directed graph over P series.  At most one edge record per
// ordered pair; absent pairs score 0.
struct DependencyGraph {
  int P = 0;
  bool includes_self_loops = true;
  std::vector<GraphEdge> edges;

  double score(int src, int dst) const;
  const GraphEdge* find(int src, int dst) const;
};

void validate_graph(const DependencyGraph& graph);

// Boolean adjacency derived from a generating model: edge src -> dst iff
// any lag coefficient of dst on src is non-zero.
struct GroundTruthGraph {
  int P = 0;
  std::vector<std::uint8_t> adjacency;  // row-major [src * P + dst]

  bool edge(int src, int dst) const {
    return adjacency[static_cast<std::size_t>(src) * static_cast<std::size_t>(P) +
                     static_cast<std::size_t>(dst)] != 0;
  }
  void set(int src, int dst, bool value) {
    adjacency[static_cast<std::size_t>(src) * static_cast<std::size_t>(P) +
              static_cast<std::size_t>(dst)] = value ? 1 : 0;
  }
};

GroundTruthGraph make_truth(int P);

// Flat {src, dst, lag, weight} records; lag 0 marks a score without lag
// resolution.  Round-trips through graph_from_json.
nlohmann::json graph_to_json(const DependencyGraph& graph);
DependencyGraph graph_from_json(const nlohmann::json& j);

nlohmann::json truth_to_json(const GroundTruthGraph& truth);
GroundTruthGraph truth_from_json(const nlohmann::json& j);

}  // namespace sgev
