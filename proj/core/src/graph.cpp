#include "sgev/graph.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <string>

#include "sgev/errors.hpp"

namespace sgev {

const GraphEdge* DependencyGraph::find(int src, int dst) const {
  for (const auto& e : edges) {
    if (e.src == src && e.dst == dst) return &e;
  }
  return nullptr;
}

double DependencyGraph::score(int src, int dst) const {
  const GraphEdge* e = find(src, dst);
  return e ? e->score : 0.0;
}

void validate_graph(const DependencyGraph& graph) {
  std::set<std::pair<int, int>> seen;
  for (const auto& e : graph.edges) {
    if (e.src < 0 || e.src >= graph.P || e.dst < 0 || e.dst >= graph.P) {
      throw DimensionError("graph edge (" + std::to_string(e.src) + "," +
                           std::to_string(e.dst) + ") out of range for P=" +
                           std::to_string(graph.P));
    }
    if (!std::isfinite(e.score) || e.score < 0.0) {
      throw DomainError("graph edge score must be finite and non-negative");
    }
    if (!seen.insert({e.src, e.dst}).second) {
      throw DimensionError("duplicate edge record for (" + std::to_string(e.src) + "," +
                           std::to_string(e.dst) + ")");
    }
  }
}

GroundTruthGraph make_truth(int P) {
  GroundTruthGraph g;
  g.P = P;
  g.adjacency.assign(static_cast<std::size_t>(P) * static_cast<std::size_t>(P), 0);
  return g;
}

nlohmann::json graph_to_json(const DependencyGraph& graph) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    if (e.lag_weights.empty()) {
      records.push_back({{"src", e.src}, {"dst", e.dst}, {"lag", 0}, {"weight", e.score}});
      continue;
    }
    for (std::size_t l = 0; l < e.lag_weights.size(); ++l) {
      if (e.lag_weights[l] == 0.0) continue;
      records.push_back({{"src", e.src},
                         {"dst", e.dst},
                         {"lag", static_cast<int>(l + 1)},
                         {"weight", e.lag_weights[l]}});
    }
  }
  return nlohmann::json{{"P", graph.P},
                        {"self_loops", graph.includes_self_loops},
                        {"edges", records}};
}

DependencyGraph graph_from_json(const nlohmann::json& j) {
  DependencyGraph graph;
  graph.P = j.at("P").get<int>();
  graph.includes_self_loops = j.value("self_loops", true);
  int max_lag = 0;
  for (const auto& rec : j.at("edges")) {
    max_lag = std::max(max_lag, rec.at("lag").get<int>());
  }
  for (const auto& rec : j.at("edges")) {
    const int src = rec.at("src").get<int>();
    const int dst = rec.at("dst").get<int>();
    const int lag = rec.at("lag").get<int>();
    const double w = rec.at("weight").get<double>();
    GraphEdge* e = nullptr;
    for (auto& cand : graph.edges) {
      if (cand.src == src && cand.dst == dst) {
        e = &cand;
        break;
      }
    }
    if (e == nullptr) {
      graph.edges.push_back(GraphEdge{src, dst, 0.0, {}});
      e = &graph.edges.back();
    }
    if (lag == 0) {
      e->score = std::max(e->score, w);
    } else {
      if (static_cast<int>(e->lag_weights.size()) < max_lag) e->lag_weights.resize(max_lag, 0.0);
      e->lag_weights[static_cast<std::size_t>(lag - 1)] = w;
      e->score = std::max(e->score, std::abs(w));
    }
  }
  validate_graph(graph);
  return graph;
}

nlohmann::json truth_to_json(const GroundTruthGraph& truth) {
  nlohmann::json records = nlohmann::json::array();
  for (int src = 0; src < truth.P; ++src) {
    for (int dst = 0; dst < truth.P; ++dst) {
      if (truth.edge(src, dst)) records.push_back({{"src", src}, {"dst", dst}});
    }
  }
  return nlohmann::json{{"P", truth.P}, {"edges", records}};
}

GroundTruthGraph truth_from_json(const nlohmann::json& j) {
  GroundTruthGraph truth = make_truth(j.at("P").get<int>());
  for (const auto& rec : j.at("edges")) {
    truth.set(rec.at("src").get<int>(), rec.at("dst").get<int>(), true);
  }
  return truth;
}

}  // namespace sgev
