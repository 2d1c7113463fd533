#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "tourexp/spaces.hpp"

namespace tourexp {

/// Undirected weighted graph with the flow quantities of the map equation:
/// node visit rates proportional to strength, edge flows proportional to
/// weight. Non-positive weights are rejected at entry.
struct FlowGraph {
  std::vector<std::string> node_keys;                   // sorted
  std::vector<std::tuple<int, int, double>> edges;      // (a < b, weight > 0)
  std::vector<std::vector<std::pair<int, double>>> adj; // derived
  std::vector<double> visit_rate;                       // sums to 1 (isolated nodes: 0)
  double total_weight = 0;                              // sum of edge weights
  std::vector<std::string> warnings;

  int node_count() const { return static_cast<int>(node_keys.size()); }
  int index_of(const std::string& key) const;

  /// Keeps edges with similarity > min_similarity (and > 0).
  static FlowGraph from_similarity(const SimMatrix& sim, double min_similarity = 0.0);
  static FlowGraph from_edges(std::vector<std::string> keys,
                              std::vector<std::tuple<int, int, double>> edges);
};

/// Assignment of every node to a module, with the two-level map-equation
/// codelength of that assignment in bits.
struct Partition {
  std::vector<int> module_of;  // node index -> module id, 0..module_count-1
  double codelength = 0;
  int module_count = 0;

  std::map<std::string, int> by_key(const FlowGraph& graph) const;
};

/// Two-level map equation L(M) = q H(Q) + sum_m p_m H(P_m), in bits, for an
/// undirected flow model (visit rate proportional to node strength, no
/// teleportation). Isolated nodes carry zero flow.
double map_equation_codelength(const FlowGraph& graph, const std::vector<int>& assignment);

/// Greedy agglomerative search: seeded sweeps of single-node moves plus
/// module aggregation, repeated until the codelength stops improving, with
/// a fixed number of restarts derived from the seed. Deterministic for a
/// given seed. The result never loses to the one-module or the singleton
/// partition.
Partition detect_communities(const FlowGraph& graph, std::uint64_t seed);

}  // namespace tourexp
