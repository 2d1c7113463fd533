#include "tourexp/community.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tourexp/errors.hpp"

namespace tourexp {

namespace {

double plogp(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

}  // namespace

int FlowGraph::index_of(const std::string& key) const {
  auto it = std::lower_bound(node_keys.begin(), node_keys.end(), key);
  if (it == node_keys.end() || *it != key)
    throw Error("flow graph: unknown node '" + key + "'");
  return static_cast<int>(it - node_keys.begin());
}

FlowGraph FlowGraph::from_edges(std::vector<std::string> keys,
                                std::vector<std::tuple<int, int, double>> edges) {
  FlowGraph g;
  g.node_keys = std::move(keys);
  if (!std::is_sorted(g.node_keys.begin(), g.node_keys.end()))
    throw Error("flow graph: node keys must be sorted");
  const int n = g.node_count();
  for (auto& [a, b, w] : edges) {
    if (a > b) std::swap(a, b);
    if (a == b) throw Error("flow graph: self-loops are not allowed");
    if (a < 0 || b >= n) throw Error("flow graph: edge endpoint out of range");
    if (!(w > 0)) throw Error("flow graph: edge weights must be positive");
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (std::get<0>(edges[i]) == std::get<0>(edges[i - 1]) &&
        std::get<1>(edges[i]) == std::get<1>(edges[i - 1]))
      throw Error("flow graph: duplicate edge");
  g.edges = std::move(edges);

  g.adj.assign(n, {});
  std::vector<double> strength(n, 0.0);
  for (const auto& [a, b, w] : g.edges) {
    g.adj[a].push_back({b, w});
    g.adj[b].push_back({a, w});
    strength[a] += w;
    strength[b] += w;
    g.total_weight += w;
  }
  g.visit_rate.assign(n, 0.0);
  int isolated = 0;
  for (int i = 0; i < n; ++i) {
    if (strength[i] == 0) {
      ++isolated;  // zero flow
    } else {
      g.visit_rate[i] = strength[i] / (2.0 * g.total_weight);
    }
  }
  if (isolated > 0)
    g.warnings.push_back(std::to_string(isolated) + " isolated nodes carry zero flow");
  return g;
}

FlowGraph FlowGraph::from_similarity(const SimMatrix& sim, double min_similarity) {
  std::vector<std::tuple<int, int, double>> edges;
  const int n = static_cast<int>(sim.entities.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double w = sim.rho[i][j];
      if (w > 0 && w >= min_similarity) edges.push_back({i, j, w});
    }
  return from_edges(sim.entities, std::move(edges));
}

std::map<std::string, int> Partition::by_key(const FlowGraph& graph) const {
  std::map<std::string, int> out;
  for (int i = 0; i < graph.node_count(); ++i)
    out[graph.node_keys[i]] = module_of[i];
  return out;
}

double map_equation_codelength(const FlowGraph& graph, const std::vector<int>& assignment) {
  const int n = graph.node_count();
  if (static_cast<int>(assignment.size()) != n)
    throw Error("map equation: assignment size does not match the graph");
  if (n == 0) throw Error("map equation: empty graph");
  if (graph.total_weight <= 0) return 0.0;

  // Normalize module ids to 0..m-1.
  std::map<int, int> ids;
  std::vector<int> mod(n);
  for (int i = 0; i < n; ++i)
    mod[i] = ids.emplace(assignment[i], static_cast<int>(ids.size())).first->second;
  const int m = static_cast<int>(ids.size());

  std::vector<double> exit_rate(m, 0.0), inside(m, 0.0);
  for (int i = 0; i < n; ++i) inside[mod[i]] += graph.visit_rate[i];
  for (const auto& [a, b, w] : graph.edges)
    if (mod[a] != mod[b]) {
      const double flow = w / (2.0 * graph.total_weight);
      exit_rate[mod[a]] += flow;
      exit_rate[mod[b]] += flow;
    }

  // L = plogp(q) - 2 sum_m plogp(q_m) + sum_m plogp(q_m + p_m) - sum_a plogp(p_a)
  double q = 0, sum_q = 0, sum_p = 0;
  for (int j = 0; j < m; ++j) {
    q += exit_rate[j];
    sum_q += plogp(exit_rate[j]);
    sum_p += plogp(exit_rate[j] + inside[j]);
  }
  double node_term = 0;
  for (int i = 0; i < n; ++i) node_term += plogp(graph.visit_rate[i]);
  return plogp(q) - 2.0 * sum_q + sum_p - node_term;
}

namespace {

// Working view of the (possibly aggregated) graph during the search.
// `p` carries original visit-rate mass; self-loops are dropped because they
// never cross a module boundary.
struct WorkGraph {
  std::vector<double> p;
  std::vector<double> ext_strength;
  std::vector<std::vector<std::pair<int, double>>> adj;
  double two_w = 0;  // 2 * total weight of the original graph

  int n() const { return static_cast<int>(p.size()); }
};

constexpr double kGain = 1e-12;  // required codelength improvement, in bits

// Module bookkeeping for incremental move evaluation.
struct MoveState {
  const WorkGraph& g;
  std::vector<int> module_of;
  std::vector<double> wout, psum;
  std::vector<int> size;
  double q = 0, sum_q = 0, sum_p = 0;

  explicit MoveState(const WorkGraph& graph, const std::vector<int>& initial) : g(graph) {
    const int n = g.n();
    module_of = initial;
    wout.assign(n, 0.0);
    psum.assign(n, 0.0);
    size.assign(n, 0);
    for (int i = 0; i < n; ++i) {
      psum[module_of[i]] += g.p[i];
      size[module_of[i]] += 1;
    }
    for (int i = 0; i < n; ++i)
      for (const auto& [j, w] : g.adj[i])
        if (module_of[i] != module_of[j]) wout[module_of[i]] += w;
    recompute_sums();
  }

  void recompute_sums() {
    q = sum_q = sum_p = 0;
    for (int m = 0; m < g.n(); ++m) {
      if (size[m] == 0) continue;
      const double qm = wout[m] / g.two_w;
      q += qm;
      sum_q += plogp(qm);
      sum_p += plogp(qm + psum[m]);
    }
  }

  double partial() const { return plogp(q) - 2.0 * sum_q + sum_p; }

  // Codelength delta (partial terms only) of moving node i to module target.
  double delta(int i, int target, double link_cur, double link_tgt) const {
    const int cur = module_of[i];
    if (cur == target) return 0.0;
    const double qa = wout[cur] / g.two_w;
    const double qb = wout[target] / g.two_w;
    const double qa2 = (wout[cur] - g.ext_strength[i] + 2.0 * link_cur) / g.two_w;
    const double qb2 = (wout[target] + g.ext_strength[i] - 2.0 * link_tgt) / g.two_w;
    const double q2 = q - qa - qb + qa2 + qb2;
    double d = plogp(q2) - plogp(q);
    d -= 2.0 * (plogp(qa2) + plogp(qb2) - plogp(qa) - plogp(qb));
    d += plogp(qa2 + psum[cur] - g.p[i]) + plogp(qb2 + psum[target] + g.p[i]) -
         plogp(qa + psum[cur]) - plogp(qb + psum[target]);
    return d;
  }

  void apply(int i, int target, double link_cur, double link_tgt) {
    const int cur = module_of[i];
    wout[cur] += 2.0 * link_cur - g.ext_strength[i];
    wout[target] += g.ext_strength[i] - 2.0 * link_tgt;
    psum[cur] -= g.p[i];
    psum[target] += g.p[i];
    size[cur] -= 1;
    size[target] += 1;
    module_of[i] = target;
    recompute_sums();  // graphs are desk scale; favor exactness over speed
  }
};

// Repeated seeded sweeps of single-node moves until none improves.
bool local_move(const WorkGraph& g, std::vector<int>& module_of, std::mt19937_64& rng) {
  MoveState state(g, module_of);
  const int n = g.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> link(n, 0.0);

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    std::shuffle(order.begin(), order.end(), rng);
    for (int idx = 0; idx < n; ++idx) {
      const int i = order[idx];
      const int cur = state.module_of[i];

      // Candidate modules: neighbors' modules plus one empty module,
      // examined in ascending id so ties resolve toward the lowest key.
      std::vector<int> candidates;
      for (const auto& [j, w] : g.adj[i]) {
        link[state.module_of[j]] += w;
        candidates.push_back(state.module_of[j]);
      }
      if (state.size[cur] > 1) {
        for (int m = 0; m < n; ++m)
          if (state.size[m] == 0) {
            candidates.push_back(m);
            break;
          }
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

      int best = cur;
      double best_delta = 0.0;
      for (int target : candidates) {
        if (target == cur) continue;
        const double d = state.delta(i, target, link[cur], link[target]);
        if (d < best_delta - kGain) {
          best_delta = d;
          best = target;
        }
      }
      if (best != cur) {
        state.apply(i, best, link[cur], link[best]);
        moved = true;
        any_move = true;
      }
      for (const auto& [j, w] : g.adj[i]) link[state.module_of[j]] = 0.0;
      link[cur] = 0.0;
      if (best != cur) link[best] = 0.0;
    }
  }
  module_of = state.module_of;
  return any_move;
}

// Renumber module ids consecutively in order of first appearance.
int normalize(std::vector<int>& module_of) {
  std::map<int, int> ids;
  for (int& m : module_of) m = ids.emplace(m, static_cast<int>(ids.size())).first->second;
  return static_cast<int>(ids.size());
}

WorkGraph aggregate(const WorkGraph& g, const std::vector<int>& module_of, int m) {
  WorkGraph out;
  out.two_w = g.two_w;
  out.p.assign(m, 0.0);
  for (int i = 0; i < g.n(); ++i) out.p[module_of[i]] += g.p[i];
  std::map<std::pair<int, int>, double> merged;
  for (int i = 0; i < g.n(); ++i)
    for (const auto& [j, w] : g.adj[i]) {
      if (i >= j) continue;  // each edge once
      const int a = module_of[i], b = module_of[j];
      if (a == b) continue;  // interior weight never crosses a boundary again
      merged[std::minmax(a, b)] += w;
    }
  out.adj.assign(m, {});
  out.ext_strength.assign(m, 0.0);
  for (const auto& [key, w] : merged) {
    out.adj[key.first].push_back({key.second, w});
    out.adj[key.second].push_back({key.first, w});
    out.ext_strength[key.first] += w;
    out.ext_strength[key.second] += w;
  }
  return out;
}

std::vector<int> run_trial(const WorkGraph& base, std::mt19937_64& rng) {
  const int n = base.n();
  std::vector<int> assignment(n);
  std::iota(assignment.begin(), assignment.end(), 0);

  // Outer loop: node-level fine-tuning followed by hierarchical aggregation,
  // restarted from the flattened assignment until nothing improves.
  for (int round = 0; round < 64; ++round) {
    bool improved = local_move(base, assignment, rng);

    int m = normalize(assignment);
    WorkGraph level = aggregate(base, assignment, m);
    std::vector<int> flat = assignment;  // original node -> current module
    while (m > 1) {
      std::vector<int> level_assignment(m);
      std::iota(level_assignment.begin(), level_assignment.end(), 0);
      if (!local_move(level, level_assignment, rng)) break;
      const int next_m = normalize(level_assignment);
      if (next_m == m) break;
      for (int i = 0; i < n; ++i) flat[i] = level_assignment[flat[i]];
      level = aggregate(level, level_assignment, next_m);
      m = next_m;
      improved = true;
    }
    assignment = flat;
    if (!improved) break;
  }
  normalize(assignment);
  return assignment;
}

}  // namespace

Partition detect_communities(const FlowGraph& graph, std::uint64_t seed) {
  const int n = graph.node_count();
  if (n == 0) throw Error("detect_communities: empty graph");

  WorkGraph base;
  base.p = graph.visit_rate;
  base.two_w = 2.0 * graph.total_weight;
  base.adj.assign(n, {});
  base.ext_strength.assign(n, 0.0);
  for (const auto& [a, b, w] : graph.edges) {
    base.adj[a].push_back({b, w});
    base.adj[b].push_back({a, w});
    base.ext_strength[a] += w;
    base.ext_strength[b] += w;
  }

  std::vector<int> best;
  double best_codelength = 0;
  if (graph.total_weight > 0) {
    constexpr int kTrials = 8;
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < kTrials; ++trial) {
      std::mt19937_64 trial_rng(rng());
      std::vector<int> assignment = run_trial(base, trial_rng);
      const double codelength = map_equation_codelength(graph, assignment);
      if (best.empty() || codelength < best_codelength - kGain) {
        best = std::move(assignment);
        best_codelength = codelength;
      }
    }
  }

  // Never lose to the trivial partitions.
  std::vector<int> one_module(n, 0), singletons(n);
  std::iota(singletons.begin(), singletons.end(), 0);
  for (const auto& candidate : {one_module, singletons}) {
    const double codelength = map_equation_codelength(graph, candidate);
    if (best.empty() || codelength < best_codelength - kGain) {
      best = candidate;
      best_codelength = codelength;
    }
  }

  Partition out;
  out.module_of = std::move(best);
  out.module_count = normalize(out.module_of);
  out.codelength = map_equation_codelength(graph, out.module_of);
  return out;
}

}  // namespace tourexp
