#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sigstab/error.hpp"
#include "sigstab/graph.hpp"
#include "sigstab/ranking.hpp"

namespace sigstab::motifs {

inline constexpr std::size_t kMinCycle = 3;
inline constexpr std::size_t kMaxCycle = 6;
inline constexpr std::size_t kDefaultNodeGuard = 16;

/// Directed simple cycle stored in canonical rotation (smallest node first).
struct DirectedCycle {
  std::vector<NodeId> nodes;
  double weight_product = 1.0;
  bool imbalanced = false;

  bool contains(NodeId v) const {
    for (NodeId u : nodes)
      if (u == v) return true;
    return false;
  }
  friend bool operator==(const DirectedCycle&, const DirectedCycle&) = default;
};

namespace detail {

inline void check_length(std::size_t k) {
  if (k < kMinCycle || k > kMaxCycle)
    throw BadParameter("cycle length " + std::to_string(k) + " outside supported range [3, 6]");
}

inline void check_guard(const SignedDigraph& g, std::size_t guard) {
  if (g.size() > guard)
    throw TooLarge("graph has " + std::to_string(g.size()) + " nodes; exact cycle enumeration is limited to " +
                   std::to_string(guard));
}

struct CycleSearch {
  const SignedDigraph& g;
  std::size_t length;
  NodeId start = 0;
  std::vector<NodeId> path;
  std::vector<bool> on_path;
  std::vector<DirectedCycle>& out;

  void extend(NodeId v, double product) {
    if (path.size() == length) {
      if (!g.has_edge(v, start)) return;
      const double w = product * g.weight(v, start);
      out.push_back(DirectedCycle{path, w, w < 0.0});
      return;
    }
    for (NodeId next = start + 1; next < g.size(); ++next) {
      if (on_path[next] || !g.has_edge(v, next)) continue;
      on_path[next] = true;
      path.push_back(next);
      extend(next, product * g.weight(v, next));
      path.pop_back();
      on_path[next] = false;
    }
  }
};

}  // namespace detail

/// Every directed simple cycle through exactly k distinct nodes. Self-loops are never cycle edges.
/// Depth-first search rooted at each cycle's smallest node, so each cycle is produced once.
inline std::vector<DirectedCycle> enumerate_simple_cycles(const SignedDigraph& g, std::size_t k,
                                                          std::size_t guard = kDefaultNodeGuard) {
  detail::check_length(k);
  detail::check_guard(g, guard);
  std::vector<DirectedCycle> out;
  detail::CycleSearch search{g, k, 0, {}, std::vector<bool>(g.size(), false), out};
  for (NodeId s = 0; s < g.size(); ++s) {
    search.start = s;
    search.path.assign(1, s);
    search.on_path.assign(g.size(), false);
    search.on_path[s] = true;
    search.extend(s, 1.0);
  }
  return out;
}

/// Sum of weight products of imbalanced cycles through node, divided by total_degree^2.
inline double imbalanced_score(const SignedDigraph& g, NodeId node, std::span<const DirectedCycle> cycles) {
  g.check_node(node);
  double sum = 0.0;
  for (const auto& c : cycles)
    if (c.imbalanced && c.contains(node)) sum += c.weight_product;
  const auto d = static_cast<double>(total_degree(g, node));
  return d == 0.0 ? 0.0 : sum / (d * d);
}

inline double imbalanced_motif_score(const SignedDigraph& g, NodeId node, std::size_t k,
                                     std::size_t guard = kDefaultNodeGuard) {
  g.check_node(node);
  return imbalanced_score(g, node, enumerate_simple_cycles(g, k, guard));
}

struct MotifScoreRow {
  NodeId node = 0;
  std::vector<double> w;  // w[k - 3] for each computed size k
  double total_cost = 0.0;

  double w_k(std::size_t k) const { return w.at(k - kMinCycle); }
};

inline double cost_from_terms(std::span<const double> w) {
  double p = 1.0;
  for (double v : w) p *= v;
  return std::cbrt(std::abs(p));
}

/// Scores for every node over cycle sizes 3..max_size. Cycles are enumerated once per size.
inline std::vector<MotifScoreRow> motif_table(const SignedDigraph& g, std::size_t max_size = kMaxCycle,
                                              std::size_t guard = kDefaultNodeGuard) {
  detail::check_length(max_size);
  std::vector<MotifScoreRow> rows(g.size());
  for (NodeId v = 0; v < g.size(); ++v) rows[v].node = v;
  for (std::size_t k = kMinCycle; k <= max_size; ++k) {
    const auto cycles = enumerate_simple_cycles(g, k, guard);
    for (NodeId v = 0; v < g.size(); ++v) rows[v].w.push_back(imbalanced_score(g, v, cycles));
  }
  for (auto& r : rows) r.total_cost = cost_from_terms(r.w);
  return rows;
}

/// Cube root of |W3 W4 W5 W6| for one node.
inline MotifScoreRow total_cost(const SignedDigraph& g, NodeId node, std::size_t guard = kDefaultNodeGuard) {
  g.check_node(node);
  MotifScoreRow row;
  row.node = node;
  for (std::size_t k = kMinCycle; k <= kMaxCycle; ++k)
    row.w.push_back(imbalanced_motif_score(g, node, k, guard));
  row.total_cost = cost_from_terms(row.w);
  return row;
}

inline NodeScoreTable motif_scores(const std::vector<MotifScoreRow>& rows) {
  NodeScoreTable t{"motifs", {}, RankOrder::Descending};
  for (const auto& r : rows) t.scores.push_back(r.total_cost);
  return t;
}

}  // namespace sigstab::motifs
