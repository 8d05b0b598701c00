#pragma once

#include <cstddef>
#include <vector>

#include "sigstab/graph.hpp"
#include "sigstab/ranking.hpp"

namespace sigstab::walks {

/// start -> mid -> end over nonzero edges, with mid != start, end != mid and end != start.
struct TwoStepWalk {
  NodeId start = 0;
  NodeId mid = 0;
  NodeId end = 0;
  double w1 = 0.0;
  double w2 = 0.0;
  double product = 0.0;

  friend bool operator==(const TwoStepWalk&, const TwoStepWalk&) = default;
};

/// All two-step walks from k, ordered by (mid, end).
inline std::vector<TwoStepWalk> two_step_walks(const SignedDigraph& g, NodeId k) {
  g.check_node(k);
  std::vector<TwoStepWalk> out;
  for (NodeId i = 0; i < g.size(); ++i) {
    if (i == k || !g.has_edge(k, i)) continue;
    const double w1 = g.weight(k, i);
    for (NodeId j = 0; j < g.size(); ++j) {
      if (j == i || j == k || !g.has_edge(i, j)) continue;
      const double w2 = g.weight(i, j);
      out.push_back({k, i, j, w1, w2, w1 * w2});
    }
  }
  return out;
}

struct NstcRow {
  NodeId node = 0;
  std::size_t n_paths = 0;
  double nstc = 0.0;
  bool no_walks = false;  // set when n_paths == 0; nstc is then 0
};

/// Mean product of edge weights over every two-step walk from k (normalized summation of
/// transition cost). Strongly negative values mark polarity-reversing branching.
inline NstcRow nstc(const SignedDigraph& g, NodeId k) {
  const auto ws = two_step_walks(g, k);
  NstcRow row{k, ws.size(), 0.0, ws.empty()};
  if (ws.empty()) return row;
  double sum = 0.0;
  for (const auto& w : ws) sum += w.product;
  row.nstc = sum / static_cast<double>(ws.size());
  return row;
}

inline std::vector<NstcRow> nstc_all(const SignedDigraph& g) {
  std::vector<NstcRow> rows;
  for (NodeId k = 0; k < g.size(); ++k) rows.push_back(nstc(g, k));
  return rows;
}

/// Most negative NSTC ranks first.
inline NodeScoreTable nstc_ranking(const SignedDigraph& g) {
  NodeScoreTable t{"nstc", {}, RankOrder::Ascending};
  for (const auto& r : nstc_all(g)) t.scores.push_back(r.nstc);
  return t;
}

}  // namespace sigstab::walks
