#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "sigstab/error.hpp"
#include "sigstab/graph.hpp"

namespace sigstab {

/// Which end of the score scale ranks first.
enum class RankOrder { Descending, Ascending };

/// Per-node scalar scores for one method. A NaN score means "no value" and always ranks last.
/// Ties are broken by ascending node index, so every ranking is a strict total order.
struct NodeScoreTable {
  std::string method;
  std::vector<double> scores;
  RankOrder order = RankOrder::Descending;

  std::size_t size() const noexcept { return scores.size(); }

  /// Nodes in rank order (first = rank 1).
  std::vector<NodeId> ranking() const {
    std::vector<NodeId> idx(scores.size());
    std::iota(idx.begin(), idx.end(), NodeId{0});
    std::stable_sort(idx.begin(), idx.end(), [this](NodeId a, NodeId b) {
      const double sa = scores[a], sb = scores[b];
      if (std::isnan(sa) || std::isnan(sb)) return !std::isnan(sa) && std::isnan(sb);
      return order == RankOrder::Descending ? sa > sb : sa < sb;
    });
    return idx;
  }

  /// 1-based rank of every node, indexed by node.
  std::vector<std::size_t> ranks() const {
    const auto order_ = ranking();
    std::vector<std::size_t> r(order_.size());
    for (std::size_t pos = 0; pos < order_.size(); ++pos) r[order_[pos]] = pos + 1;
    return r;
  }

  std::vector<NodeId> top(std::size_t k) const {
    auto r = ranking();
    r.resize(std::min(k, r.size()));
    return r;
  }
};

inline double top_k_jaccard(const NodeScoreTable& a, const NodeScoreTable& b, std::size_t k) {
  if (a.size() != b.size()) throw BadParameter("score tables cover different node sets");
  if (k == 0) throw BadParameter("top_k must be at least 1");
  const auto ta = a.top(k), tb = b.top(k);
  std::set<NodeId> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
  std::vector<NodeId> inter, uni;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
  return uni.empty() ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

/// Spearman correlation of the two (tie-broken) rankings.
inline double spearman_rho(const NodeScoreTable& a, const NodeScoreTable& b) {
  if (a.size() != b.size()) throw BadParameter("score tables cover different node sets");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  const auto ra = a.ranks(), rb = b.ranks();
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(ra[i]) - static_cast<double>(rb[i]);
    d2 += d * d;
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

struct PairConcordance {
  std::string first;
  std::string second;
  double top_k_jaccard = 0.0;
  double spearman_rho = 0.0;
  std::vector<NodeId> top_first;
  std::vector<NodeId> top_second;
};

struct ConcordanceReport {
  std::size_t top_k = 2;
  std::vector<PairConcordance> pairs;

  const PairConcordance* find(const std::string& a, const std::string& b) const {
    for (const auto& p : pairs)
      if ((p.first == a && p.second == b) || (p.first == b && p.second == a)) return &p;
    return nullptr;
  }
};

/// Pairwise agreement between every two tables, in lexicographic method order.
inline ConcordanceReport concordance(const std::map<std::string, NodeScoreTable>& tables,
                                     std::size_t top_k) {
  if (top_k == 0) throw BadParameter("top_k must be at least 1");
  ConcordanceReport rep;
  rep.top_k = top_k;
  for (auto it = tables.begin(); it != tables.end(); ++it) {
    for (auto jt = std::next(it); jt != tables.end(); ++jt) {
      const auto& a = it->second;
      const auto& b = jt->second;
      if (a.size() != b.size())
        throw BadParameter("tables '" + it->first + "' and '" + jt->first +
                           "' cover different node sets");
      PairConcordance p;
      p.first = it->first;
      p.second = jt->first;
      p.top_k_jaccard = top_k_jaccard(a, b, top_k);
      p.spearman_rho = spearman_rho(a, b);
      p.top_first = a.top(top_k);
      p.top_second = b.top(top_k);
      rep.pairs.push_back(std::move(p));
    }
  }
  return rep;
}

}  // namespace sigstab
