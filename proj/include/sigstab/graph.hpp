#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sigstab/error.hpp"
#include "sigstab/matrix.hpp"

namespace sigstab {

using NodeId = std::size_t;

/// Signed weighted digraph over a dense adjacency. Entry (i, j) is the weight of edge i -> j;
/// an edge exists exactly when its weight is nonzero. Diagonal entries are self-loops.
class SignedDigraph {
 public:
  SignedDigraph() = default;

  explicit SignedDigraph(Matrix weights) : weights_(std::move(weights)) {
    if (!weights_.square()) throw MalformedModel("adjacency matrix is not square");
    if (weights_.rows() == 0) throw MalformedModel("graph must have at least one node");
    if (!weights_.all_finite()) throw MalformedModel("adjacency contains a non-finite entry");
  }

  std::size_t size() const noexcept { return weights_.rows(); }
  const Matrix& weights() const noexcept { return weights_; }
  double weight(NodeId from, NodeId to) const { return weights_(from, to); }
  bool has_edge(NodeId from, NodeId to) const { return weights_(from, to) != 0.0; }

  void check_node(NodeId k) const {
    if (k >= size()) throw BadNode(k, size());
  }

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (double w : weights_.data()) c += (w != 0.0);
    return c;
  }

  const std::optional<std::vector<double>>& labels() const noexcept { return labels_; }
  const std::optional<std::vector<std::string>>& clusters() const noexcept { return clusters_; }

  void set_labels(std::vector<double> labels) {
    if (labels.size() != size()) throw MalformedModel("labels length does not match node count");
    for (double v : labels)
      if (!std::isfinite(v)) throw MalformedModel("labels contain a non-finite entry");
    labels_ = std::move(labels);
  }
  void set_clusters(std::vector<std::string> clusters) {
    if (clusters.size() != size()) throw MalformedModel("clusters length does not match node count");
    clusters_ = std::move(clusters);
  }

  friend bool operator==(const SignedDigraph&, const SignedDigraph&) = default;

 private:
  Matrix weights_;
  std::optional<std::vector<double>> labels_;
  std::optional<std::vector<std::string>> clusters_;
};

/// How node degree is counted for the motif normalization. Only one convention exists today:
/// nonzeros in the node's row plus nonzeros in its column, so a self-loop counts twice.
enum class DegreeConvention { TotalWithSelfLoopsBothWays };

inline std::size_t total_degree(const SignedDigraph& g, NodeId k,
                                DegreeConvention = DegreeConvention::TotalWithSelfLoopsBothWays) {
  g.check_node(k);
  std::size_t d = 0;
  for (NodeId j = 0; j < g.size(); ++j) {
    d += g.has_edge(k, j);
    d += g.has_edge(j, k);
  }
  return d;
}

/// Which entries of the column a perturbation touches.
enum class PerturbMode {
  NonzeroEntries,  ///< existing edges only; structural zeros stay zero
  WholeColumn,     ///< every entry of the column, creating edges where there were none
};

/// Returns a copy of g with delta added to column j. The input is not modified.
inline SignedDigraph perturb_column(const SignedDigraph& g, NodeId j, double delta,
                                    PerturbMode mode = PerturbMode::NonzeroEntries) {
  g.check_node(j);
  if (!std::isfinite(delta)) throw BadParameter("perturbation level must be finite");
  Matrix w = g.weights();
  for (NodeId i = 0; i < g.size(); ++i) {
    if (mode == PerturbMode::NonzeroEntries && w(i, j) == 0.0) continue;
    w(i, j) += delta;
  }
  SignedDigraph out(std::move(w));
  if (g.labels()) out.set_labels(*g.labels());
  if (g.clusters()) out.set_clusters(*g.clusters());
  return out;
}

/// A graph paired with its node-feature table (n x F).
struct Model {
  SignedDigraph graph;
  Matrix features;

  friend bool operator==(const Model&, const Model&) = default;
};

}  // namespace sigstab
