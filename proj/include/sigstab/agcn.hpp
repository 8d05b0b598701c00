#pragma once

// Attention-enhanced graph convolutional network (AGCN) for node regression on a signed digraph.
//
// Pipeline per forward pass:
//   1. self-attention embedding  Y' = softmax_rows(leaky(X X^T X))
//   2. pairwise attention        alpha_ij = softmax_j(leaky(w_att . (y'_i || y'_j)))
//   3. graph convolution         y'' = softmax_nodes(leaky(combine(A_hat, alpha) X W))
// with A_hat the symmetrically degree-normalized adjacency plus identity.
//
// Training applies the heuristic multiplicative-derivative updates to W and w_att rather than
// exact gradients; see train().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sigstab/error.hpp"
#include "sigstab/graph.hpp"
#include "sigstab/matrix.hpp"
#include "sigstab/ranking.hpp"

namespace sigstab::agcn {

/// How the normalized adjacency and the attention matrix are merged.
enum class AttentionCombine {
  Elementwise,    ///< A_hat (.) alpha, attention masked to the self-looped adjacency
  MatrixProduct,  ///< A_hat * alpha
};

struct Hyperparams {
  double leaky_slope = 0.01;
  double learning_rate = 0.8;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
  double init_range = 0.5;
  AttentionCombine combine = AttentionCombine::Elementwise;
  bool update_attention = true;

  void validate() const {
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw BadParameter("leaky_slope must lie in (0,1)");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw BadParameter("learning_rate must be finite and >= 0");
    if (iterations < 1) throw BadParameter("iterations must be >= 1");
    if (!(init_range >= 0.0) || !std::isfinite(init_range))
      throw BadParameter("init_range must be finite and >= 0");
  }
};

struct EmbeddingIntermediates {
  Matrix omega_self;  // n x n, X X^T
  Matrix y;           // n x F, omega_self X
  Matrix y_prime;     // n x F, row softmax of leaky(y)
};

struct State {
  std::vector<double> w_att;  // length 2F
  Matrix w;                   // F x 1
  Matrix alpha;               // n x n, row-stochastic
  std::vector<double> loss_history;
  std::vector<double> y_pp;   // n, sums to 1
  double final_loss = 0.0;    // MSE of y_pp after the last update
};

inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

/// Numerically stable softmax over a span, written into out.
inline void softmax(std::span<const double> in, std::span<double> out) {
  const double mx = *std::max_element(in.begin(), in.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

inline std::vector<double> softmax(std::span<const double> in) {
  std::vector<double> out(in.size());
  softmax(in, out);
  return out;
}

inline Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) softmax(m.row(i), out.row(i));
  return out;
}

inline EmbeddingIntermediates self_attention_embed(const Matrix& x, const Hyperparams& h) {
  if (x.empty()) throw BadParameter("feature matrix is empty");
  EmbeddingIntermediates e;
  e.omega_self = x * x.transposed();
  e.y = e.omega_self * x;
  Matrix act(e.y.rows(), e.y.cols());
  for (std::size_t i = 0; i < act.rows(); ++i)
    for (std::size_t j = 0; j < act.cols(); ++j) act(i, j) = leaky_relu(e.y(i, j), h.leaky_slope);
  e.y_prime = softmax_rows(act);
  return e;
}

inline Matrix pair_attention(const EmbeddingIntermediates& e, std::span<const double> w_att,
                             const Hyperparams& h) {
  const Matrix& yp = e.y_prime;
  const std::size_t n = yp.rows(), f = yp.cols();
  if (w_att.size() != 2 * f)
    throw BadParameter("attention vector has length " + std::to_string(w_att.size()) +
                       ", expected " + std::to_string(2 * f));
  // w_att . (y'_i || y'_j) splits into a source part and a target part.
  std::vector<double> src(n, 0.0), dst(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < f; ++c) {
      src[i] += w_att[c] * yp(i, c);
      dst[i] += w_att[f + c] * yp(i, c);
    }
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = leaky_relu(src[i] + dst[j], h.leaky_slope);
  return softmax_rows(s);
}

/// D^{-1/2} (A + I) D^{-1/2} with D the absolute row sums of A + I.
inline Matrix normalize_adjacency(const SignedDigraph& g) {
  const std::size_t n = g.size();
  Matrix a = g.weights();
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (double v : a.row(i)) d += std::abs(v);
    // A self-loop of exactly -1 can cancel the identity and leave an empty row.
    inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  return a;
}

inline Matrix combine(const Matrix& a_hat, const Matrix& alpha, AttentionCombine mode) {
  return mode == AttentionCombine::Elementwise ? hadamard(a_hat, alpha) : a_hat * alpha;
}

namespace detail {

inline std::vector<double> predict(const Matrix& mx, const Matrix& w, double slope) {
  const Matrix z = mx * w;
  std::vector<double> logits(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) logits[i] = leaky_relu(z(i, 0), slope);
  return softmax(logits);
}

inline double mse(std::span<const double> target, std::span<const double> pred) {
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double r = target[i] - pred[i];
    s += r * r;
  }
  return s / static_cast<double>(target.size());
}

// Uniform in [-r, r] from the top 53 bits; mt19937_64 is fully specified so this is portable.
inline double uniform(std::mt19937_64& rng, double r) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * r;
}

}  // namespace detail

/// Parameters drawn from the seeded generator: w_att first, then W.
inline State initial_state(std::size_t feature_count, const Hyperparams& h) {
  std::mt19937_64 rng(h.seed);
  State s;
  s.w_att.resize(2 * feature_count);
  for (double& v : s.w_att) v = detail::uniform(rng, h.init_range);
  s.w = Matrix(feature_count, 1);
  for (std::size_t i = 0; i < feature_count; ++i) s.w(i, 0) = detail::uniform(rng, h.init_range);
  return s;
}

/// Forward pass with the attention matrix already stored in state.alpha.
inline std::vector<double> forward(const SignedDigraph& g, const Matrix& x, const State& state,
                                   const Hyperparams& h) {
  const std::size_t n = g.size();
  if (x.rows() != n) throw BadParameter("feature rows do not match node count");
  if (state.alpha.rows() != n || state.alpha.cols() != n)
    throw BadParameter("attention matrix shape does not match graph");
  if (state.w.rows() != x.cols() || state.w.cols() != 1)
    throw BadParameter("weight matrix must be F x 1");
  const Matrix m = combine(normalize_adjacency(g), state.alpha, h.combine);
  return detail::predict(m * x, state.w, h.leaky_slope);
}

/// Trains from an explicit starting point (w_att and w of init are used; the rest is ignored).
inline State train(const SignedDigraph& g, const Matrix& x, std::span<const double> labels,
                   const Hyperparams& h, State init) {
  h.validate();
  const std::size_t n = g.size(), f = x.cols();
  if (x.rows() != n) throw BadParameter("feature rows do not match node count");
  if (labels.size() != n) throw BadParameter("labels length does not match node count");
  if (init.w_att.size() != 2 * f || init.w.rows() != f || init.w.cols() != 1)
    throw BadParameter("initial parameters do not match feature count");

  const EmbeddingIntermediates emb = self_attention_embed(x, h);
  const Matrix a_hat = normalize_adjacency(g);

  // Ordered pairs (i, j) with an edge in A + I; these drive the attention update.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.weight(i, j) + (i == j ? 1.0 : 0.0) != 0.0) pairs.emplace_back(i, j);

  State s;
  s.w_att = std::move(init.w_att);
  s.w = std::move(init.w);
  s.loss_history.reserve(h.iterations);

  const double mu = h.learning_rate;
  std::vector<double> residual(n);
  Matrix grad_att(n, f);
  for (std::size_t it = 0; it < h.iterations; ++it) {
    const Matrix alpha = pair_attention(emb, s.w_att, h);
    const Matrix mx = combine(a_hat, alpha, h.combine) * x;
    const std::vector<double> y = detail::predict(mx, s.w, h.leaky_slope);
    const double loss = detail::mse(labels, y);
    if (!std::isfinite(loss)) throw DivergedTraining(it);
    s.loss_history.push_back(loss);

    for (std::size_t i = 0; i < n; ++i) residual[i] = labels[i] - y[i];

    // W += mu * ((t - y'')^T (MX (.) (1 - MX)))^T
    for (std::size_t c = 0; c < f; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += residual[i] * mx(i, c) * (1.0 - mx(i, c));
      s.w(c, 0) += mu * acc;
    }

    if (h.update_attention && !pairs.empty()) {
      // G = (Y' (.) (1 - Y')) scaled per row by mu (t - y''), then (.) X.
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < f; ++c) {
          const double yp = emb.y_prime(i, c);
          grad_att(i, c) = yp * (1.0 - yp) * (mu * residual[i]) * x(i, c);
        }
      std::vector<double> z(2 * f, 0.0);
      for (auto [i, j] : pairs)
        for (std::size_t c = 0; c < f; ++c) {
          z[c] += grad_att(i, c);
          z[f + c] += grad_att(j, c);
        }
      const double inv = 1.0 / static_cast<double>(pairs.size());
      for (std::size_t c = 0; c < 2 * f; ++c) s.w_att[c] += z[c] * inv;
    }
  }

  s.alpha = pair_attention(emb, s.w_att, h);
  s.y_pp = detail::predict(combine(a_hat, s.alpha, h.combine) * x, s.w, h.leaky_slope);
  s.final_loss = detail::mse(labels, s.y_pp);
  if (!std::isfinite(s.final_loss)) throw DivergedTraining(h.iterations);
  return s;
}

inline State train(const SignedDigraph& g, const Matrix& x, std::span<const double> labels,
                   const Hyperparams& h) {
  h.validate();
  return train(g, x, labels, h, initial_state(x.cols(), h));
}

enum class Aggregation { ColumnMean, RowMean };

/// Per-node attention: mean attention received (column mean) or given (row mean).
inline NodeScoreTable node_attention_scores(const Matrix& alpha,
                                            Aggregation agg = Aggregation::ColumnMean) {
  const std::size_t n = alpha.rows();
  NodeScoreTable t{"attention", std::vector<double>(n, 0.0), RankOrder::Descending};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t.scores[agg == Aggregation::ColumnMean ? j : i] += alpha(i, j);
  for (double& v : t.scores) v /= static_cast<double>(n);
  return t;
}

/// Copy of x with one node's feature row multiplied by factor.
inline Matrix scale_feature_row(const Matrix& x, NodeId node, double factor) {
  if (node >= x.rows()) throw BadNode(node, x.rows());
  Matrix out = x;
  for (double& v : out.row(node)) v *= factor;
  return out;
}

}  // namespace sigstab::agcn
