#pragma once

// Dense nonsymmetric eigenvalues (Eigen's real Schur solver plus an inverse-iteration residual
// check on every eigenvalue) and the column-perturbation sweep built on top of them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstddef>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sigstab/error.hpp"
#include "sigstab/graph.hpp"
#include "sigstab/matrix.hpp"
#include "sigstab/ranking.hpp"

namespace sigstab::spectral {

using Complex = std::complex<double>;

struct EigenSet {
  std::vector<Complex> values;  // sorted by (real, imag) ascending
  double residual_bound = 0.0;  // max_k ||(M - l_k I) v_k|| / ||v_k|| over inverse-iteration vectors
  double matrix_norm = 0.0;     // Frobenius norm of the input
};

namespace detail {

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Residual of a few inverse-iteration steps for shift lambda; small exactly when lambda is an
// eigenvalue of m up to backward error.
inline double inverse_iteration_residual(const Matrix& m, Complex lambda) {
  const std::size_t n = m.rows();
  std::vector<Complex> lu(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) lu[i * n + j] = m(i, j) - (i == j ? lambda : Complex{});
  const std::vector<Complex> shifted = lu;

  const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, m.frobenius_norm());
  std::vector<std::size_t> piv(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu[i * n + k]) > std::abs(lu[p * n + k])) p = i;
    piv[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(lu[k * n + j], lu[p * n + j]);
    if (std::abs(lu[k * n + k]) < tiny) lu[k * n + k] = tiny;
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = lu[i * n + k] / lu[k * n + k];
      lu[i * n + k] = f;
      for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= f * lu[k * n + j];
    }
  }

  auto residual = [&](const std::vector<Complex>& x) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex acc{};
      for (std::size_t j = 0; j < n; ++j) acc += shifted[i * n + j] * x[j];
      r += std::norm(acc);
    }
    return std::sqrt(r);
  };
  auto normalize = [](std::vector<Complex>& x) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    s = std::sqrt(s);
    for (auto& v : x) v /= s;
  };

  // Every unit iterate is a valid witness, so keep the smallest residual. For a defective
  // eigenvalue the iteration drifts toward the eigenvector, whose residual is larger than that
  // of the first iterates. Two unstructured start vectors guard against one of them being
  // orthogonal to the wanted direction, which happens easily for integer matrices.
  double best = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int start = 0; start < 2; ++start) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = Complex{u(rng), u(rng)};
    normalize(x);
    for (int step = 0; step < 4; ++step) {
      for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[piv[k]]);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu[i * n + j] * x[j];
      for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu[ii * n + j] * x[j];
        x[ii] /= lu[ii * n + ii];
      }
      bool finite = true;
      for (const auto& v : x) finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
      if (!finite) break;
      normalize(x);
      best = std::min(best, residual(x));
    }
  }
  return best;
}

}  // namespace detail

/// All n eigenvalues of a square real matrix. Throws NumericalFailure when QR does not converge
/// or an eigenvalue fails the residual certificate (residual <= 1e-9 * max(1, ||m||_F)).
inline EigenSet eigenvalues(const Matrix& m) {
  if (!m.square()) throw BadMatrix("eigenvalues: matrix is not square");
  if (!m.all_finite()) throw BadMatrix("eigenvalues: matrix has a non-finite entry");
  EigenSet e;
  e.matrix_norm = m.frobenius_norm();
  if (m.rows() == 0) return e;

  const std::size_t n = m.rows();
  Eigen::MatrixXd em(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) em(i, j) = m(i, j);
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(em, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigenvalues: QR iteration did not converge");
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) e.values.push_back(solver.eigenvalues()[k]);
  std::sort(e.values.begin(), e.values.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  const double limit = 1e-9 * std::max(1.0, e.matrix_norm);
  for (const auto& lambda : e.values) {
    const double r = detail::inverse_iteration_residual(m, lambda);
    e.residual_bound = std::max(e.residual_bound, r);
  }
  if (!(e.residual_bound <= limit))
    throw NumericalFailure("eigenvalue residual " + detail::fmt_g(e.residual_bound) + " exceeds bound " + detail::fmt_g(limit));
  return e;
}

/// Largest real part among eigenvalues with real part < -zero_tol; nullopt if none.
inline std::optional<double> largest_negative_eigenvalue(const EigenSet& e, double zero_tol = 0.0) {
  std::optional<double> best;
  for (const auto& v : e.values)
    if (v.real() < -zero_tol && (!best || v.real() > *best)) best = v.real();
  return best;
}

/// Relative threshold below which an eigenvalue's real part counts as zero, not negative.
inline constexpr double kZeroTolerance = 1e-9;

inline std::optional<double> largest_negative_eigenvalue_of(const Matrix& m) {
  const EigenSet e = eigenvalues(m);
  return largest_negative_eigenvalue(e, kZeroTolerance * std::max(1.0, e.matrix_norm));
}

enum class CellStatus { Ok, NoNegative, Failed };

inline std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::NoNegative: return "no_negative";
    case CellStatus::Failed: return "failed";
  }
  return "unknown";
}

struct SweepCell {
  NodeId node = 0;
  double delta = 0.0;
  std::optional<double> value;
  CellStatus status = CellStatus::Ok;
  std::string message;
};

struct PerturbationSweepTable {
  std::vector<double> deltas;  // ascending, always contains 0
  std::vector<NodeId> nodes;
  std::vector<SweepCell> cells;  // node-major: cells[node_pos * deltas.size() + delta_pos]
  PerturbMode mode = PerturbMode::WholeColumn;

  const SweepCell& at(NodeId node, double delta) const {
    const auto ni = std::find(nodes.begin(), nodes.end(), node);
    const auto di = std::find(deltas.begin(), deltas.end(), delta);
    if (ni == nodes.end() || di == deltas.end()) throw BadParameter("sweep cell not present");
    return cells[static_cast<std::size_t>(ni - nodes.begin()) * deltas.size() +
                 static_cast<std::size_t>(di - deltas.begin())];
  }

  /// Values for one node across the grid, in delta order.
  std::vector<std::optional<double>> trajectory(NodeId node) const {
    std::vector<std::optional<double>> out;
    for (double d : deltas) out.push_back(at(node, d).value);
    return out;
  }
};

/// Evenly spaced grid [lo, hi] with the given step; hi is included when it lands on the grid
/// within a relative 1e-9 of the step.
inline std::vector<double> delta_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw BadParameter("delta_step must be > 0");
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) throw BadParameter("delta range invalid");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

/// Largest negative eigenvalue after perturbing each node's column by each delta. Cells are
/// computed concurrently per node; a failing cell is marked rather than aborting the sweep.
inline PerturbationSweepTable perturbation_sweep(const SignedDigraph& g, std::span<const double> deltas,
                                                 std::span<const NodeId> nodes,
                                                 PerturbMode mode = PerturbMode::WholeColumn) {
  PerturbationSweepTable t;
  t.mode = mode;
  for (double d : deltas)
    if (!std::isfinite(d)) throw BadParameter("perturbation levels must be finite");
  for (NodeId k : nodes) g.check_node(k);
  t.deltas.assign(deltas.begin(), deltas.end());
  t.deltas.push_back(0.0);
  std::sort(t.deltas.begin(), t.deltas.end());
  t.deltas.erase(std::unique(t.deltas.begin(), t.deltas.end()), t.deltas.end());
  t.nodes.assign(nodes.begin(), nodes.end());

  const std::size_t nd = t.deltas.size();
  t.cells.resize(t.nodes.size() * nd);
  std::vector<std::future<void>> jobs;
  for (std::size_t ni = 0; ni < t.nodes.size(); ++ni) {
    jobs.push_back(std::async(std::launch::async, [&, ni] {
      for (std::size_t di = 0; di < nd; ++di) {
        SweepCell& c = t.cells[ni * nd + di];
        c.node = t.nodes[ni];
        c.delta = t.deltas[di];
        try {
          c.value = largest_negative_eigenvalue_of(perturb_column(g, c.node, c.delta, mode).weights());
          c.status = c.value ? CellStatus::Ok : CellStatus::NoNegative;
        } catch (const Error& ex) {
          c.status = CellStatus::Failed;
          c.message = ex.what();
        }
      }
    }));
  }
  for (auto& j : jobs) j.get();
  return t;
}

/// Per-node instability score: the value at the largest delta. Closest to zero ranks first;
/// nodes without a value rank last.
inline NodeScoreTable sweep_end_scores(const PerturbationSweepTable& t, std::size_t node_count) {
  NodeScoreTable s{"spectral", std::vector<double>(node_count, std::numeric_limits<double>::quiet_NaN()),
                   RankOrder::Descending};
  if (t.deltas.empty()) return s;
  const double end = t.deltas.back();
  for (NodeId k : t.nodes)
    if (k < node_count) {
      const auto& c = t.at(k, end);
      if (c.value) s.scores[k] = *c.value;
    }
  return s;
}

}  // namespace sigstab::spectral
