// Acceptance run on the piezo fixture. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sigstab/sigstab.hpp"

using namespace sigstab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "  - " << what << '\n';
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::set<NodeId> kHigh{1, 2, 5, 6};
const std::set<NodeId> kLow{0, 3, 4, 7};

// Training results shared by criteria 4 to 6.
struct SeedRun {
  std::uint64_t seed;
  agcn::State baseline, perturbed;
};

std::vector<SeedRun> train_all(const Model& m) {
  const auto& labels = *m.graph.labels();
  const Matrix perturbed = agcn::scale_feature_row(m.features, 0, 2.0);
  std::vector<SeedRun> out;
  for (std::uint64_t s = 0; s < 10; ++s) {
    agcn::Hyperparams h;
    h.seed = s;
    out.push_back({s, agcn::train(m.graph, m.features, labels, h), agcn::train(m.graph, perturbed, labels, h)});
  }
  return out;
}

Outcome table_reproduction(const Model& m) {
  Outcome o;
  const double table[8][5] = {{0.00, -1.22, 0.00, 0.00, 0.00},   {0.00, -20.71, -2.68, -0.38, 0.00},
                              {-0.10, -7.41, -1.86, -0.26, 0.71}, {0.00, -5.12, -0.67, -0.09, 0.00},
                              {0.00, -2.32, 0.00, 0.00, 0.00},    {-0.29, -0.63, 0.00, -0.38, 0.00},
                              {-0.10, -7.41, -1.86, -0.26, 0.71}, {-0.07, -5.22, -0.67, -0.09, 0.29}};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = motifs::motif_table(m.graph);
  const double elapsed = seconds_since(t0);
  int matched = 0;
  for (NodeId v = 0; v < 8; ++v)
    for (int c = 0; c < 5; ++c) {
      const double got = c < 4 ? rows[v].w[c] : rows[v].total_cost;
      if (std::abs(got - table[v][c]) <= 0.01)
        ++matched;
      else
        o.require(false, "node " + std::to_string(v) + " column " + std::to_string(c) + ": got " +
                             std::to_string(got) + ", expected " + std::to_string(table[v][c]));
    }
  o.require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");
  o.detail << "  " << matched << "/40 values within 0.01, " << elapsed << " s\n";
  return o;
}

Outcome nstc_reproduction(const Model& m) {
  Outcome o;
  const double expected[8] = {1, 1, -25.9395, 4.7331, 1, 1, -32.1065, 152.9635};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = walks::nstc_all(m.graph);
  const double elapsed = seconds_since(t0);
  for (NodeId k = 0; k < 8; ++k)
    o.require(std::abs(rows[k].nstc - expected[k]) <= 1e-3,
              "NSTC node " + std::to_string(k) + " = " + std::to_string(rows[k].nstc));
  o.require(rows[2].n_paths == 8, "N2 = " + std::to_string(rows[2].n_paths));
  o.require(rows[3].n_paths == 10, "N3 = " + std::to_string(rows[3].n_paths));
  o.require(rows[7].n_paths == 10, "N7 = " + std::to_string(rows[7].n_paths));
  o.require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
  return o;
}

Outcome spectral_reproduction(const Model& m) {
  Outcome o;
  const auto deltas = spectral::delta_grid(0.5, 3.0, 0.5);
  std::vector<NodeId> nodes(8);
  std::iota(nodes.begin(), nodes.end(), 0);
  const auto t = spectral::perturbation_sweep(m.graph, deltas, nodes);
  for (NodeId k : {2, 6}) {
    const auto traj = t.trajectory(k);
    bool increasing = true;
    for (std::size_t d = 1; d < traj.size(); ++d)
      increasing = increasing && traj[d] && traj[d - 1] && *traj[d] > *traj[d - 1];
    o.require(increasing, "node " + std::to_string(k) + " trajectory is not strictly increasing");
  }
  const auto top = spectral::sweep_end_scores(t, 8).top(2);
  o.require(std::set<NodeId>(top.begin(), top.end()) == std::set<NodeId>{2, 6}, "closest to zero at 3.0 are not {2,6}");
  const auto& ref = oracle::piezo_sweep_reference();
  double worst = 0.0;
  for (NodeId k = 0; k < 8; ++k) {
    const auto traj = t.trajectory(k);
    for (std::size_t d = 0; d < traj.size(); ++d)
      worst = traj[d] ? std::max(worst, std::abs(*traj[d] - ref[k][d])) : INFINITY;
  }
  o.require(worst <= 1e-8, "max deviation from reference trajectories " + std::to_string(worst));
  o.detail << "  column sweep: max deviation from reference " << worst << '\n';

  // Existing-edge-only perturbation, reported for comparison.
  const auto nz = spectral::perturbation_sweep(m.graph, deltas, nodes, PerturbMode::NonzeroEntries);
  const auto nz_top = spectral::sweep_end_scores(nz, 8).top(2);
  o.detail << "  nonzero-entry sweep (informational): top-2 at 3.0 = {" << nz_top[0] << "," << nz_top[1] << "}\n";
  return o;
}

Outcome convergence(const std::vector<SeedRun>& runs) {
  Outcome o;
  int ok_base = 0, ok_pert = 0;
  for (const auto& r : runs) {
    ok_base += r.baseline.final_loss <= 0.005;
    ok_pert += r.perturbed.final_loss <= 0.005;
    for (const auto* s : {&r.baseline, &r.perturbed})
      o.require(s->final_loss < s->loss_history.front(),
                "seed " + std::to_string(r.seed) + ": final loss not below initial loss");
  }
  o.require(ok_base >= 8, "baseline: only " + std::to_string(ok_base) + "/10 seeds reach 0.005");
  o.require(ok_pert >= 8, "perturbed: only " + std::to_string(ok_pert) + "/10 seeds reach 0.005");
  o.detail << "  converged seeds: baseline " << ok_base << "/10, perturbed " << ok_pert << "/10\n";
  return o;
}

Outcome cluster_separation(const std::vector<SeedRun>& runs) {
  Outcome o;
  for (const auto& r : runs)
    for (const auto* s : {&r.baseline, &r.perturbed}) {
      const double sum = std::accumulate(s->y_pp.begin(), s->y_pp.end(), 0.0);
      o.require(std::abs(sum - 1.0) <= 1e-9, "seed " + std::to_string(r.seed) + ": predictions sum to " +
                                                 std::to_string(sum));
      if (s->final_loss > 0.005) continue;
      double lo = INFINITY, hi = -INFINITY;
      for (NodeId v : kHigh) lo = std::min(lo, s->y_pp[v]);
      for (NodeId v : kLow) hi = std::max(hi, s->y_pp[v]);
      o.require(lo > hi, "seed " + std::to_string(r.seed) + ": clusters overlap");
    }
  return o;
}

Outcome attention_top2(const Model& m, const std::vector<SeedRun>& runs) {
  Outcome o;
  int hits = 0;
  std::optional<std::size_t> passing;
  std::ostringstream table;
  table << "  seed  top-2  rank(2) rank(6)\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto scores = agcn::node_attention_scores(runs[i].baseline.alpha);
    const auto top = scores.top(2);
    const auto ranks = scores.ranks();
    const bool hit = std::set<NodeId>(top.begin(), top.end()) == std::set<NodeId>{2, 6};
    hits += hit;
    if (hit && !passing) passing = i;
    char line[96];
    std::snprintf(line, sizeof line, "  %4llu  {%zu,%zu}  %7zu %7zu\n", static_cast<unsigned long long>(runs[i].seed),
                  top[0], top[1], ranks[2], ranks[6]);
    table << line;
  }
  o.require(2 * hits > static_cast<int>(runs.size()),
            "{2,6} is the attention top-2 in only " + std::to_string(hits) + "/10 seeds");
  if (passing) {
    std::map<std::string, NodeScoreTable> tables{
        {"attention", agcn::node_attention_scores(runs[*passing].baseline.alpha)},
        {"motifs", motifs::motif_scores(motifs::motif_table(m.graph))},
        {"nstc", walks::nstc_ranking(m.graph)}};
    const auto rep = concordance(tables, 2);
    o.require(rep.find("attention", "motifs")->top_k_jaccard == 1.0, "attention/motifs top-2 Jaccard below 1");
    o.require(rep.find("attention", "nstc")->top_k_jaccard == 1.0, "attention/nstc top-2 Jaccard below 1");
  }
  o.detail << "  {2,6} top-2 in " << hits << "/10 seeds\n";
  if (!o.pass) o.detail << table.str();
  return o;
}

Outcome oracle_suites() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  int cycle_ok = 0, walk_ok = 0, eig_ok = 0;
  for (int t = 0; t < 200; ++t) {
    const auto g = oracle::random_digraph(rng, 3 + t % 5, 0.3 + 0.1 * (t % 5));
    bool ok = true;
    for (std::size_t k = 3; k <= std::min<std::size_t>(6, g.size()); ++k) {
      const auto ref = oracle::brute_force_cycles(g, k);
      std::map<std::vector<std::size_t>, double> mine;
      for (const auto& c : motifs::enumerate_simple_cycles(g, k)) ok = ok && mine.emplace(c.nodes, c.weight_product).second;
      ok = ok && mine.size() == ref.size();
      for (const auto& [key, w] : ref)
        ok = ok && mine.contains(key) && std::abs(mine[key] - w) <= 1e-12 * std::max(1.0, std::abs(w));
    }
    cycle_ok += ok;
  }
  for (int t = 0; t < 200; ++t) {
    const auto g = oracle::random_digraph(rng, 1 + t % 8, 0.25 + 0.1 * (t % 6));
    bool ok = true;
    for (NodeId k = 0; k < g.size(); ++k) {
      std::vector<oracle::Walk> mine;
      for (const auto& w : walks::two_step_walks(g, k)) mine.push_back({w.start, w.mid, w.end, w.product});
      ok = ok && mine == oracle::brute_force_walks(g, k);
    }
    walk_ok += ok;
  }
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + t % 8;
    const Matrix m = oracle::random_matrix(rng, n);
    const double scale = std::max(1.0, m.frobenius_norm());
    const auto e = spectral::eigenvalues(m);
    std::complex<double> sum{}, prod{1.0, 0.0};
    for (const auto& v : e.values) {
      sum += v;
      prod *= v;
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += m(i, i);
    const double det = oracle::determinant(m);
    bool ok = std::abs(sum.real() - trace) <= 1e-6 * scale && std::abs(sum.imag()) <= 1e-6 * scale &&
              std::abs(prod.real() - det) <= 1e-6 * std::max(1.0, std::abs(det));
    std::vector<std::complex<double>> rest = e.values;
    for (const auto& v : e.values) {
      auto it = std::min_element(rest.begin(), rest.end(), [&](auto a, auto b) {
        return std::abs(a - std::conj(v)) < std::abs(b - std::conj(v));
      });
      ok = ok && std::abs(*it - std::conj(v)) <= 1e-9 * scale;
      rest.erase(it);
    }
    eig_ok += ok;
  }
  o.require(cycle_ok == 200, "cycles: " + std::to_string(cycle_ok) + "/200");
  o.require(walk_ok == 200, "walks: " + std::to_string(walk_ok) + "/200");
  o.require(eig_ok == 1000, "eigenvalues: " + std::to_string(eig_ok) + "/1000");
  o.detail << "  cycles " << cycle_ok << "/200, walks " << walk_ok << "/200, eigenvalues " << eig_ok << "/1000\n";
  return o;
}

Outcome invariance_suites(const Model& piezo) {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  // Softmax normalization of embeddings, attention and predictions.
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + t % 7, f = 1 + t % 4;
    const auto g = oracle::random_digraph(rng, n, 0.5);
    Matrix x(n, f);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < f; ++c) x(i, c) = u(rng);
    agcn::Hyperparams h;
    h.seed = t;
    const auto emb = agcn::self_attention_embed(x, h);
    auto s = agcn::initial_state(f, h);
    const Matrix alpha = agcn::pair_attention(emb, s.w_att, h);
    s.alpha = alpha;
    bool ok = true;
    for (const Matrix* m : {&emb.y_prime, &alpha})
      for (std::size_t i = 0; i < m->rows(); ++i) {
        double sum = 0.0;
        for (double v : m->row(i)) sum += v;
        ok = ok && std::abs(sum - 1.0) <= 1e-9;
      }
    const auto y = agcn::forward(g, x, s, h);
    ok = ok && std::abs(std::accumulate(y.begin(), y.end(), 0.0) - 1.0) <= 1e-9;
    o.require(ok, "softmax normalization, trial " + std::to_string(t));

    // Permutation equivariance of the forward pass.
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    Matrix pw(n, n), px(n, f), pa(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        pw(i, j) = g.weight(p[i], p[j]);
        pa(i, j) = alpha(p[i], p[j]);
      }
      for (std::size_t c = 0; c < f; ++c) px(i, c) = x(p[i], c);
    }
    auto ps = s;
    ps.alpha = agcn::pair_attention(agcn::self_attention_embed(px, h), s.w_att, h);
    const auto py = agcn::forward(SignedDigraph(pw), px, ps, h);
    bool equiv = max_abs_diff(ps.alpha, pa) <= 1e-12;
    for (std::size_t i = 0; i < n; ++i) equiv = equiv && std::abs(py[i] - y[p[i]]) <= 1e-12;
    o.require(equiv, "permutation equivariance, trial " + std::to_string(t));
  }

  // Zero perturbation is the identity.
  for (NodeId j = 0; j < 8; ++j)
    for (auto mode : {PerturbMode::NonzeroEntries, PerturbMode::WholeColumn})
      o.require(perturb_column(piezo.graph, j, 0.0, mode).weights() == piezo.graph.weights(),
                "perturb_column(.,.,0) changed node " + std::to_string(j));

  // Zero learning rate leaves parameters untouched.
  {
    agcn::Hyperparams h;
    h.learning_rate = 0.0;
    h.iterations = 20;
    const auto init = agcn::initial_state(piezo.features.cols(), h);
    const auto s = agcn::train(piezo.graph, piezo.features, *piezo.graph.labels(), h, init);
    o.require(s.w_att == init.w_att && s.w == init.w, "learning rate 0 changed parameters");
    bool flat = true;
    for (double l : s.loss_history) flat = flat && l == s.loss_history.front();
    o.require(flat, "learning rate 0 changed the loss");
  }

  // Positive scaling laws and ranking invariance.
  for (int t = 0; t < 20; ++t) {
    const auto g = oracle::random_digraph(rng, 7, 0.5);
    const double c = 0.5 + 0.25 * (t % 6);
    Matrix w = g.weights();
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) w(i, j) *= c;
    const SignedDigraph gs(w);
    const auto a = motifs::motif_table(g), b = motifs::motif_table(gs);
    bool ok = true;
    for (NodeId v = 0; v < 7; ++v) {
      for (std::size_t k = 3; k <= 6; ++k)
        ok = ok && std::abs(b[v].w_k(k) - std::pow(c, k) * a[v].w_k(k)) <= 1e-9 * std::max(1.0, std::abs(b[v].w_k(k)));
      const double na = walks::nstc(g, v).nstc, nb = walks::nstc(gs, v).nstc;
      ok = ok && std::abs(nb - c * c * na) <= 1e-12 * std::max(1.0, std::abs(nb));
    }
    const auto ra = walks::nstc_ranking(g), rb = walks::nstc_ranking(gs);
    const auto ma = motifs::motif_scores(a), mb = motifs::motif_scores(b);
    for (NodeId x = 0; x < 7; ++x)
      for (NodeId y = 0; y < 7; ++y) {
        if (ra.scores[x] < ra.scores[y] - 1e-9 * (1 + std::abs(ra.scores[y]))) ok = ok && rb.scores[x] < rb.scores[y];
        if (ma.scores[x] > ma.scores[y] * (1 + 1e-9) + 1e-12) ok = ok && mb.scores[x] > mb.scores[y];
      }
    o.require(ok, "scaling law, trial " + std::to_string(t));
  }
  return o;
}

}  // namespace

int main() {
  const Model piezo = oracle::piezo(Variant::Appendix);
  std::vector<SeedRun> runs;
  std::string train_error;
  try {
    runs = train_all(piezo);
  } catch (const std::exception& e) {
    train_error = e.what();
  }

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 imbalanced-motif table", [&] { return table_reproduction(piezo); }},
      {"2 NSTC appendix values", [&] { return nstc_reproduction(piezo); }},
      {"3 spectral perturbation sweep", [&] { return spectral_reproduction(piezo); }},
      {"4 training convergence", [&] { return convergence(runs); }},
      {"5 cluster separation", [&] { return cluster_separation(runs); }},
      {"6 attention top-2", [&] { return attention_top2(piezo, runs); }},
      {"7 oracle equivalence", [] { return oracle_suites(); }},
      {"8 invariances", [&] { return invariance_suites(piezo); }},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      if (i >= 3 && i <= 5 && !train_error.empty()) throw std::runtime_error("training failed: " + train_error);
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << criteria[i].first << '\n' << o.detail.str();
  }
  return all ? 0 : 1;
}
