#pragma once

// Orchestration: run the requested analyses on one model, write CSV artifacts plus summary.json,
// and compute ranking concordance between the attention ranking and each instability ranking.
//
// Numbers in CSV files use printf "%.6g"; summary.json carries full double precision.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigstab/agcn.hpp"
#include "sigstab/error.hpp"
#include "sigstab/model_io.hpp"
#include "sigstab/motifs.hpp"
#include "sigstab/ranking.hpp"
#include "sigstab/spectral.hpp"
#include "sigstab/walks.hpp"

namespace sigstab::report {

inline const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> m{"attention", "motifs", "nstc", "spectral"};
  return m;
}

struct AnalysisConfig {
  std::string model_path;
  Variant variant = Variant::Appendix;
  std::set<std::string> methods;
  std::string output_dir = "out";

  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  agcn::Hyperparams agcn;  // seed field is overridden per run
  std::optional<NodeId> perturb_node = 0;  // nullopt skips the feature-perturbation scenario
  double perturb_factor = 2.0;

  double delta_min = 0.5;
  double delta_max = 3.0;
  double delta_step = 0.5;
  PerturbMode perturb_mode = PerturbMode::WholeColumn;

  std::size_t max_motif_size = motifs::kMaxCycle;
  std::size_t motif_node_guard = motifs::kDefaultNodeGuard;
  std::size_t top_k = 2;

  void validate() const {
    if (methods.empty()) throw BadParameter("methods: at least one method is required");
    for (const auto& m : methods)
      if (std::find(all_methods().begin(), all_methods().end(), m) == all_methods().end())
        throw BadParameter("methods: unknown method '" + m + "'");
    if (methods.contains("attention")) {
      if (seeds.empty()) throw BadParameter("seed: at least one seed is required");
      agcn.validate();
      if (!std::isfinite(perturb_factor)) throw BadParameter("perturb-factor: must be finite");
    }
    if (!(delta_step > 0.0)) throw BadParameter("delta-step: must be > 0");
    if (!(delta_max >= delta_min)) throw BadParameter("delta-max: must be >= delta-min");
    if (max_motif_size < motifs::kMinCycle || max_motif_size > motifs::kMaxCycle)
      throw BadParameter("max-motif-size: must lie in [3, 6]");
    if (top_k < 1) throw BadParameter("top-k: must be >= 1");
  }
};

inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// One training run (scenario x seed).
struct AttentionRun {
  std::string scenario;  // "baseline" or "perturbed"
  std::uint64_t seed = 0;
  agcn::State state;
  NodeScoreTable scores;
};

struct AttentionResult {
  std::vector<AttentionRun> runs;
  NodeScoreTable scores;  // baseline scenario, mean over seeds
};

inline AttentionResult run_attention(const Model& model, const AnalysisConfig& cfg) {
  const auto& g = model.graph;
  if (!g.labels()) throw MalformedModel("labels: attention training needs node labels in the model file");
  const std::vector<double>& labels = *g.labels();

  std::vector<std::pair<std::string, Matrix>> scenarios{{"baseline", model.features}};
  if (cfg.perturb_node)
    scenarios.emplace_back("perturbed", agcn::scale_feature_row(model.features, *cfg.perturb_node, cfg.perturb_factor));

  AttentionResult res;
  std::vector<std::future<AttentionRun>> jobs;
  for (const auto& [name, x] : scenarios)
    for (auto seed : cfg.seeds)
      jobs.push_back(std::async(std::launch::async, [&, name = name, seed] {
        agcn::Hyperparams h = cfg.agcn;
        h.seed = seed;
        AttentionRun r{name, seed, agcn::train(g, x, labels, h), {}};
        r.scores = agcn::node_attention_scores(r.state.alpha);
        return r;
      }));
  for (auto& j : jobs) res.runs.push_back(j.get());

  res.scores = NodeScoreTable{"attention", std::vector<double>(g.size(), 0.0), RankOrder::Descending};
  std::size_t count = 0;
  for (const auto& r : res.runs)
    if (r.scenario == "baseline") {
      for (std::size_t i = 0; i < g.size(); ++i) res.scores.scores[i] += r.scores.scores[i];
      ++count;
    }
  for (double& v : res.scores.scores) v /= static_cast<double>(count);
  return res;
}

struct RunResult {
  std::map<std::string, NodeScoreTable> tables;
  ConcordanceReport concordance;
  nlohmann::json summary;
  std::vector<std::filesystem::path> artifacts;
};

namespace detail {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw BadParameter("out: cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadParameter("out: cannot write '" + path.string() + "'");
    out << content;
    written_.push_back(path);
  }

  std::vector<std::filesystem::path> take() { return std::move(written_); }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

inline std::string score_csv(const NodeScoreTable& t) {
  std::ostringstream os;
  os << "node,score,rank\n";
  const auto ranks = t.ranks();
  for (std::size_t i = 0; i < t.size(); ++i) os << i << ',' << fmt(t.scores[i]) << ',' << ranks[i] << '\n';
  return os.str();
}

inline nlohmann::json json_number(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

inline nlohmann::json table_json(const NodeScoreTable& t) {
  nlohmann::json j;
  j["order"] = t.order == RankOrder::Descending ? "descending" : "ascending";
  j["scores"] = nlohmann::json::array();
  for (double v : t.scores) j["scores"].push_back(json_number(v));
  j["ranks"] = t.ranks();
  j["ranking"] = t.ranking();
  return j;
}

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    out.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return out;
}

inline nlohmann::json concordance_json(const ConcordanceReport& rep) {
  nlohmann::json j;
  j["top_k"] = rep.top_k;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : rep.pairs)
    j["pairs"].push_back({{"first", p.first},
                          {"second", p.second},
                          {"top_k_jaccard", p.top_k_jaccard},
                          {"spearman_rho", p.spearman_rho},
                          {"top_first", p.top_first},
                          {"top_second", p.top_second}});
  return j;
}

}  // namespace detail

inline std::string concordance_csv(const ConcordanceReport& rep) {
  auto join = [](const std::vector<NodeId>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
  };
  std::ostringstream os;
  os << "first,second,top_k,top_k_jaccard,spearman_rho,top_first,top_second\n";
  for (const auto& p : rep.pairs)
    os << p.first << ',' << p.second << ',' << rep.top_k << ',' << fmt(p.top_k_jaccard) << ','
       << fmt(p.spearman_rho) << ',' << join(p.top_first) << ',' << join(p.top_second) << '\n';
  return os.str();
}

/// Loads the model, runs every requested method, and writes artifacts into cfg.output_dir.
inline RunResult run(const AnalysisConfig& cfg) {
  cfg.validate();
  const Model model = load_model(cfg.model_path, cfg.variant);
  const auto& g = model.graph;
  const std::size_t n = g.size();
  if (cfg.perturb_node && cfg.methods.contains("attention") && *cfg.perturb_node >= n)
    throw BadParameter("perturb-node: index " + std::to_string(*cfg.perturb_node) + " out of range");

  // Independent jobs; all file output happens afterwards on this thread.
  std::optional<std::future<AttentionResult>> attention_job;
  std::optional<std::future<spectral::PerturbationSweepTable>> spectral_job;
  std::optional<std::future<std::vector<motifs::MotifScoreRow>>> motif_job;
  if (cfg.methods.contains("attention"))
    attention_job = std::async(std::launch::async, [&] { return run_attention(model, cfg); });
  if (cfg.methods.contains("spectral"))
    spectral_job = std::async(std::launch::async, [&] {
      const auto deltas = spectral::delta_grid(cfg.delta_min, cfg.delta_max, cfg.delta_step);
      std::vector<NodeId> nodes(n);
      for (NodeId k = 0; k < n; ++k) nodes[k] = k;
      return spectral::perturbation_sweep(g, deltas, nodes, cfg.perturb_mode);
    });
  if (cfg.methods.contains("motifs"))
    motif_job = std::async(std::launch::async,
                           [&] { return motifs::motif_table(g, cfg.max_motif_size, cfg.motif_node_guard); });

  RunResult res;
  detail::ArtifactWriter out(cfg.output_dir);
  nlohmann::json& summary = res.summary;
  summary["model"] = cfg.model_path;
  summary["variant"] = std::string(to_string(cfg.variant));
  summary["nodes"] = n;
  summary["methods"] = nlohmann::json::object();

  if (attention_job) {
    const AttentionResult a = attention_job->get();
    nlohmann::json ja = detail::table_json(a.scores);
    ja["hyperparams"] = {{"leaky_slope", cfg.agcn.leaky_slope},
                         {"learning_rate", cfg.agcn.learning_rate},
                         {"iterations", cfg.agcn.iterations},
                         {"init_range", cfg.agcn.init_range},
                         {"combine", cfg.agcn.combine == agcn::AttentionCombine::Elementwise ? "elementwise"
                                                                                             : "matrix_product"},
                         {"seeds", cfg.seeds},
                         {"perturb_node", cfg.perturb_node ? nlohmann::json(*cfg.perturb_node) : nlohmann::json(nullptr)},
                         {"perturb_factor", cfg.perturb_factor}};
    ja["runs"] = nlohmann::json::array();

    std::ostringstream per_seed, preds;
    per_seed << "scenario,seed,node,score,rank\n";
    preds << "scenario,seed,node,label,prediction\n";
    for (const auto& r : a.runs) {
      const std::string tag = r.scenario + "_seed" + std::to_string(r.seed);
      std::ostringstream loss, alpha;
      loss << "iteration,loss\n";
      for (std::size_t i = 0; i < r.state.loss_history.size(); ++i)
        loss << i << ',' << fmt(r.state.loss_history[i]) << '\n';
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) alpha << (j ? "," : "") << fmt(r.state.alpha(i, j));
        alpha << '\n';
      }
      out.write("attention_loss_" + tag + ".csv", loss.str());
      out.write("attention_alpha_" + tag + ".csv", alpha.str());
      const auto ranks = r.scores.ranks();
      for (std::size_t i = 0; i < n; ++i) {
        per_seed << r.scenario << ',' << r.seed << ',' << i << ',' << fmt(r.scores.scores[i]) << ',' << ranks[i] << '\n';
        preds << r.scenario << ',' << r.seed << ',' << i << ',' << fmt((*g.labels())[i]) << ','
              << fmt(r.state.y_pp[i]) << '\n';
      }
      ja["runs"].push_back({{"scenario", r.scenario},
                            {"seed", r.seed},
                            {"final_loss", r.state.final_loss},
                            {"loss_history", r.state.loss_history},
                            {"predictions", r.state.y_pp},
                            {"alpha", detail::matrix_json(r.state.alpha)},
                            {"w_att", r.state.w_att},
                            {"w", detail::matrix_json(r.state.w)},
                            {"scores", detail::table_json(r.scores)}});
    }
    out.write("attention_scores.csv", detail::score_csv(a.scores));
    out.write("attention_per_seed.csv", per_seed.str());
    out.write("attention_predictions.csv", preds.str());
    summary["methods"]["attention"] = std::move(ja);
    res.tables.emplace("attention", a.scores);
  }

  if (spectral_job) {
    const auto sweep = spectral_job->get();
    std::ostringstream os;
    os << "node,delta,largest_negative_eigenvalue,status\n";
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : sweep.cells) {
      os << c.node << ',' << fmt(c.delta) << ',' << (c.value ? fmt(*c.value) : "") << ','
         << spectral::to_string(c.status) << '\n';
      cells.push_back({{"node", c.node},
                       {"delta", c.delta},
                       {"largest_negative_eigenvalue", c.value ? nlohmann::json(*c.value) : nlohmann::json(nullptr)},
                       {"status", std::string(spectral::to_string(c.status))},
                       {"message", c.message}});
    }
    out.write("spectral_sweep.csv", os.str());
    const auto scores = spectral::sweep_end_scores(sweep, n);
    out.write("spectral_scores.csv", detail::score_csv(scores));
    nlohmann::json js = detail::table_json(scores);
    js["deltas"] = sweep.deltas;
    js["perturb_mode"] = sweep.mode == PerturbMode::WholeColumn ? "column" : "nonzero";
    js["cells"] = std::move(cells);
    summary["methods"]["spectral"] = std::move(js);
    res.tables.emplace("spectral", scores);
  }

  if (motif_job) {
    const auto rows = motif_job->get();
    std::ostringstream os;
    os << "node";
    for (std::size_t k = motifs::kMinCycle; k <= cfg.max_motif_size; ++k) os << ",w" << k;
    os << ",total_cost\n";
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& r : rows) {
      os << r.node;
      for (double w : r.w) os << ',' << fmt(w);
      os << ',' << fmt(r.total_cost) << '\n';
      jr.push_back({{"node", r.node}, {"w", r.w}, {"total_cost", r.total_cost}});
    }
    out.write("motifs.csv", os.str());
    const auto scores = motifs::motif_scores(rows);
    nlohmann::json jm = detail::table_json(scores);
    jm["max_motif_size"] = cfg.max_motif_size;
    jm["rows"] = std::move(jr);
    summary["methods"]["motifs"] = std::move(jm);
    res.tables.emplace("motifs", scores);
  }

  if (cfg.methods.contains("nstc")) {
    const auto rows = walks::nstc_all(g);
    const auto scores = walks::nstc_ranking(g);
    const auto ranks = scores.ranks();
    std::ostringstream os, tree;
    os << "node,n_paths,nstc,rank\n";
    tree << "start,mid,end,w1,w2,product\n";
    nlohmann::json jr = nlohmann::json::array(), jw = nlohmann::json::array();
    for (const auto& r : rows) {
      os << r.node << ',' << r.n_paths << ',' << fmt(r.nstc) << ',' << ranks[r.node] << '\n';
      jr.push_back({{"node", r.node}, {"n_paths", r.n_paths}, {"nstc", r.nstc}, {"no_walks", r.no_walks}});
      for (const auto& w : walks::two_step_walks(g, r.node)) {
        tree << w.start << ',' << w.mid << ',' << w.end << ',' << fmt(w.w1) << ',' << fmt(w.w2) << ','
             << fmt(w.product) << '\n';
        jw.push_back({{"start", w.start}, {"mid", w.mid}, {"end", w.end}, {"w1", w.w1}, {"w2", w.w2},
                      {"product", w.product}});
      }
    }
    out.write("nstc.csv", os.str());
    out.write("walks.csv", tree.str());
    nlohmann::json jn = detail::table_json(scores);
    jn["rows"] = std::move(jr);
    jn["walks"] = std::move(jw);
    summary["methods"]["nstc"] = std::move(jn);
    res.tables.emplace("nstc", scores);
  }

  res.concordance = concordance(res.tables, cfg.top_k);
  summary["concordance"] = detail::concordance_json(res.concordance);
  out.write("concordance.csv", concordance_csv(res.concordance));
  out.write("summary.json", summary.dump(2) + "\n");
  res.artifacts = out.take();
  return res;
}

/// Rebuilds score tables from a summary.json document and recomputes concordance.
inline ConcordanceReport concordance_from_summary(const nlohmann::json& summary,
                                                  std::optional<std::size_t> top_k = std::nullopt) {
  if (!summary.contains("methods") || !summary.at("methods").is_object())
    throw MalformedModel("summary: missing 'methods' object");
  std::map<std::string, NodeScoreTable> tables;
  for (const auto& [name, jm] : summary.at("methods").items()) {
    NodeScoreTable t;
    t.method = name;
    t.order = jm.at("order").get<std::string>() == "ascending" ? RankOrder::Ascending : RankOrder::Descending;
    for (const auto& v : jm.at("scores"))
      t.scores.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    tables.emplace(name, std::move(t));
  }
  std::size_t k = top_k.value_or(2);
  if (!top_k && summary.contains("concordance")) k = summary["concordance"].value("top_k", std::size_t{2});
  return concordance(tables, k);
}

}  // namespace sigstab::report
