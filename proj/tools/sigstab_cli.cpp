// sigstab: attention and instability analyses of a signed weighted digraph.
//
//   sigstab analyze --model data/piezo_appendix.json --method all --out out/
//   sigstab concordance --summary out/summary.json

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sigstab/sigstab.hpp"

namespace {

std::set<std::string> parse_methods(const std::vector<std::string>& raw) {
  std::set<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      if (tok == "all") {
        out.insert(sigstab::report::all_methods().begin(), sigstab::report::all_methods().end());
      } else {
        out.insert(tok);
      }
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention and structural-instability analysis of signed weighted digraphs"};
  app.require_subcommand(1);

  sigstab::report::AnalysisConfig cfg;
  std::string variant = "appendix";
  std::vector<std::string> methods;
  std::string combine = "elementwise";
  std::string perturb_mode = "column";
  int perturb_node = 0;
  bool no_perturb = false;

  auto* analyze = app.add_subcommand("analyze", "Run analyses on a model file and write CSV/JSON artifacts");
  analyze->add_option("--model", cfg.model_path, "Model file (JSON)")->required();
  analyze->add_option("--variant", variant, "Fixture variant")->check(CLI::IsMember({"appendix", "printed"}));
  analyze->add_option("--method", methods, "Comma-separated subset of attention,spectral,motifs,nstc or 'all'")
      ->required();
  analyze->add_option("--out", cfg.output_dir, "Output directory")->required();
  analyze->add_option("--seed", cfg.seeds, "Training seeds (repeatable)");
  analyze->add_option("--iters", cfg.agcn.iterations, "Training iterations");
  analyze->add_option("--lr", cfg.agcn.learning_rate, "Learning rate");
  analyze->add_option("--leaky-slope", cfg.agcn.leaky_slope, "LeakyReLU negative slope");
  analyze->add_option("--init-range", cfg.agcn.init_range, "Half-width of uniform parameter initialization");
  analyze->add_option("--combine", combine, "How attention merges with the adjacency")
      ->check(CLI::IsMember({"elementwise", "matrix_product"}));
  analyze->add_option("--perturb-node", perturb_node, "Node whose features are scaled in the perturbed scenario");
  analyze->add_option("--perturb-factor", cfg.perturb_factor, "Feature scale factor for the perturbed scenario");
  analyze->add_flag("--no-perturb", no_perturb, "Skip the feature-perturbation scenario");
  analyze->add_option("--delta-min", cfg.delta_min, "Smallest column perturbation");
  analyze->add_option("--delta-max", cfg.delta_max, "Largest column perturbation");
  analyze->add_option("--delta-step", cfg.delta_step, "Perturbation grid step");
  analyze->add_option("--perturb-mode", perturb_mode, "Column entries touched by the spectral sweep")
      ->check(CLI::IsMember({"column", "nonzero"}));
  analyze->add_option("--max-motif-size", cfg.max_motif_size, "Largest cycle size scored (3-6)");
  analyze->add_option("--top-k", cfg.top_k, "Top-k size for concordance");

  std::string summary_path;
  std::optional<std::size_t> top_k;
  auto* conc = app.add_subcommand("concordance", "Recompute ranking concordance from a summary.json");
  conc->add_option("--summary", summary_path, "summary.json written by analyze")->required();
  conc->add_option("--top-k", top_k, "Override top-k");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      cfg.variant = sigstab::parse_variant(variant);
      cfg.methods = parse_methods(methods);
      cfg.agcn.combine = combine == "elementwise" ? sigstab::agcn::AttentionCombine::Elementwise
                                                  : sigstab::agcn::AttentionCombine::MatrixProduct;
      cfg.perturb_mode = perturb_mode == "column" ? sigstab::PerturbMode::WholeColumn
                                                  : sigstab::PerturbMode::NonzeroEntries;
      if (perturb_node < 0) throw sigstab::BadParameter("perturb-node: must be >= 0");
      cfg.perturb_node = no_perturb ? std::nullopt : std::optional<sigstab::NodeId>(perturb_node);
      const auto res = sigstab::report::run(cfg);
      for (const auto& p : res.artifacts) std::cout << p.string() << '\n';
      std::cerr << sigstab::report::concordance_csv(res.concordance);
    } else if (conc->parsed()) {
      std::ifstream in(summary_path);
      if (!in) throw sigstab::BadParameter("summary: cannot open '" + summary_path + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw sigstab::MalformedModel(std::string("summary: not valid JSON: ") + e.what());
      }
      std::cout << sigstab::report::concordance_csv(sigstab::report::concordance_from_summary(doc, top_k));
    }
  } catch (const sigstab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
