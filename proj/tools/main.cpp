#include <iostream>

#include "CLI11.hpp"
#include "swu/cli.hpp"

namespace {

// CLI11 validators run before the swu parsers, so keep error text uniform.
template <class Fn>
auto checked(Fn fn) {
  return [fn](const std::string& text) -> std::string {
    try {
      fn(text);
      return {};
    } catch (const std::exception& e) {
      return e.what();
    }
  };
}

}  // namespace

int main(int argc, char** argv) {
  using namespace swu;
  CLI::App app{"Structure-wise uncertainty scoring and evaluation for segmentation ensembles"};
  app.require_subcommand(1);

  int workers = cli::default_workers();
  app.add_option("-j,--workers", workers, "Worker threads (default: $SWU_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ensemble dataset");
  synth->add_option("config", synth_config, "SynthConfig JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--out", synth_out, "Output directory")->required();

  cli::ScoreOptions score_opts;
  std::string score_manifest, score_out, methods;
  int score_conn = 26;
  auto* score = app.add_subcommand("score", "Score every predicted structure of a dataset");
  score->add_option("manifest", score_manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  score->add_option("-o,--out", score_out, "Score table CSV")->required();
  score->add_option("-m,--methods", methods, "Comma-separated methods (default: full roster)")
      ->check(checked([](const std::string& t) { parse_methods(t); }));
  score->add_option("-t,--threshold", score_opts.threshold, "Foreground threshold")->capture_default_str();
  score->add_option("-c,--connectivity", score_conn, "6, 18 or 26")->capture_default_str();
  score->add_option("--min-iou", score_opts.min_iou, "IoU above which a prediction is a hit")->capture_default_str();

  cli::EvalOptions eval_opts;
  std::string eval_scores, eval_manifest, eval_out, split = "id";
  int eval_conn = 26;
  auto* eval = app.add_subcommand("eval", "FROC, FP reduction, average recall and Spearman per method");
  eval->add_option("scores", eval_scores, "Score table CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("manifest", eval_manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--out", eval_out, "Output directory")->required();
  eval->add_option("-s,--split", split, "id, ood or combined")
      ->check(CLI::IsMember({"id", "ood", "combined"}))
      ->capture_default_str();
  eval->add_option("-d,--dataset", eval_opts.dataset, "Dataset label (default: manifest directory name)");
  eval->add_option("-c,--connectivity", eval_conn, "6, 18 or 26")->capture_default_str();

  cli::ReportOptions report_opts;
  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Tabulate methods against evaluations");
  report->add_option("reports", report_inputs, "Evaluation directories or eval.json files")->required();
  report->add_option("--metric", report_opts.metric, "fp_reduction, average_recall, spearman_tp or spearman_all")
      ->check(CLI::IsMember({"fp_reduction", "average_recall", "spearman_tp", "spearman_all"}))
      ->capture_default_str();
  report->add_option("-o,--out", report_out, "CSV file (default: stdout)");

  cli::ComponentsOptions comp_opts;
  std::string comp_in, comp_out;
  int comp_conn = 26;
  auto* comp = app.add_subcommand("components", "Label the connected components of a thresholded volume");
  comp->add_option("volume", comp_in, "Volume header (.json)")->required();
  comp->add_option("-o,--out", comp_out, "Label volume output")->required();
  comp->add_option("-t,--threshold", comp_opts.threshold, "Foreground threshold")->capture_default_str();
  comp->add_option("-c,--connectivity", comp_conn, "6, 18 or 26")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cli::cmd_synth(synth_config, synth_out, workers, std::cout, std::cerr);
    if (*score) {
      score_opts.manifest = score_manifest;
      score_opts.out = score_out;
      if (!methods.empty()) score_opts.methods = parse_methods(methods);
      score_opts.connectivity = parse_connectivity(score_conn);
      score_opts.workers = workers;
      return cli::cmd_score(score_opts, std::cout, std::cerr);
    }
    if (*eval) {
      eval_opts.scores = eval_scores;
      eval_opts.manifest = eval_manifest;
      eval_opts.out = eval_out;
      eval_opts.split = parse_split(split);
      eval_opts.connectivity = parse_connectivity(eval_conn);
      return cli::cmd_eval(eval_opts, std::cout, std::cerr);
    }
    if (*report) {
      report_opts.reports.assign(report_inputs.begin(), report_inputs.end());
      if (!report_out.empty()) report_opts.out = report_out;
      return cli::cmd_report(report_opts, std::cout, std::cerr);
    }
    if (*comp) {
      comp_opts.volume = comp_in;
      comp_opts.out = comp_out;
      comp_opts.connectivity = parse_connectivity(comp_conn);
      return cli::cmd_components(comp_opts, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "swu: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
