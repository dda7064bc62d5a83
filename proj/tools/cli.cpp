#include "swu/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "swu/parallel.hpp"
#include "swu/synth.hpp"
#include "swu/volume_io.hpp"

namespace swu::cli {

namespace fs = std::filesystem;

namespace {

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << *v;
  return s.str();
}

std::optional<double> pick(const ReportSummary::Row& row, const std::string& metric) {
  if (metric == "fp_reduction") return row.fp_reduction;
  if (metric == "average_recall") return row.average_recall;
  if (metric == "spearman_tp") return row.spearman_tp;
  if (metric == "spearman_all") return row.spearman_all;
  throw Error("unknown metric '" + metric + "' (expected fp_reduction, average_recall, spearman_tp or spearman_all)");
}

std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

int default_workers() {
  if (const char* env = std::getenv("SWU_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ScoreTable score_manifest(const ScoreOptions& opts) {
  if (opts.methods.empty()) throw Error("no scoring methods requested");
  const auto manifest = read_manifest(opts.manifest);
  std::vector<ScoreTable> parts(manifest.size());
  parallel_for(manifest.size(), opts.workers, [&](std::size_t i) {
    const CaseManifest& entry = manifest[i];
    try {
      const EnsembleCase ensemble = load_case(entry);
      if (!ensemble.ground_truth()) throw Error("no ground truth for an ID case");
      const auto scored = score_structures(ensemble, opts.methods, opts.threshold, opts.connectivity);
      const auto gt = connected_components(*ensemble.ground_truth(), opts.connectivity);
      for (const auto& m : opts.methods) parts[i].methods.push_back(m.name());
      append_case(parts[i], scored, gt, entry.label, opts.min_iou);
    } catch (const std::exception& e) {
      throw Error("case '" + entry.case_id + "': " + e.what());
    }
  });

  ScoreTable table;
  for (const auto& m : opts.methods) table.methods.push_back(m.name());
  for (auto& part : parts) {
    for (auto& row : part.rows) table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<CaseSummary> summarize_manifest(const fs::path& path, Connectivity connectivity) {
  std::vector<CaseSummary> out;
  for (const auto& entry : read_manifest(path)) {
    CaseSummary c{entry.case_id, entry.label, 0};
    if (entry.gt_path) {
      c.gt_structures = static_cast<std::int64_t>(connected_components(load_mask(*entry.gt_path), connectivity).size());
    } else if (entry.label == Provenance::ID) {
      throw Error("case '" + entry.case_id + "': no ground truth for an ID case");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string report_csv(const std::vector<ReportSummary>& reports, const std::string& metric) {
  if (reports.empty()) throw Error("report needs at least one evaluation");
  std::vector<std::string> methods;
  std::vector<std::map<std::string, const ReportSummary::Row*>> lookup(reports.size());
  for (std::size_t r = 0; r < reports.size(); ++r) {
    for (const auto& row : reports[r].rows) {
      if (lookup[r].emplace(row.method, &row).second &&
          std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
        methods.push_back(row.method);
      }
    }
  }

  std::ostringstream out;
  out << "method";
  for (const auto& r : reports) out << ',' << csv_cell(r.dataset + "[" + r.split + "]");
  out << '\n';
  for (const auto& m : methods) {
    out << csv_cell(m);
    for (std::size_t r = 0; r < reports.size(); ++r) {
      const auto it = lookup[r].find(m);
      out << ',' << (it == lookup[r].end() ? std::string("missing") : format_metric(pick(*it->second, metric)));
    }
    out << '\n';
  }
  return out.str();
}

int cmd_synth(const fs::path& config, const fs::path& out_dir, int workers, std::ostream& out, std::ostream& err) {
  try {
    const SynthConfig cfg = read_synth_config(config);
    out << generate_dataset(cfg, out_dir, workers).string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "swu synth: " << e.what() << '\n';
    return 1;
  }
}

int cmd_score(const ScoreOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const ScoreTable table = score_manifest(opts);
    write_score_csv(table, opts.out);
    out << opts.out.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "swu score: " << e.what() << '\n';
    return 1;
  }
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const ScoreTable table = read_score_csv(opts.scores);
    const auto cases = summarize_manifest(opts.manifest, opts.connectivity);
    std::string dataset = opts.dataset;
    if (dataset.empty()) dataset = fs::absolute(opts.manifest).parent_path().filename().string();
    const EvalReport report = evaluate(table, cases, opts.split, dataset);
    write_eval_outputs(report, opts.out);
    out << (opts.out / "eval.json").string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "swu eval: " << e.what() << '\n';
    return 1;
  }
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    std::vector<ReportSummary> reports;
    for (const auto& p : opts.reports) {
      reports.push_back(read_report_summary(fs::is_directory(p) ? p / "eval.json" : p));
    }
    const std::string csv = report_csv(reports, opts.metric);
    if (opts.out) {
      if (opts.out->has_parent_path()) fs::create_directories(opts.out->parent_path());
      std::ofstream f(*opts.out, std::ios::binary | std::ios::trunc);
      f << csv;
      if (!f) throw Error("cannot write '" + opts.out->string() + "'");
    } else {
      out << csv;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "swu report: " << e.what() << '\n';
    return 1;
  }
}

int cmd_components(const ComponentsOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const ScalarVolume prob = load_volume(opts.volume);
    const LabelVolume labels = label_components(binarize(prob, opts.threshold), opts.connectivity);
    ScalarVolume encoded(labels.shape, prob.spacing());
    for (std::size_t i = 0; i < labels.labels.size(); ++i) encoded[i] = static_cast<float>(labels.labels[i]);
    save_volume(encoded, opts.out);
    out << labels.count << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "swu components: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace swu::cli
