#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swu/evaluation.hpp"
#include "swu/structures.hpp"

namespace swu::cli {

/// Worker count from SWU_WORKERS, else the hardware concurrency.
int default_workers();

struct ScoreOptions {
  std::filesystem::path manifest;
  std::filesystem::path out;  // CSV file
  std::vector<ScoringMethod> methods = default_methods();
  double threshold = 0.5;
  Connectivity connectivity = Connectivity::TwentySix;
  double min_iou = 0.0;
  int workers = 1;
};

struct EvalOptions {
  std::filesystem::path scores;
  std::filesystem::path manifest;
  std::filesystem::path out;  // directory
  Split split = Split::ID;
  std::string dataset;        // defaults to the manifest's directory name
  Connectivity connectivity = Connectivity::TwentySix;
};

struct ReportOptions {
  std::vector<std::filesystem::path> reports;  // eval dirs or eval.json files
  std::string metric = "fp_reduction";
  std::optional<std::filesystem::path> out;    // stdout when absent
};

struct ComponentsOptions {
  std::filesystem::path volume;
  std::filesystem::path out;
  double threshold = 0.5;
  Connectivity connectivity = Connectivity::TwentySix;
};

// Each command returns an exit status; diagnostics go to `err`, the primary
// result line (if any) to `out`.
int cmd_synth(const std::filesystem::path& config, const std::filesystem::path& out_dir, int workers,
              std::ostream& out, std::ostream& err);
int cmd_score(const ScoreOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);
int cmd_components(const ComponentsOptions& opts, std::ostream& out, std::ostream& err);

/// Score table for a whole manifest; rows follow manifest order.
ScoreTable score_manifest(const ScoreOptions& opts);

/// Case list with per-case ground-truth structure counts, as used by eval.
std::vector<CaseSummary> summarize_manifest(const std::filesystem::path& manifest, Connectivity connectivity);

/// Methods-by-reports table in CSV form.
std::string report_csv(const std::vector<ReportSummary>& reports, const std::string& metric);

}  // namespace swu::cli
