#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swu/metrics.hpp"
#include "swu/score_table.hpp"

namespace swu {

/// Which cases enter an evaluation: in-distribution only, OOD only, or both
/// pooled into a single sweep.
enum class Split { ID, OOD, Combined };

std::string_view to_string(Split s);
Split parse_split(std::string_view text);

struct CaseSummary {
  std::string case_id;
  Provenance provenance = Provenance::ID;
  std::int64_t gt_structures = 0;
};

struct MethodReport {
  std::string method;
  Orientation orientation = Orientation::Confidence;
  std::int64_t n_structures = 0;
  std::int64_t n_tp = 0;
  std::optional<double> fp_reduction;
  double f100 = 0.0;
  double f95 = 0.0;
  double r_max = 0.0;
  std::optional<double> average_recall;
  std::optional<double> spearman_tp;   // TP structures only
  std::optional<double> spearman_all;  // every prediction, FP Dice := 0
  std::optional<FrocCurve> curve;
};

struct EvalReport {
  std::string dataset;
  Split split = Split::ID;
  int n_cases = 0;
  std::int64_t total_gt = 0;
  std::optional<PrecisionBand> band;  // shared by every method's average recall
  std::vector<MethodReport> methods;

  const MethodReport& method(std::string_view name) const;
};

/// Sweeps every method column of `table` over the cases of `split`. Average
/// recall uses one precision band for all methods, spanning the lowest
/// precision of any method to the midpoint between it and the highest.
EvalReport evaluate(const ScoreTable& table, std::span<const CaseSummary> cases, Split split,
                    std::string dataset = "dataset");

/// Writes `eval.json` plus `froc/<method>.csv` per method into `dir`.
void write_eval_outputs(const EvalReport& report, const std::filesystem::path& dir);

std::string report_json(const EvalReport& report);
void write_froc_csv(const FrocCurve& curve, const std::filesystem::path& path);

/// File-system friendly form of a method name ("Entropy:mean@0" -> "Entropy_mean_m0").
std::string method_file_stem(std::string_view method);

/// Metric summary read back from an `eval.json`, without curves.
struct ReportSummary {
  std::string dataset;
  std::string split;
  struct Row {
    std::string method;
    std::optional<double> fp_reduction;
    std::optional<double> average_recall;
    std::optional<double> spearman_tp;
    std::optional<double> spearman_all;
  };
  std::vector<Row> rows;
};

ReportSummary read_report_summary(const std::filesystem::path& path);

}  // namespace swu
