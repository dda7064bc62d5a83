#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swu/metrics.hpp"
#include "swu/structures.hpp"
#include "swu/volume.hpp"

namespace swu {

/// One predicted structure of one case with its TP/FP verdict and a score per
/// method (empty where the method does not apply to the row's source).
struct ScoreRow {
  std::string case_id;
  Provenance provenance = Provenance::ID;
  std::string source;  // "mean" or "m<index>"
  int structure_label = 0;
  std::int64_t volume_voxels = 0;
  bool tp = false;
  int gt_label = 0;
  double dice = 0.0;  // against the matched GT structure; 0 for FP
  std::vector<std::optional<double>> scores;
};

struct ScoreTable {
  std::vector<std::string> methods;  // ScoringMethod names, column order
  std::vector<ScoreRow> rows;

  std::optional<std::size_t> method_index(const std::string& name) const;
};

std::string source_name(const Source& source);

/// Matches each source's structures against `ground_truth` and appends one row
/// per scored structure.
void append_case(ScoreTable& table, std::span<const ScoredStructure> scored,
                 std::span<const Structure> ground_truth, Provenance provenance, double min_iou = 0.0);

// CSV layout: case_id,provenance,source,structure_label,volume_voxels,match,
// gt_label,dice, then one column per method.
void write_score_csv(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable read_score_csv(const std::filesystem::path& path);

}  // namespace swu
