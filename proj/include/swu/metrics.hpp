#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swu/structures.hpp"
#include "swu/uncertainty.hpp"
#include "swu/volume.hpp"

namespace swu {

/// 2|A∩B| / (|A|+|B|); two empty sets score 1.
double dice_coefficient(const BinaryMask& a, const BinaryMask& b);
double dice_coefficient(const Structure& a, const Structure& b);

enum class MatchKind { TP, FP };

struct PredictionMatch {
  MatchKind kind = MatchKind::FP;
  int gt_label = 0;  // 0 when unmatched
  double iou = 0.0;
  double dice = 0.0;

  bool tp() const { return kind == MatchKind::TP; }
};

struct MatchResult {
  std::vector<PredictionMatch> predictions;     // parallel to the predicted structures
  std::vector<std::vector<int>> detected_by;    // per GT structure: labels of matching predictions

  std::int64_t gt_count() const { return static_cast<std::int64_t>(detected_by.size()); }
  std::int64_t detected_count() const;
};

/// A prediction is TP iff its IoU with some GT structure exceeds `min_iou`. It
/// is matched to the GT structure of highest IoU (lower label on ties) and its
/// Dice is taken against that structure alone.
MatchResult match_structures(std::span<const Structure> predicted, std::span<const Structure> ground_truth,
                             double min_iou = 0.0);

/// One scored prediction, as seen by the FROC sweep.
struct Detection {
  double score = 0.0;
  bool tp = false;
  std::int64_t gt_key = -1;  // dataset-unique id of the matched GT structure; -1 for FP
};

struct FrocPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double avg_fp = 0.0;
  std::optional<double> precision;  // undefined when nothing is retained
  std::int64_t retained = 0;
  std::int64_t tp_retained = 0;
  std::int64_t fp_retained = 0;
  std::int64_t detected = 0;
};

/// Staircase of operating points, from "keep nothing" to "keep everything".
/// Confidence scores retain structures with score >= threshold; uncertainty
/// scores retain those with score <= threshold.
struct FrocCurve {
  std::string method;
  std::string dataset;
  Orientation orientation = Orientation::Confidence;
  std::int64_t total_gt = 0;
  int n_cases = 0;
  std::vector<FrocPoint> points;

  const FrocPoint& keep_all() const { return points.back(); }
  double r_max() const { return keep_all().recall; }
  double f100() const { return keep_all().avg_fp; }
};

FrocCurve froc_curve(std::span<const Detection> detections, Orientation orientation, std::int64_t total_gt,
                     int n_cases);

struct FpReduction {
  double f100 = 0.0;
  double f95 = 0.0;
  std::optional<double> value;  // empty when there are no FPs to reduce
};

/// (F100 - F95) / F100, where F95 is the fewest FPs per case among points whose
/// recall reaches 95% of the maximum. No interpolation between points.
FpReduction fp_reduction(const FrocCurve& curve);

struct PrecisionBand {
  double lo = 0.0;
  double hi = 0.0;
};

/// [min P, (min P + max P) / 2] over the curve's defined precisions.
PrecisionBand precision_band(const FrocCurve& curve);

inline constexpr int kRecallLevels = 100;

/// Mean over kRecallLevels uniform precision levels in the band of the best
/// recall reachable at that precision or better.
double average_recall(const FrocCurve& curve);
double average_recall(const FrocCurve& curve, const PrecisionBand& band);

/// Average ranks (1-based), ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// |Spearman rho| with tie-averaged ranks. Empty when n < 2 or either list is
/// constant.
std::optional<double> spearman_abs(std::span<const double> a, std::span<const double> b);

}  // namespace swu
