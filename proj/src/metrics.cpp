#include "swu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace swu {

double dice_coefficient(const BinaryMask& a, const BinaryMask& b) {
  if (a.shape() != b.shape()) throw Error("dice: grid mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  std::int64_t inter = 0, na = 0, nb = 0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    na += da[i];
    nb += db[i];
    inter += da[i] & db[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

double dice_coefficient(const Structure& a, const Structure& b) {
  if (a.grid != b.grid) throw Error("dice: grid mismatch " + to_string(a.grid) + " vs " + to_string(b.grid));
  if (a.voxels.empty() && b.voxels.empty()) return 1.0;
  std::vector<std::int64_t> sa(a.voxels), sb(b.voxels);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::int64_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(sa.size() + sb.size());
}

std::int64_t MatchResult::detected_count() const {
  return std::count_if(detected_by.begin(), detected_by.end(), [](const auto& v) { return !v.empty(); });
}

MatchResult match_structures(std::span<const Structure> predicted, std::span<const Structure> ground_truth,
                             double min_iou) {
  if (!(min_iou >= 0.0 && min_iou < 1.0)) throw Error("min_iou must lie in [0, 1), got " + std::to_string(min_iou));

  MatchResult result;
  result.detected_by.resize(ground_truth.size());
  result.predictions.resize(predicted.size());
  if (predicted.empty()) return result;

  const Shape grid = predicted.front().grid;
  for (const auto& s : predicted) {
    if (s.grid != grid) throw Error("match: predicted structures live on different grids");
  }
  for (const auto& g : ground_truth) {
    if (g.grid != grid) throw Error("match: grid mismatch " + to_string(g.grid) + " vs " + to_string(grid));
  }

  // Voxel -> 1-based position in ground_truth.
  std::vector<std::int32_t> owner(static_cast<std::size_t>(grid.voxels()), 0);
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    for (std::int64_t v : ground_truth[g].voxels) owner[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(g + 1);
  }

  std::vector<std::int64_t> overlap(ground_truth.size(), 0);
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    std::fill(overlap.begin(), overlap.end(), 0);
    for (std::int64_t v : predicted[p].voxels) {
      if (const auto g = owner[static_cast<std::size_t>(v)]; g > 0) ++overlap[static_cast<std::size_t>(g - 1)];
    }

    const auto np = predicted[p].volume_voxels();
    double best_iou = 0.0;
    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (overlap[g] == 0) continue;
      const auto ng = ground_truth[g].volume_voxels();
      const double iou = static_cast<double>(overlap[g]) / static_cast<double>(np + ng - overlap[g]);
      const bool better = !best || iou > best_iou ||
                          (iou == best_iou && ground_truth[g].label < ground_truth[*best].label);
      if (better) {
        best = g;
        best_iou = iou;
      }
    }

    PredictionMatch& m = result.predictions[p];
    if (best && best_iou > min_iou) {
      const auto& g = ground_truth[*best];
      m.kind = MatchKind::TP;
      m.gt_label = g.label;
      m.iou = best_iou;
      m.dice = 2.0 * static_cast<double>(overlap[*best]) / static_cast<double>(np + g.volume_voxels());
      result.detected_by[*best].push_back(predicted[p].label);
    } else {
      m.iou = best_iou;
    }
  }
  return result;
}

FrocCurve froc_curve(std::span<const Detection> detections, Orientation orientation, std::int64_t total_gt,
                     int n_cases) {
  if (detections.empty()) throw Error("FROC: no structures");
  if (n_cases <= 0) throw Error("FROC: number of cases must be positive");
  if (total_gt < 0) throw Error("FROC: negative GT count");
  for (const auto& d : detections) {
    if (!std::isfinite(d.score)) throw Error("FROC: non-finite score");
    if (d.tp && d.gt_key < 0) throw Error("FROC: TP detection without a matched GT structure");
  }

  const bool keep_high = orientation == Orientation::Confidence;
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keep_high ? detections[a].score > detections[b].score : detections[a].score < detections[b].score;
  });

  FrocCurve curve;
  curve.orientation = orientation;
  curve.total_gt = total_gt;
  curve.n_cases = n_cases;

  FrocPoint none;
  none.threshold = keep_high ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  curve.points.push_back(none);

  std::unordered_set<std::int64_t> detected;
  std::int64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = detections[order[k]].score;
    // Every structure sharing this score enters together.
    for (; k < order.size() && detections[order[k]].score == threshold; ++k) {
      const Detection& d = detections[order[k]];
      if (d.tp) {
        ++tp;
        detected.insert(d.gt_key);
      } else {
        ++fp;
      }
    }
    FrocPoint p;
    p.threshold = threshold;
    p.retained = tp + fp;
    p.tp_retained = tp;
    p.fp_retained = fp;
    p.detected = static_cast<std::int64_t>(detected.size());
    p.recall = total_gt > 0 ? static_cast<double>(p.detected) / static_cast<double>(total_gt) : 0.0;
    p.avg_fp = static_cast<double>(fp) / static_cast<double>(n_cases);
    p.precision = static_cast<double>(tp) / static_cast<double>(p.retained);
    curve.points.push_back(p);
  }
  if (static_cast<std::int64_t>(detected.size()) > total_gt) throw Error("FROC: more detected GT structures than exist");
  return curve;
}

FpReduction fp_reduction(const FrocCurve& curve) {
  if (curve.points.empty()) throw Error("fp_reduction: empty curve");
  const FrocPoint& all = curve.keep_all();
  const std::int64_t max_detected = all.detected;
  std::int64_t best_fp = all.fp_retained;
  for (const auto& p : curve.points) {
    // recall >= 0.95 * R_max, compared on integer counts
    if (p.detected * 100 >= max_detected * 95) best_fp = std::min(best_fp, p.fp_retained);
  }
  FpReduction out;
  out.f100 = all.avg_fp;
  out.f95 = static_cast<double>(best_fp) / static_cast<double>(curve.n_cases);
  if (all.fp_retained > 0) {
    out.value = static_cast<double>(all.fp_retained - best_fp) / static_cast<double>(all.fp_retained);
  }
  return out;
}

PrecisionBand precision_band(const FrocCurve& curve) {
  std::optional<double> lo, hi;
  for (const auto& p : curve.points) {
    if (!p.precision) continue;
    lo = lo ? std::min(*lo, *p.precision) : *p.precision;
    hi = hi ? std::max(*hi, *p.precision) : *p.precision;
  }
  if (!lo) throw Error("average_recall: curve has no point with defined precision");
  return {*lo, 0.5 * (*lo + *hi)};
}

double average_recall(const FrocCurve& curve) { return average_recall(curve, precision_band(curve)); }

double average_recall(const FrocCurve& curve, const PrecisionBand& band) {
  auto recall_at = [&](double level) {
    double best = 0.0;
    for (const auto& p : curve.points) {
      if (p.precision && *p.precision >= level) best = std::max(best, p.recall);
    }
    return best;
  };
  if (band.hi <= band.lo) return recall_at(band.lo);

  double sum = 0.0;
  for (int k = 0; k < kRecallLevels; ++k) {
    const double level = band.lo + (band.hi - band.lo) * k / static_cast<double>(kRecallLevels - 1);
    sum += recall_at(level);
  }
  return sum / kRecallLevels;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman_abs(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("spearman: lists differ in length");
  if (a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  // Average ranks always sum to n(n+1)/2, so the mean is exact.
  const double mean = 0.5 * static_cast<double>(a.size() + 1);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return std::nullopt;
  return std::min(1.0, std::abs(cov) / std::sqrt(va * vb));
}

}  // namespace swu
