#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swu/uncertainty.hpp"
#include "swu/volume.hpp"

namespace swu {

enum class Connectivity { Six = 6, Eighteen = 18, TwentySix = 26 };

Connectivity parse_connectivity(int value);

struct BoundingBox {
  Index3 min;
  Index3 max;  // inclusive
};

/// One connected component of a binary mask. Voxels are linear indices into
/// `grid`, in row-major order.
struct Structure {
  int label = 0;
  Shape grid;
  std::vector<std::int64_t> voxels;
  BoundingBox bbox;

  std::int64_t volume_voxels() const { return static_cast<std::int64_t>(voxels.size()); }
  Index3 coord(std::size_t i) const { return grid.coord(voxels[i]); }
};

/// Voxel = 1 iff prob > threshold. Threshold must lie in (0, 1).
BinaryMask binarize(const ScalarVolume& prob, double threshold);

/// Per-voxel component labels (0 = background, 1..count in order of the first
/// voxel met in a row-major scan).
struct LabelVolume {
  Shape shape;
  std::vector<std::int32_t> labels;
  int count = 0;
};

LabelVolume label_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::TwentySix);
std::vector<Structure> structures_from_labels(const LabelVolume& labels);
std::vector<Structure> connected_components(const BinaryMask& mask,
                                            Connectivity connectivity = Connectivity::TwentySix);

enum class Aggregation { Mean, Min, Max, Median, SumLog };

std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view text);

/// Statistic of `values` under `agg`. Median takes the lower-middle element for
/// even counts; sum-log floors each value at kLogEpsilon before the log.
double aggregate_values(std::span<const double> values, Aggregation agg);
double aggregate(const ScalarVolume& map, const Structure& s, Aggregation agg);

/// Per-case context for the pairwise-Dice score. Members are binarized once,
/// the union of member masks is labelled once, and each structure is then
/// scored over the union component that contains it.
class PairwiseDiceScorer {
 public:
  PairwiseDiceScorer(const EnsembleCase& ensemble, double threshold,
                     Connectivity connectivity = Connectivity::TwentySix);

  /// Mean Dice over all unordered member pairs, with both masks restricted to
  /// the union component containing `s`. Empty-vs-empty pairs count as 1.
  double score(const Structure& s) const;

 private:
  int members_ = 0;
  Shape shape_;
  std::vector<std::uint64_t> membership_;  // bit t set iff member t is foreground
  LabelVolume union_labels_;
  std::vector<std::vector<std::int64_t>> union_voxels_;
};

double pairwise_dice_score(const EnsembleCase& ensemble, const Structure& s, double threshold,
                           Connectivity connectivity = Connectivity::TwentySix);

/// A method row: estimator + source + aggregation. Named like "Entropy:mean",
/// "Pred:max@0" (member 0 instead of the ensemble mean) or "PD".
struct ScoringMethod {
  MethodSpec spec;
  Aggregation aggregation = Aggregation::Mean;

  std::string name() const;
  static ScoringMethod parse(std::string_view name);

  friend bool operator==(const ScoringMethod& a, const ScoringMethod& b) { return a.name() == b.name(); }
};

/// The default roster: every ensemble row of the FP-reduction comparison plus
/// the single-model max-probability baseline on member 0.
std::vector<ScoringMethod> default_methods();

std::vector<ScoringMethod> parse_methods(std::string_view comma_separated);

struct ScoredStructure {
  std::string case_id;
  Source source;
  Structure structure;
  std::map<std::string, double> scores;  // keyed by ScoringMethod::name()

  double score(const ScoringMethod& m) const;
};

/// Runs the three-step pipeline for one case: voxel maps, structure
/// extraction at `threshold`, aggregation. Structures come from the mean
/// prediction for ensemble methods and from the member itself for
/// single-member methods; results are grouped by source in order of first
/// appearance in `methods`, then by structure label.
std::vector<ScoredStructure> score_structures(const EnsembleCase& ensemble, std::span<const ScoringMethod> methods,
                                              double threshold = 0.5,
                                              Connectivity connectivity = Connectivity::TwentySix);

}  // namespace swu
