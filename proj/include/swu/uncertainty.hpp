#pragma once

#include <string>
#include <string_view>

#include "swu/volume.hpp"

namespace swu {

enum class Estimator { Pred, Logit, Entropy, AvgEntropy, MutualInfo, Variance, PairwiseDice };

/// Confidence scores keep structures with high values; uncertainty scores
/// filter them.
enum class Orientation { Confidence, Uncertainty };

std::string_view to_string(Estimator e);
std::string_view to_string(Orientation o);
Estimator parse_estimator(std::string_view text);

Orientation orientation_of(Estimator e);

/// True for estimators that only exist for an ensemble of two or more members.
bool requires_ensemble(Estimator e);

/// Which probability map an estimator reads: one ensemble member or the
/// voxel-wise ensemble mean.
struct Source {
  static constexpr int kEnsemble = -1;
  int member = kEnsemble;

  static Source ensemble() { return {}; }
  static Source single(int index) { return {index}; }
  bool is_ensemble() const { return member == kEnsemble; }

  friend bool operator==(const Source&, const Source&) = default;
};

struct MethodSpec {
  Estimator estimator = Estimator::Entropy;
  Source source;

  Orientation orientation() const { return orientation_of(estimator); }

  /// Throws if the spec cannot be evaluated on an ensemble of `ensemble_size`.
  void validate(int ensemble_size) const;

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// Guard for logarithms and logits: probabilities are clamped to
/// [kLogEpsilon, 1 - kLogEpsilon] before any log is taken.
inline constexpr double kLogEpsilon = 1e-7;

// Per-voxel kernels, exposed for callers that work on scalars. All use the
// natural logarithm.

/// -p ln p - (1-p) ln(1-p), with 0 ln 0 := 0.
double binary_entropy(double p);
/// ln(p / (1-p)) with p clamped to [kLogEpsilon, 1 - kLogEpsilon].
double logit(double p);

ScalarVolume mean_prediction(const EnsembleCase& ensemble);
ScalarVolume entropy_map(const ScalarVolume& prob);
ScalarVolume logit_map(const ScalarVolume& prob);

ScalarVolume average_entropy_map(const EnsembleCase& ensemble);
ScalarVolume mutual_information_map(const EnsembleCase& ensemble);
ScalarVolume variance_map(const EnsembleCase& ensemble);

struct OrientedMap {
  ScalarVolume map;
  Orientation orientation;
};

/// Voxel map for every map-producing estimator. PairwiseDice is rejected: it
/// only exists per structure (see structures.hpp).
OrientedMap confidence_map(const MethodSpec& spec, const EnsembleCase& ensemble);

}  // namespace swu
