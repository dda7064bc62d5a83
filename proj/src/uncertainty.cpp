#include "swu/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace swu {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::Pred: return "Pred";
    case Estimator::Logit: return "Logit";
    case Estimator::Entropy: return "Entropy";
    case Estimator::AvgEntropy: return "AE";
    case Estimator::MutualInfo: return "MI";
    case Estimator::Variance: return "Variance";
    case Estimator::PairwiseDice: return "PD";
  }
  return "?";
}

std::string_view to_string(Orientation o) { return o == Orientation::Confidence ? "confidence" : "uncertainty"; }

Estimator parse_estimator(std::string_view text) {
  if (text == "Pred") return Estimator::Pred;
  if (text == "Logit") return Estimator::Logit;
  if (text == "Entropy") return Estimator::Entropy;
  if (text == "AE" || text == "AvgEntropy") return Estimator::AvgEntropy;
  if (text == "MI" || text == "MutualInfo") return Estimator::MutualInfo;
  if (text == "Variance" || text == "Var") return Estimator::Variance;
  if (text == "PD" || text == "PairwiseDice") return Estimator::PairwiseDice;
  throw Error("unknown estimator '" + std::string(text) + "'");
}

Orientation orientation_of(Estimator e) {
  switch (e) {
    case Estimator::Pred:
    case Estimator::Logit:
    case Estimator::PairwiseDice:
      return Orientation::Confidence;
    default:
      return Orientation::Uncertainty;
  }
}

bool requires_ensemble(Estimator e) {
  return e == Estimator::AvgEntropy || e == Estimator::MutualInfo || e == Estimator::Variance ||
         e == Estimator::PairwiseDice;
}

void MethodSpec::validate(int ensemble_size) const {
  if (ensemble_size < 1) throw Error("empty ensemble");
  if (!source.is_ensemble()) {
    if (requires_ensemble(estimator)) {
      throw Error(std::string(to_string(estimator)) + " needs the ensemble source, not a single member");
    }
    if (source.member < 0 || source.member >= ensemble_size) {
      throw Error("member index " + std::to_string(source.member) + " out of range for ensemble of " +
                  std::to_string(ensemble_size));
    }
  } else if (requires_ensemble(estimator) && ensemble_size < 2) {
    throw Error(std::string(to_string(estimator)) + " needs at least 2 ensemble members, got " +
                std::to_string(ensemble_size));
  }
}

namespace {

double xlogx(double p) { return p > 0.0 ? p * std::log(std::max(p, kLogEpsilon)) : 0.0; }

// Summation over sorted operands, so the result does not depend on member order.
double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

void require_probability(const ScalarVolume& prob, const char* what) {
  for (std::int64_t i = 0; i < prob.size(); ++i) {
    const float v = prob[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(std::string(what) + ": input is not a probability volume (value " + std::to_string(v) +
                  " at voxel " + std::to_string(i) + ")");
    }
  }
}

void require_ensemble(const EnsembleCase& ensemble, const char* what) {
  if (ensemble.ensemble_size() < 2) {
    throw Error(std::string(what) + " needs at least 2 ensemble members, got " +
                std::to_string(ensemble.ensemble_size()));
  }
}

}  // namespace

double binary_entropy(double p) { return std::max(0.0, -(xlogx(p) + xlogx(1.0 - p))); }

double logit(double p) {
  const double q = std::clamp(p, kLogEpsilon, 1.0 - kLogEpsilon);
  return std::log(q / (1.0 - q));
}

ScalarVolume mean_prediction(const EnsembleCase& ensemble) {
  const auto& members = ensemble.members();
  if (members.empty()) throw Error("mean_prediction: empty ensemble");
  const auto T = members.size();
  ScalarVolume out(ensemble.shape(), ensemble.spacing());
  std::vector<double> buf(T);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    for (std::size_t t = 0; t < T; ++t) buf[t] = members[t][i];
    out[i] = static_cast<float>(sorted_sum(buf) / static_cast<double>(T));
  }
  return out;
}

ScalarVolume entropy_map(const ScalarVolume& prob) {
  require_probability(prob, "entropy_map");
  ScalarVolume out(prob.shape(), prob.spacing());
  const auto in = prob.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<float>(binary_entropy(in[i]));
  return out;
}

ScalarVolume logit_map(const ScalarVolume& prob) {
  require_probability(prob, "logit_map");
  ScalarVolume out(prob.shape(), prob.spacing());
  const auto in = prob.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<float>(logit(in[i]));
  return out;
}

ScalarVolume average_entropy_map(const EnsembleCase& ensemble) {
  require_ensemble(ensemble, "average_entropy_map");
  const auto& members = ensemble.members();
  const auto T = members.size();
  ScalarVolume out(ensemble.shape(), ensemble.spacing());
  std::vector<double> buf(T);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    for (std::size_t t = 0; t < T; ++t) buf[t] = binary_entropy(members[t][i]);
    out[i] = static_cast<float>(sorted_sum(buf) / static_cast<double>(T));
  }
  return out;
}

ScalarVolume mutual_information_map(const EnsembleCase& ensemble) {
  require_ensemble(ensemble, "mutual_information_map");
  const auto& members = ensemble.members();
  const auto T = members.size();
  ScalarVolume out(ensemble.shape(), ensemble.spacing());
  std::vector<double> probs(T);
  std::vector<double> entropies(T);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    bool unanimous = true;
    for (std::size_t t = 0; t < T; ++t) {
      probs[t] = members[t][i];
      entropies[t] = binary_entropy(probs[t]);
      unanimous = unanimous && probs[t] == probs[0];
    }
    if (unanimous) {
      out[i] = 0.0f;
      continue;
    }
    // The mean is rounded to storage precision so that MI, AE and
    // entropy(mean_prediction) stay consistent with one another.
    const float mean = static_cast<float>(sorted_sum(probs) / static_cast<double>(T));
    const double average_entropy = sorted_sum(entropies) / static_cast<double>(T);
    out[i] = static_cast<float>(std::max(0.0, binary_entropy(mean) - average_entropy));
  }
  return out;
}

ScalarVolume variance_map(const EnsembleCase& ensemble) {
  require_ensemble(ensemble, "variance_map");
  const auto& members = ensemble.members();
  const auto T = members.size();
  ScalarVolume out(ensemble.shape(), ensemble.spacing());
  std::vector<double> buf(T);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    for (std::size_t t = 0; t < T; ++t) buf[t] = members[t][i];
    const double mean = sorted_sum(buf) / static_cast<double>(T);
    // With channels {p, 1-p} both deviations have equal magnitude, so the
    // two-channel average reduces to the plain population variance.
    for (std::size_t t = 0; t < T; ++t) buf[t] = (buf[t] - mean) * (buf[t] - mean);
    out[i] = static_cast<float>(sorted_sum(buf) / static_cast<double>(T));
  }
  return out;
}

OrientedMap confidence_map(const MethodSpec& spec, const EnsembleCase& ensemble) {
  if (spec.estimator == Estimator::PairwiseDice) {
    throw Error("PD is a structure-level score and has no voxel map");
  }
  spec.validate(ensemble.ensemble_size());

  auto probability = [&]() {
    return spec.source.is_ensemble() ? mean_prediction(ensemble)
                                     : ensemble.member(static_cast<std::size_t>(spec.source.member));
  };

  switch (spec.estimator) {
    case Estimator::Pred: return {probability(), Orientation::Confidence};
    case Estimator::Logit: return {logit_map(probability()), Orientation::Confidence};
    case Estimator::Entropy: return {entropy_map(probability()), Orientation::Uncertainty};
    case Estimator::AvgEntropy: return {average_entropy_map(ensemble), Orientation::Uncertainty};
    case Estimator::MutualInfo: return {mutual_information_map(ensemble), Orientation::Uncertainty};
    case Estimator::Variance: return {variance_map(ensemble), Orientation::Uncertainty};
    case Estimator::PairwiseDice: break;
  }
  throw Error("unhandled estimator");
}

}  // namespace swu
