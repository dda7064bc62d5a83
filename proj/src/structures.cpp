#include "swu/structures.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace swu {

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Mean: return "mean";
    case Aggregation::Min: return "min";
    case Aggregation::Max: return "max";
    case Aggregation::Median: return "median";
    case Aggregation::SumLog: return "sumlog";
  }
  return "?";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "mean") return Aggregation::Mean;
  if (text == "min") return Aggregation::Min;
  if (text == "max") return Aggregation::Max;
  if (text == "median") return Aggregation::Median;
  if (text == "sumlog" || text == "sum-log") return Aggregation::SumLog;
  throw Error("unknown aggregation '" + std::string(text) + "'");
}

double aggregate_values(std::span<const double> values, Aggregation agg) {
  if (values.empty()) throw Error("cannot aggregate over an empty structure");
  switch (agg) {
    case Aggregation::Mean: {
      double sum = 0.0;
      for (double v : values) sum += v;
      return sum / static_cast<double>(values.size());
    }
    case Aggregation::Min: return *std::min_element(values.begin(), values.end());
    case Aggregation::Max: return *std::max_element(values.begin(), values.end());
    case Aggregation::Median: {
      std::vector<double> sorted(values.begin(), values.end());
      const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
      std::nth_element(sorted.begin(), mid, sorted.end());
      return *mid;
    }
    case Aggregation::SumLog: {
      double sum = 0.0;
      for (double v : values) sum += std::log(std::max(v, kLogEpsilon));
      return sum;
    }
  }
  throw Error("unhandled aggregation");
}

double aggregate(const ScalarVolume& map, const Structure& s, Aggregation agg) {
  if (s.grid != map.shape()) throw Error("aggregate: structure grid does not match map shape");
  std::vector<double> values;
  values.reserve(s.voxels.size());
  for (std::int64_t v : s.voxels) {
    const double value = map[v];
    if (!std::isfinite(value)) throw Error("aggregate: non-finite map value at voxel " + std::to_string(v));
    values.push_back(value);
  }
  return aggregate_values(values, agg);
}

PairwiseDiceScorer::PairwiseDiceScorer(const EnsembleCase& ensemble, double threshold, Connectivity connectivity)
    : members_(ensemble.ensemble_size()), shape_(ensemble.shape()) {
  if (members_ < 2) throw Error("pairwise Dice needs at least 2 ensemble members, got " + std::to_string(members_));
  if (members_ > 64) throw Error("pairwise Dice supports at most 64 ensemble members");

  membership_.assign(static_cast<std::size_t>(shape_.voxels()), 0);
  for (int t = 0; t < members_; ++t) {
    const BinaryMask m = binarize(ensemble.member(static_cast<std::size_t>(t)), threshold);
    const auto bits = m.data();
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i]) membership_[i] |= (std::uint64_t{1} << t);
    }
  }

  std::vector<std::uint8_t> any(membership_.size());
  for (std::size_t i = 0; i < any.size(); ++i) any[i] = membership_[i] != 0;
  union_labels_ = label_components(BinaryMask(shape_, ensemble.spacing(), std::move(any)), connectivity);
  union_voxels_.resize(static_cast<std::size_t>(union_labels_.count));
  for (std::size_t i = 0; i < union_labels_.labels.size(); ++i) {
    if (const int l = union_labels_.labels[i]; l > 0) union_voxels_[static_cast<std::size_t>(l - 1)].push_back(i);
  }
}

double PairwiseDiceScorer::score(const Structure& s) const {
  if (s.grid != shape_) throw Error("pairwise Dice: structure grid does not match ensemble shape");
  int region = 0;
  for (std::int64_t v : s.voxels) {
    if ((region = union_labels_.labels[static_cast<std::size_t>(v)]) > 0) break;
  }
  if (region == 0) throw Error("pairwise Dice: structure " + std::to_string(s.label) + " lies outside every member mask");

  const auto T = static_cast<std::size_t>(members_);
  std::vector<std::int64_t> sizes(T, 0);
  std::vector<std::int64_t> overlap(T * T, 0);
  for (std::int64_t v : union_voxels_[static_cast<std::size_t>(region - 1)]) {
    const std::uint64_t bits = membership_[static_cast<std::size_t>(v)];
    for (std::size_t a = 0; a < T; ++a) {
      if (!(bits >> a & 1u)) continue;
      ++sizes[a];
      for (std::size_t b = a + 1; b < T; ++b) {
        if (bits >> b & 1u) ++overlap[a * T + b];
      }
    }
  }

  double total = 0.0;
  for (std::size_t a = 0; a < T; ++a) {
    for (std::size_t b = a + 1; b < T; ++b) {
      const std::int64_t denom = sizes[a] + sizes[b];
      total += denom == 0 ? 1.0 : 2.0 * static_cast<double>(overlap[a * T + b]) / static_cast<double>(denom);
    }
  }
  return total / static_cast<double>(T * (T - 1) / 2);
}

double pairwise_dice_score(const EnsembleCase& ensemble, const Structure& s, double threshold,
                           Connectivity connectivity) {
  return PairwiseDiceScorer(ensemble, threshold, connectivity).score(s);
}

std::string ScoringMethod::name() const {
  std::string out(to_string(spec.estimator));
  if (spec.estimator != Estimator::PairwiseDice) {
    out += ':';
    out += to_string(aggregation);
  }
  if (!spec.source.is_ensemble()) out += '@' + std::to_string(spec.source.member);
  return out;
}

ScoringMethod ScoringMethod::parse(std::string_view name) {
  std::string_view body = name;
  Source source = Source::ensemble();
  if (const auto at = body.find('@'); at != std::string_view::npos) {
    const std::string index(body.substr(at + 1));
    if (index.empty() || index.find_first_not_of("0123456789") != std::string::npos) {
      throw Error("bad member index in method '" + std::string(name) + "'");
    }
    source = Source::single(std::stoi(index));
    body = body.substr(0, at);
  }
  ScoringMethod m;
  const auto colon = body.find(':');
  m.spec = {parse_estimator(body.substr(0, colon)), source};
  if (colon != std::string_view::npos) {
    m.aggregation = parse_aggregation(body.substr(colon + 1));
  } else if (m.spec.estimator != Estimator::PairwiseDice) {
    throw Error("method '" + std::string(name) + "' needs an aggregation, e.g. Entropy:mean");
  }
  if (m.spec.estimator == Estimator::PairwiseDice) m.aggregation = Aggregation::Mean;
  if (!m.spec.source.is_ensemble() && requires_ensemble(m.spec.estimator)) {
    throw Error("method '" + std::string(name) + "' needs the ensemble source");
  }
  return m;
}

std::vector<ScoringMethod> default_methods() {
  std::vector<ScoringMethod> out;
  for (const char* name : {"Pred:max", "Pred:mean", "Logit:mean", "AE:min", "Entropy:mean", "Entropy:min",
                           "Entropy:sumlog", "MI:mean", "PD", "Variance:min", "Pred:max@0"}) {
    out.push_back(ScoringMethod::parse(name));
  }
  return out;
}

std::vector<ScoringMethod> parse_methods(std::string_view comma_separated) {
  std::vector<ScoringMethod> out;
  while (!comma_separated.empty()) {
    const auto comma = comma_separated.find(',');
    const auto item = comma_separated.substr(0, comma);
    if (!item.empty()) {
      auto m = ScoringMethod::parse(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    comma_separated.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error("empty method list");
  return out;
}

double ScoredStructure::score(const ScoringMethod& m) const {
  const auto it = scores.find(m.name());
  if (it == scores.end()) throw Error("structure has no score for method '" + m.name() + "'");
  return it->second;
}

std::vector<ScoredStructure> score_structures(const EnsembleCase& ensemble, std::span<const ScoringMethod> methods,
                                              double threshold, Connectivity connectivity) {
  for (const auto& m : methods) m.spec.validate(ensemble.ensemble_size());

  std::vector<Source> sources;
  for (const auto& m : methods) {
    if (std::find(sources.begin(), sources.end(), m.spec.source) == sources.end()) sources.push_back(m.spec.source);
  }

  std::vector<ScoredStructure> out;
  std::optional<PairwiseDiceScorer> pd;
  for (const Source& source : sources) {
    const ScalarVolume prob = source.is_ensemble() ? mean_prediction(ensemble)
                                                   : ensemble.member(static_cast<std::size_t>(source.member));
    auto structures = connected_components(binarize(prob, threshold), connectivity);
    if (structures.empty()) continue;

    const std::size_t first = out.size();
    for (auto& s : structures) out.push_back({ensemble.case_id(), source, std::move(s), {}});

    std::map<Estimator, ScalarVolume> maps;
    auto map_for = [&](Estimator e) -> const ScalarVolume& {
      auto it = maps.find(e);
      if (it != maps.end()) return it->second;
      ScalarVolume m;
      switch (e) {
        case Estimator::Pred: m = prob; break;
        case Estimator::Logit: m = logit_map(prob); break;
        case Estimator::Entropy: m = entropy_map(prob); break;
        case Estimator::AvgEntropy: m = average_entropy_map(ensemble); break;
        case Estimator::MutualInfo: m = mutual_information_map(ensemble); break;
        case Estimator::Variance: m = variance_map(ensemble); break;
        case Estimator::PairwiseDice: throw Error("PD has no voxel map");
      }
      return maps.emplace(e, std::move(m)).first->second;
    };

    for (const auto& method : methods) {
      if (!(method.spec.source == source)) continue;
      const std::string name = method.name();
      for (std::size_t k = first; k < out.size(); ++k) {
        double value = 0.0;
        if (method.spec.estimator == Estimator::PairwiseDice) {
          if (!pd) pd.emplace(ensemble, threshold, connectivity);
          value = pd->score(out[k].structure);
        } else {
          value = aggregate(map_for(method.spec.estimator), out[k].structure, method.aggregation);
        }
        out[k].scores[name] = value;
      }
    }
  }
  return out;
}

}  // namespace swu
