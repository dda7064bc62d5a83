#include "swu/volume.hpp"

#include <algorithm>
#include <cmath>

namespace swu {

std::string to_string(const Shape& shape) {
  return "[" + std::to_string(shape.z) + "," + std::to_string(shape.y) + "," + std::to_string(shape.x) + "]";
}

namespace {

void check_grid(const Shape& shape, const Spacing& spacing) {
  if (!shape.valid()) throw Error("shape must have three positive extents, got " + to_string(shape));
  for (double s : spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("spacing components must be finite and strictly positive");
  }
}

}  // namespace

ScalarVolume::ScalarVolume(Shape shape, Spacing spacing, float fill)
    : shape_(shape), spacing_(spacing) {
  check_grid(shape_, spacing_);
  data_.assign(static_cast<std::size_t>(shape_.voxels()), fill);
}

ScalarVolume::ScalarVolume(Shape shape, Spacing spacing, std::vector<float> data)
    : shape_(shape), spacing_(spacing), data_(std::move(data)) {
  check_grid(shape_, spacing_);
  if (static_cast<std::int64_t>(data_.size()) != shape_.voxels()) {
    throw Error("data length " + std::to_string(data_.size()) + " does not match shape " + to_string(shape_));
  }
}

void ScalarVolume::require_finite(std::string_view what) const {
  const auto bad = std::find_if(data_.begin(), data_.end(), [](float v) { return !std::isfinite(v); });
  if (bad != data_.end()) {
    throw Error(std::string(what) + ": non-finite value at voxel " + std::to_string(bad - data_.begin()));
  }
}

BinaryMask::BinaryMask(Shape shape, Spacing spacing) : shape_(shape), spacing_(spacing) {
  check_grid(shape_, spacing_);
  data_.assign(static_cast<std::size_t>(shape_.voxels()), 0);
}

BinaryMask::BinaryMask(Shape shape, Spacing spacing, std::vector<std::uint8_t> data)
    : shape_(shape), spacing_(spacing), data_(std::move(data)) {
  check_grid(shape_, spacing_);
  if (static_cast<std::int64_t>(data_.size()) != shape_.voxels()) {
    throw Error("mask length " + std::to_string(data_.size()) + " does not match shape " + to_string(shape_));
  }
  if (std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v > 1; })) {
    throw Error("mask values must be exactly 0 or 1");
  }
}

std::int64_t BinaryMask::count() const {
  return std::count(data_.begin(), data_.end(), std::uint8_t{1});
}

BinaryMask mask_from_volume(const ScalarVolume& volume) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(volume.size()));
  const auto values = volume.data();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (values[i] == 0.0f) {
      bits[i] = 0;
    } else if (values[i] == 1.0f) {
      bits[i] = 1;
    } else {
      throw Error("not a binary mask: value " + std::to_string(values[i]) + " at voxel " + std::to_string(i));
    }
  }
  return BinaryMask(volume.shape(), volume.spacing(), std::move(bits));
}

ScalarVolume volume_from_mask(const BinaryMask& mask) {
  std::vector<float> values(mask.data().begin(), mask.data().end());
  return ScalarVolume(mask.shape(), mask.spacing(), std::move(values));
}

std::string_view to_string(Provenance p) { return p == Provenance::ID ? "ID" : "OOD"; }

Provenance parse_provenance(std::string_view text) {
  if (text == "ID" || text == "id") return Provenance::ID;
  if (text == "OOD" || text == "ood") return Provenance::OOD;
  throw Error("unknown provenance label '" + std::string(text) + "' (expected ID or OOD)");
}

EnsembleCase::EnsembleCase(std::string case_id, std::vector<ScalarVolume> members,
                           std::optional<BinaryMask> ground_truth)
    : case_id_(std::move(case_id)), members_(std::move(members)), ground_truth_(std::move(ground_truth)) {
  if (members_.empty()) throw Error("case '" + case_id_ + "': empty ensemble");
  const ScalarVolume& first = members_.front();
  for (std::size_t t = 0; t < members_.size(); ++t) {
    ScalarVolume& m = members_[t];
    if (!m.same_grid(first)) {
      throw Error("case '" + case_id_ + "': inconsistent ensemble (member " + std::to_string(t) + " has shape " +
                  to_string(m.shape()) + ", member 0 has " + to_string(first.shape()) + ")");
    }
    for (float& v : m.data()) {
      if (v >= 0.0f && v <= 1.0f) continue;
      // NaN fails both comparisons below and is rejected with the out-of-range values.
      if (v >= -kProbabilityTolerance && v < 0.0f) {
        v = 0.0f;
      } else if (v > 1.0f && v <= 1.0 + kProbabilityTolerance) {
        v = 1.0f;
      } else {
        throw Error("case '" + case_id_ + "': member " + std::to_string(t) + " is not a probability volume (value " +
                    std::to_string(v) + ")");
      }
    }
  }
  if (ground_truth_) {
    if (ground_truth_->shape() != first.shape() || ground_truth_->spacing() != first.spacing()) {
      throw Error("case '" + case_id_ + "': inconsistent ensemble (ground truth grid differs from members)");
    }
  }
}

}  // namespace swu
