#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swu {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Index3 {
  std::int64_t z = 0;
  std::int64_t y = 0;
  std::int64_t x = 0;

  friend bool operator==(const Index3&, const Index3&) = default;
};

/// Grid extent in voxels, ordered (z, y, x). Storage is row-major with x fastest.
struct Shape {
  std::int64_t z = 0;
  std::int64_t y = 0;
  std::int64_t x = 0;

  std::int64_t voxels() const { return z * y * x; }
  bool valid() const { return z > 0 && y > 0 && x > 0; }

  std::int64_t index(std::int64_t iz, std::int64_t iy, std::int64_t ix) const {
    return (iz * y + iy) * x + ix;
  }
  std::int64_t index(const Index3& c) const { return index(c.z, c.y, c.x); }

  Index3 coord(std::int64_t linear) const {
    const std::int64_t ix = linear % x;
    const std::int64_t rest = linear / x;
    return {rest / y, rest % y, ix};
  }

  bool contains(std::int64_t iz, std::int64_t iy, std::int64_t ix) const {
    return iz >= 0 && iy >= 0 && ix >= 0 && iz < z && iy < y && ix < x;
  }

  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

/// Physical voxel size in mm, ordered like Shape.
using Spacing = std::array<double, 3>;

inline constexpr Spacing kUnitSpacing{1.0, 1.0, 1.0};

/// Dense 3D grid of 32-bit reals. Carries probabilities, logits and
/// uncertainty maps alike.
class ScalarVolume {
 public:
  ScalarVolume() = default;
  ScalarVolume(Shape shape, Spacing spacing, float fill = 0.0f);
  ScalarVolume(Shape shape, Spacing spacing, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

  float at(std::int64_t z, std::int64_t y, std::int64_t x) const { return (*this)[shape_.index(z, y, x)]; }
  float& at(std::int64_t z, std::int64_t y, std::int64_t x) { return (*this)[shape_.index(z, y, x)]; }

  bool same_grid(const ScalarVolume& other) const {
    return shape_ == other.shape_ && spacing_ == other.spacing_;
  }

  /// Throws if any value is NaN or infinite.
  void require_finite(std::string_view what) const;

 private:
  Shape shape_;
  Spacing spacing_ = kUnitSpacing;
  std::vector<float> data_;
};

/// Dense 3D {0,1} mask on the same grid conventions as ScalarVolume.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(Shape shape, Spacing spacing);
  BinaryMask(Shape shape, Spacing spacing, std::vector<std::uint8_t> data);

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  std::uint8_t& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

  std::int64_t count() const;

 private:
  Shape shape_;
  Spacing spacing_ = kUnitSpacing;
  std::vector<std::uint8_t> data_;
};

/// Mask with 1 where the volume is exactly 1 and 0 where exactly 0; any other
/// value is rejected.
BinaryMask mask_from_volume(const ScalarVolume& volume);
ScalarVolume volume_from_mask(const BinaryMask& mask);

enum class Provenance { ID, OOD };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

/// Probability values this far outside [0, 1] are clamped rather than rejected.
inline constexpr double kProbabilityTolerance = 1e-6;

/// T member probability maps for one case plus an optional reference mask.
class EnsembleCase {
 public:
  EnsembleCase() = default;

  /// Validates grid consistency and probability range. Values within
  /// kProbabilityTolerance of [0, 1] are clamped in place.
  EnsembleCase(std::string case_id, std::vector<ScalarVolume> members,
               std::optional<BinaryMask> ground_truth = std::nullopt);

  const std::string& case_id() const { return case_id_; }
  const std::vector<ScalarVolume>& members() const { return members_; }
  const ScalarVolume& member(std::size_t i) const { return members_.at(i); }
  int ensemble_size() const { return static_cast<int>(members_.size()); }
  const std::optional<BinaryMask>& ground_truth() const { return ground_truth_; }

  const Shape& shape() const { return members_.front().shape(); }
  const Spacing& spacing() const { return members_.front().spacing(); }

 private:
  std::string case_id_;
  std::vector<ScalarVolume> members_;
  std::optional<BinaryMask> ground_truth_;
};

}  // namespace swu
