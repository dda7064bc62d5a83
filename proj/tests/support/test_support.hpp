#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "swu/structures.hpp"
#include "swu/volume.hpp"

namespace swu::testing {

inline ScalarVolume random_volume(Shape shape, std::mt19937_64& rng, float lo = 0.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  ScalarVolume v(shape, kUnitSpacing);
  for (auto& x : v.data()) x = u(rng);
  return v;
}

inline std::vector<float> values(const ScalarVolume& v) { return {v.data().begin(), v.data().end()}; }

inline BinaryMask random_mask(Shape shape, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution b(density);
  BinaryMask m(shape, kUnitSpacing);
  for (auto& x : m.data()) x = b(rng) ? 1 : 0;
  return m;
}

inline EnsembleCase random_ensemble(Shape shape, int members, std::mt19937_64& rng, std::string id = "rand") {
  std::vector<ScalarVolume> vols;
  for (int t = 0; t < members; ++t) vols.push_back(random_volume(shape, rng));
  return EnsembleCase(std::move(id), std::move(vols));
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("swu_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Breadth-first flood fill with explicitly enumerated neighbours; labels in
/// order of the first voxel met in a row-major scan.
inline std::vector<int> flood_fill_labels(const BinaryMask& mask, int connectivity) {
  const Shape s = mask.shape();
  std::vector<std::array<int, 3>> offsets;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int n = std::abs(dz) + std::abs(dy) + std::abs(dx);
        if (n == 0) continue;
        if (connectivity == 6 && n > 1) continue;
        if (connectivity == 18 && n > 2) continue;
        offsets.push_back({dz, dy, dx});
      }
  std::vector<int> labels(static_cast<std::size_t>(s.voxels()), 0);
  int next = 0;
  std::vector<std::int64_t> queue;
  for (std::int64_t i = 0; i < s.voxels(); ++i) {
    if (!mask[i] || labels[i]) continue;
    labels[i] = ++next;
    queue.assign(1, i);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Index3 c = s.coord(queue[head]);
      for (const auto& o : offsets) {
        const std::int64_t z = c.z + o[0], y = c.y + o[1], x = c.x + o[2];
        if (!s.contains(z, y, x)) continue;
        const std::int64_t j = s.index(z, y, x);
        if (mask[j] && !labels[j]) {
          labels[j] = next;
          queue.push_back(j);
        }
      }
    }
  }
  return labels;
}

/// Tie-aware ranks by direct counting: rank = #less + (#equal + 1) / 2.
inline std::vector<double> brute_force_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace swu::testing
