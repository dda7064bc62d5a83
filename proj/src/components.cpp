#include <algorithm>
#include <array>
#include <cstdlib>
#include <numeric>

#include "swu/structures.hpp"

namespace swu {

Connectivity parse_connectivity(int value) {
  switch (value) {
    case 6: return Connectivity::Six;
    case 18: return Connectivity::Eighteen;
    case 26: return Connectivity::TwentySix;
    default: throw Error("connectivity must be 6, 18 or 26, got " + std::to_string(value));
  }
}

BinaryMask binarize(const ScalarVolume& prob, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error("binarize: threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(prob.size()));
  const auto in = prob.data();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<double>(in[i]) > threshold ? 1 : 0;
  return BinaryMask(prob.shape(), prob.spacing(), std::move(bits));
}

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::int64_t find(std::int64_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(std::int64_t a, std::int64_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller index becomes the root; keeps roots at the earliest scanned voxel.
    if (a < b) parent_[b] = a; else parent_[a] = b;
  }

 private:
  std::vector<std::int64_t> parent_;
};

struct Offset {
  int dz, dy, dx;
};

// Neighbours already visited by a row-major scan: those lexicographically
// before (0, 0, 0) in (dz, dy, dx).
std::vector<Offset> backward_neighbourhood(Connectivity connectivity) {
  const int limit = connectivity == Connectivity::Six ? 1 : connectivity == Connectivity::Eighteen ? 2 : 3;
  std::vector<Offset> out;
  for (int dz = -1; dz <= 0; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const bool before = dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx < 0)));
        if (!before) continue;
        if (std::abs(dz) + std::abs(dy) + std::abs(dx) > limit) continue;
        out.push_back({dz, dy, dx});
      }
    }
  }
  return out;
}

}  // namespace

LabelVolume label_components(const BinaryMask& mask, Connectivity connectivity) {
  const Shape shape = mask.shape();
  const auto n = static_cast<std::size_t>(shape.voxels());
  const auto fg = mask.data();
  const auto offsets = backward_neighbourhood(connectivity);

  DisjointSet sets(n);
  for (std::int64_t z = 0; z < shape.z; ++z) {
    for (std::int64_t y = 0; y < shape.y; ++y) {
      for (std::int64_t x = 0; x < shape.x; ++x) {
        const std::int64_t i = shape.index(z, y, x);
        if (!fg[i]) continue;
        for (const auto& o : offsets) {
          const std::int64_t nz = z + o.dz, ny = y + o.dy, nx = x + o.dx;
          if (!shape.contains(nz, ny, nx)) continue;
          const std::int64_t j = shape.index(nz, ny, nx);
          if (fg[j]) sets.unite(i, j);
        }
      }
    }
  }

  LabelVolume out{shape, std::vector<std::int32_t>(n, 0), 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (!fg[i]) continue;
    const auto root = static_cast<std::size_t>(sets.find(static_cast<std::int64_t>(i)));
    // Roots are the first voxel of their component in scan order, so the root
    // is labelled before (or when) any other member is reached.
    if (root == i) out.labels[i] = ++out.count;
    else out.labels[i] = out.labels[root];
  }
  return out;
}

std::vector<Structure> structures_from_labels(const LabelVolume& labels) {
  std::vector<Structure> out(static_cast<std::size_t>(labels.count));
  for (int k = 0; k < labels.count; ++k) {
    out[k].label = k + 1;
    out[k].grid = labels.shape;
  }
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const int l = labels.labels[i];
    if (l == 0) continue;
    Structure& s = out[static_cast<std::size_t>(l - 1)];
    const Index3 c = labels.shape.coord(static_cast<std::int64_t>(i));
    if (s.voxels.empty()) {
      s.bbox = {c, c};
    } else {
      s.bbox.min = {std::min(s.bbox.min.z, c.z), std::min(s.bbox.min.y, c.y), std::min(s.bbox.min.x, c.x)};
      s.bbox.max = {std::max(s.bbox.max.z, c.z), std::max(s.bbox.max.y, c.y), std::max(s.bbox.max.x, c.x)};
    }
    s.voxels.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

std::vector<Structure> connected_components(const BinaryMask& mask, Connectivity connectivity) {
  return structures_from_labels(label_components(mask, connectivity));
}

}  // namespace swu
