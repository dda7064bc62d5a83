#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swu/volume.hpp"

namespace swu {

// Volumes live as a pair of files: `<name>.json` holds
//   {"shape": [z, y, x], "spacing": [sz, sy, sx], "dtype": "f32le", "order": "row-major"}
// and `<name>.raw` holds the little-endian float32 payload. Paths passed to the
// functions below may name either file or the bare `<name>` stem.

struct VolumePaths {
  std::filesystem::path header;
  std::filesystem::path payload;
};

VolumePaths volume_paths(const std::filesystem::path& path);

ScalarVolume load_volume(const std::filesystem::path& path);
void save_volume(const ScalarVolume& volume, const std::filesystem::path& path);

/// Masks use the same container with values stored as 0.0f / 1.0f.
BinaryMask load_mask(const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

struct CaseManifest {
  std::string case_id;
  std::vector<std::filesystem::path> member_paths;
  std::optional<std::filesystem::path> gt_path;
  Provenance label = Provenance::ID;
};

/// Reads a dataset manifest (JSON array of case records). Relative paths are
/// resolved against the manifest's directory.
std::vector<CaseManifest> read_manifest(const std::filesystem::path& path);

/// Writes a dataset manifest. Paths are stored relative to the manifest's
/// directory where possible.
void write_manifest(std::span<const CaseManifest> cases, const std::filesystem::path& path);

/// Loads and validates every member. OOD cases without a ground-truth file get
/// an all-zero mask; ID cases without one get none.
EnsembleCase load_case(const CaseManifest& manifest);

}  // namespace swu
