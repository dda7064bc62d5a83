#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "swu/volume.hpp"
#include "swu/volume_io.hpp"

namespace swu {

enum class FpMode { Agreeing, Discrepant };

std::string_view to_string(FpMode m);
FpMode parse_fp_mode(std::string_view text);

/// Knobs of the synthetic ensemble generator. Lesions are ellipsoids; each
/// member sees a smooth radial profile that crosses 0.5 at its own (jittered)
/// boundary.
struct SynthConfig {
  Shape shape{64, 64, 64};
  Spacing spacing = kUnitSpacing;
  int n_cases = 20;
  int ensemble_size = 5;
  int blobs_min = 2;            // true lesions per ID case
  int blobs_max = 5;
  double radius_min = 2.0;      // voxels; radii are drawn log-uniformly
  double radius_max = 8.0;
  double tp_noise = 0.5;        // member-to-member boundary jitter, voxels
  double fp_rate = 1.0;         // expected false-positive blobs per ID case
  FpMode fp_mode = FpMode::Agreeing;
  double fp_quality_link = 1.0; // how strongly corruption shows up as uncertainty
  double steepness = 2.0;       // profile slope at the boundary, per voxel
  int ood_cases = 0;            // companion OOD cases: empty GT, discrepant FPs only
  double ood_fp_rate = 3.0;
  std::uint64_t seed = 0;

  /// Throws on an unusable configuration.
  void validate() const;
};

SynthConfig read_synth_config(const std::filesystem::path& path);
std::string synth_config_json(const SynthConfig& config);

enum class BlobKind { TP, FP };

/// Generation ledger entry for one blob.
struct BlobRecord {
  BlobKind kind = BlobKind::TP;
  std::array<double, 3> center{};  // ground-truth centre (z, y, x)
  std::array<double, 3> radii{};   // ground-truth semi-axes
  double radius = 0.0;             // nominal radius before axis stretch
  double corruption = 0.0;         // in [0, 1]; higher = worse prediction
  double support = 0.0;            // radius beyond which every member is 0
  std::uint64_t members = 0;       // bit t set iff member t shows the blob
};

struct SynthCase {
  EnsembleCase ensemble;
  Provenance provenance = Provenance::ID;
  std::vector<BlobRecord> blobs;
};

/// Seed of case `index`, derived independently per case so that generation
/// order does not matter.
std::uint64_t case_seed(std::uint64_t dataset_seed, int index, Provenance provenance);

std::string case_id(int index, Provenance provenance);

/// Deterministic in (config, seed, provenance). OOD cases carry no true
/// lesions and an all-zero ground truth.
SynthCase generate_case(const SynthConfig& config, std::uint64_t seed, Provenance provenance = Provenance::ID,
                        std::string id = "case");

/// All ID cases then all OOD cases of `config`, in memory.
std::vector<SynthCase> generate_cases(const SynthConfig& config, int workers = 1);

/// Writes volumes, ledgers and `manifest.json` under `out_dir`; returns the
/// manifest path.
std::filesystem::path generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir,
                                       int workers = 1);

}  // namespace swu
