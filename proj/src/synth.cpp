#include "swu/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "swu/parallel.hpp"

namespace swu {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(FpMode m) { return m == FpMode::Agreeing ? "agreeing" : "discrepant"; }

FpMode parse_fp_mode(std::string_view text) {
  if (text == "agreeing") return FpMode::Agreeing;
  if (text == "discrepant") return FpMode::Discrepant;
  throw Error("unknown fp_mode '" + std::string(text) + "' (expected agreeing or discrepant)");
}

namespace {

// Largest semi-axis stretch applied to the nominal radius.
constexpr double kMaxAxisStretch = 1.2;
constexpr double kMinAxisStretch = 0.8;
constexpr int kPlacementAttempts = 500;

// std::mt19937_64 output is fixed by the standard; the conversions below are
// spelled out so generated data is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  std::array<double, 3> cube() { return {uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)}; }
  std::array<double, 3> direction() {
    while (true) {
      const auto v = cube();
      const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      if (n > 1e-3 && n <= 1.0) return {v[0] / n, v[1] / n, v[2] / n};
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double norm3(const std::array<double, 3>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

struct MemberProfile {
  std::array<double, 3> offset{};  // centre relative to the ground-truth centre
  double scale = 1.0;              // boundary sits at normalised distance `scale`
};

// Everything needed to render one blob into the members.
struct BlobPlan {
  BlobRecord record;
  double amplitude = 1.0;
  double steepness = 2.0;
  std::vector<MemberProfile> members;
};

BlobPlan plan_blob(const SynthConfig& cfg, BlobKind kind, FpMode fp_mode, Rng& rng) {
  const int T = cfg.ensemble_size;
  BlobPlan plan;
  BlobRecord& rec = plan.record;
  rec.kind = kind;
  rec.radius = std::exp(rng.uniform(std::log(cfg.radius_min), std::log(cfg.radius_max)));
  for (double& a : rec.radii) a = rec.radius * rng.uniform(kMinAxisStretch, kMaxAxisStretch);

  const double link = cfg.fp_quality_link;
  plan.members.resize(static_cast<std::size_t>(T));
  // Per-member draws happen for every blob so that the random stream does not
  // depend on noise amplitudes.
  std::vector<double> jitter(static_cast<std::size_t>(T));
  std::vector<std::array<double, 3>> wobble(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    jitter[t] = rng.uniform(-1.0, 1.0);
    wobble[t] = rng.cube();
  }

  if (kind == BlobKind::TP || fp_mode == FpMode::Agreeing) {
    std::array<double, 3> shift{};
    double scale = 1.0;
    if (kind == BlobKind::TP) {
      // Corruption moves and shrinks the predicted lesion (lower Dice) and, in
      // proportion to `link`, flattens and softens its profile (higher entropy).
      rec.corruption = rng.uniform();
      const auto dir = rng.direction();
      for (int i = 0; i < 3; ++i) shift[i] = rec.corruption * 0.3 * rec.radius * dir[i];
      scale = 1.0 - 0.3 * rec.corruption;
      plan.amplitude = 1.0 - 0.3 * rec.corruption * link;
    } else {
      rec.corruption = rng.uniform(0.3, 1.0);
      plan.amplitude = 1.0 - 0.4 * rec.corruption * link;
    }
    plan.steepness = cfg.steepness * (1.0 - 0.6 * rec.corruption * link);
    for (int t = 0; t < T; ++t) {
      auto& m = plan.members[t];
      for (int i = 0; i < 3; ++i) m.offset[i] = shift[i] + 0.5 * cfg.tp_noise * wobble[t][i];
      m.scale = scale + cfg.tp_noise * jitter[t] / rec.radius;
    }
    rec.members = T >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << T) - 1;
  } else {
    // Members disagree: the blob shows up in a majority subset only, each copy
    // displaced and rescaled independently.
    rec.corruption = 1.0;
    plan.amplitude = rng.uniform(0.9, 1.0);
    plan.steepness = cfg.steepness;
    const int k_min = T / 2 + 1;
    const int k_max = std::max(k_min, T - 1);
    const int present = rng.integer(k_min, k_max);
    std::vector<int> order(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) order[t] = t;
    for (int t = T - 1; t > 0; --t) std::swap(order[t], order[rng.integer(0, t)]);
    for (int t = 0; t < present; ++t) rec.members |= std::uint64_t{1} << order[t];
    for (int t = 0; t < T; ++t) {
      auto& m = plan.members[t];
      for (int i = 0; i < 3; ++i) m.offset[i] = 0.35 * rec.radius * wobble[t][i];
      m.scale = 1.0 + 0.2 * jitter[t];
    }
  }

  double reach = 0.0;
  const double max_axis = *std::max_element(rec.radii.begin(), rec.radii.end());
  for (const auto& m : plan.members) reach = std::max(reach, norm3(m.offset) + max_axis * std::max(m.scale, 0.0));
  rec.support = reach + 4.0 / plan.steepness;
  return plan;
}

bool place(BlobPlan& plan, const std::vector<BlobPlan>& placed, const Shape& shape, Rng& rng) {
  BlobRecord& rec = plan.record;
  const std::array<double, 3> dims{static_cast<double>(shape.z), static_cast<double>(shape.y),
                                   static_cast<double>(shape.x)};
  for (int i = 0; i < 3; ++i) {
    if (2.0 * rec.radii[i] > dims[i] - 1.0) return false;
  }
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    for (int i = 0; i < 3; ++i) rec.center[i] = rng.uniform(rec.radii[i], dims[i] - 1.0 - rec.radii[i]);
    const bool clear = std::all_of(placed.begin(), placed.end(), [&](const BlobPlan& other) {
      const std::array<double, 3> d{rec.center[0] - other.record.center[0], rec.center[1] - other.record.center[1],
                                    rec.center[2] - other.record.center[2]};
      return norm3(d) >= rec.support + other.record.support;
    });
    if (clear) return true;
  }
  return false;
}

struct Box {
  std::int64_t lo[3];
  std::int64_t hi[3];  // inclusive
};

Box support_box(const BlobRecord& rec, const Shape& shape) {
  const std::int64_t dims[3] = {shape.z, shape.y, shape.x};
  Box b{};
  for (int i = 0; i < 3; ++i) {
    b.lo[i] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(rec.center[i] - rec.support)));
    b.hi[i] = std::min<std::int64_t>(dims[i] - 1, static_cast<std::int64_t>(std::ceil(rec.center[i] + rec.support)));
  }
  return b;
}

void render_member(const BlobPlan& plan, int member, ScalarVolume& out) {
  const BlobRecord& rec = plan.record;
  if (!(rec.members >> member & 1u)) return;
  const MemberProfile& m = plan.members[static_cast<std::size_t>(member)];
  const Shape& shape = out.shape();
  const Box b = support_box(rec, shape);
  const double c[3] = {rec.center[0] + m.offset[0], rec.center[1] + m.offset[1], rec.center[2] + m.offset[2]};
  const double gain = plan.steepness * rec.radius;
  for (std::int64_t z = b.lo[0]; z <= b.hi[0]; ++z) {
    const double dz = (static_cast<double>(z) - c[0]) / rec.radii[0];
    for (std::int64_t y = b.lo[1]; y <= b.hi[1]; ++y) {
      const double dy = (static_cast<double>(y) - c[1]) / rec.radii[1];
      for (std::int64_t x = b.lo[2]; x <= b.hi[2]; ++x) {
        const double dx = (static_cast<double>(x) - c[2]) / rec.radii[2];
        const double d = std::sqrt(dz * dz + dy * dy + dx * dx);
        const double p = plan.amplitude / (1.0 + std::exp(-gain * (m.scale - d)));
        float& v = out.at(z, y, x);
        v = std::max(v, static_cast<float>(p));
      }
    }
  }
}

void render_truth(const BlobRecord& rec, BinaryMask& gt) {
  const Shape& shape = gt.shape();
  const Box b = support_box(rec, shape);
  for (std::int64_t z = b.lo[0]; z <= b.hi[0]; ++z) {
    for (std::int64_t y = b.lo[1]; y <= b.hi[1]; ++y) {
      for (std::int64_t x = b.lo[2]; x <= b.hi[2]; ++x) {
        const double dz = (static_cast<double>(z) - rec.center[0]) / rec.radii[0];
        const double dy = (static_cast<double>(y) - rec.center[1]) / rec.radii[1];
        const double dx = (static_cast<double>(x) - rec.center[2]) / rec.radii[2];
        if (dz * dz + dy * dy + dx * dx <= 1.0) gt[shape.index(z, y, x)] = 1;
      }
    }
  }
}

int draw_count(double rate, Rng& rng) {
  const double whole = std::floor(rate);
  return static_cast<int>(whole) + (rng.uniform() < rate - whole ? 1 : 0);
}

json ledger_json(const SynthCase& c) {
  json blobs = json::array();
  for (const auto& b : c.blobs) {
    json j;
    j["kind"] = b.kind == BlobKind::TP ? "TP" : "FP";
    j["center"] = b.center;
    j["radii"] = b.radii;
    j["radius"] = b.radius;
    j["corruption"] = b.corruption;
    j["support"] = b.support;
    std::vector<int> members;
    for (int t = 0; t < 64; ++t) {
      if (b.members >> t & 1u) members.push_back(t);
    }
    j["members"] = members;
    blobs.push_back(std::move(j));
  }
  return json{{"case_id", c.ensemble.case_id()}, {"label", std::string(to_string(c.provenance))}, {"blobs", blobs}};
}

}  // namespace

void SynthConfig::validate() const {
  if (!shape.valid()) throw Error("synth: shape must be positive");
  if (n_cases < 0 || ood_cases < 0) throw Error("synth: case counts must be non-negative");
  if (ensemble_size < 2 || ensemble_size > 64) throw Error("synth: ensemble_size must lie in [2, 64]");
  if (blobs_min < 0 || blobs_max < blobs_min) throw Error("synth: need 0 <= blobs_min <= blobs_max");
  if (radius_min < 1.0 || radius_max < radius_min) throw Error("synth: need 1 <= radius_min <= radius_max");
  const double smallest = static_cast<double>(std::min({shape.z, shape.y, shape.x}));
  if (2.0 * kMaxAxisStretch * radius_max > smallest - 1.0) {
    throw Error("synth: grid " + to_string(shape) + " too small for radius_max " + std::to_string(radius_max));
  }
  if (!(tp_noise >= 0.0)) throw Error("synth: tp_noise must be >= 0");
  if (!(fp_rate >= 0.0) || !(ood_fp_rate >= 0.0)) throw Error("synth: fp rates must be >= 0");
  if (!(fp_quality_link >= 0.0 && fp_quality_link <= 1.0)) throw Error("synth: fp_quality_link must lie in [0, 1]");
  if (!(steepness > 0.0)) throw Error("synth: steepness must be > 0");
}

SynthConfig read_synth_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open synth config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();

  SynthConfig c;
  try {
    const json doc = json::parse(buf.str());
    for (const auto& [key, value] : doc.items()) {
      if (key == "shape") {
        const auto s = value.get<std::vector<std::int64_t>>();
        if (s.size() != 3) throw Error("shape needs 3 entries");
        c.shape = {s[0], s[1], s[2]};
      } else if (key == "spacing") {
        const auto s = value.get<std::vector<double>>();
        if (s.size() != 3) throw Error("spacing needs 3 entries");
        c.spacing = {s[0], s[1], s[2]};
      } else if (key == "n_cases") c.n_cases = value.get<int>();
      else if (key == "ensemble_size") c.ensemble_size = value.get<int>();
      else if (key == "blobs_min") c.blobs_min = value.get<int>();
      else if (key == "blobs_max") c.blobs_max = value.get<int>();
      else if (key == "radius_min") c.radius_min = value.get<double>();
      else if (key == "radius_max") c.radius_max = value.get<double>();
      else if (key == "tp_noise") c.tp_noise = value.get<double>();
      else if (key == "fp_rate") c.fp_rate = value.get<double>();
      else if (key == "fp_mode") c.fp_mode = parse_fp_mode(value.get<std::string>());
      else if (key == "fp_quality_link") c.fp_quality_link = value.get<double>();
      else if (key == "steepness") c.steepness = value.get<double>();
      else if (key == "ood_cases") c.ood_cases = value.get<int>();
      else if (key == "ood_fp_rate") c.ood_fp_rate = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw Error("unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error("malformed synth config '" + path.string() + "': " + e.what());
  } catch (const Error& e) {
    throw Error("synth config '" + path.string() + "': " + e.what());
  }
  c.validate();
  return c;
}

std::string synth_config_json(const SynthConfig& c) {
  json j;
  j["shape"] = {c.shape.z, c.shape.y, c.shape.x};
  j["spacing"] = c.spacing;
  j["n_cases"] = c.n_cases;
  j["ensemble_size"] = c.ensemble_size;
  j["blobs_min"] = c.blobs_min;
  j["blobs_max"] = c.blobs_max;
  j["radius_min"] = c.radius_min;
  j["radius_max"] = c.radius_max;
  j["tp_noise"] = c.tp_noise;
  j["fp_rate"] = c.fp_rate;
  j["fp_mode"] = std::string(to_string(c.fp_mode));
  j["fp_quality_link"] = c.fp_quality_link;
  j["steepness"] = c.steepness;
  j["ood_cases"] = c.ood_cases;
  j["ood_fp_rate"] = c.ood_fp_rate;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::uint64_t case_seed(std::uint64_t dataset_seed, int index, Provenance provenance) {
  const std::uint64_t salt = provenance == Provenance::ID ? 0x1D5EEDull : 0x00D5EEDull;
  return mix64(mix64(dataset_seed ^ salt) + static_cast<std::uint64_t>(index));
}

std::string case_id(int index, Provenance provenance) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d", provenance == Provenance::ID ? "id" : "ood", index);
  return buf;
}

SynthCase generate_case(const SynthConfig& config, std::uint64_t seed, Provenance provenance, std::string id) {
  config.validate();
  Rng rng(seed);
  const bool ood = provenance == Provenance::OOD;
  const int n_tp = ood ? 0 : rng.integer(config.blobs_min, config.blobs_max);
  const int n_fp = draw_count(ood ? config.ood_fp_rate : config.fp_rate, rng);
  const FpMode fp_mode = ood ? FpMode::Discrepant : config.fp_mode;

  std::vector<BlobPlan> plans;
  for (int i = 0; i < n_tp + n_fp; ++i) {
    plans.push_back(plan_blob(config, i < n_tp ? BlobKind::TP : BlobKind::FP, fp_mode, rng));
  }
  // Largest first: they are the hardest to fit.
  std::stable_sort(plans.begin(), plans.end(),
                   [](const BlobPlan& a, const BlobPlan& b) { return a.record.support > b.record.support; });
  std::vector<BlobPlan> placed;
  for (auto& plan : plans) {
    if (!place(plan, placed, config.shape, rng)) {
      throw Error("synth: cannot place blob " + std::to_string(placed.size() + 1) + " of " +
                  std::to_string(plans.size()) + " (radius " + std::to_string(plan.record.radius) + ", support " +
                  std::to_string(plan.record.support) + ") without overlap in grid " + to_string(config.shape) +
                  " after " + std::to_string(kPlacementAttempts) + " attempts; use fewer or smaller blobs");
    }
    placed.push_back(std::move(plan));
  }

  std::vector<ScalarVolume> members;
  for (int t = 0; t < config.ensemble_size; ++t) {
    ScalarVolume m(config.shape, config.spacing);
    for (const auto& plan : placed) render_member(plan, t, m);
    members.push_back(std::move(m));
  }
  BinaryMask gt(config.shape, config.spacing);
  for (const auto& plan : placed) {
    if (plan.record.kind == BlobKind::TP) render_truth(plan.record, gt);
  }

  SynthCase out{EnsembleCase(std::move(id), std::move(members), std::move(gt)), provenance, {}};
  for (const auto& plan : placed) out.blobs.push_back(plan.record);
  return out;
}

std::vector<SynthCase> generate_cases(const SynthConfig& config, int workers) {
  config.validate();
  const auto n_id = static_cast<std::size_t>(config.n_cases);
  const auto n = n_id + static_cast<std::size_t>(config.ood_cases);
  std::vector<SynthCase> cases(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const bool ood = i >= n_id;
    const int index = static_cast<int>(ood ? i - n_id : i);
    const Provenance p = ood ? Provenance::OOD : Provenance::ID;
    cases[i] = generate_case(config, case_seed(config.seed, index, p), p, case_id(index, p));
  });
  return cases;
}

fs::path generate_dataset(const SynthConfig& config, const fs::path& out_dir, int workers) {
  config.validate();
  fs::create_directories(out_dir);
  const auto n_id = static_cast<std::size_t>(config.n_cases);
  const auto n = n_id + static_cast<std::size_t>(config.ood_cases);
  std::vector<CaseManifest> manifest(n);

  parallel_for(n, workers, [&](std::size_t i) {
    const bool ood = i >= n_id;
    const int index = static_cast<int>(ood ? i - n_id : i);
    const Provenance p = ood ? Provenance::OOD : Provenance::ID;
    const std::string id = case_id(index, p);
    const SynthCase c = generate_case(config, case_seed(config.seed, index, p), p, id);

    const fs::path dir = out_dir / "cases" / id;
    fs::create_directories(dir);
    CaseManifest& rec = manifest[i];
    rec.case_id = id;
    rec.label = p;
    for (int t = 0; t < c.ensemble.ensemble_size(); ++t) {
      const fs::path member = dir / ("member_" + std::to_string(t) + ".json");
      save_volume(c.ensemble.member(static_cast<std::size_t>(t)), member);
      rec.member_paths.push_back(member);
    }
    if (!ood) {
      rec.gt_path = dir / "gt.json";
      save_mask(*c.ensemble.ground_truth(), *rec.gt_path);
    }
    std::ofstream ledger(dir / "ledger.json", std::ios::binary | std::ios::trunc);
    ledger << ledger_json(c).dump(2) << "\n";
    if (!ledger) throw Error("cannot write ledger for case '" + id + "'");
  });

  const fs::path manifest_path = out_dir / "manifest.json";
  write_manifest(manifest, manifest_path);
  {
    std::ofstream cfg(out_dir / "synth_config.json", std::ios::binary | std::ios::trunc);
    cfg << synth_config_json(config);
  }
  return manifest_path;
}

}  // namespace swu
