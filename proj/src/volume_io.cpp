#include "swu/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace swu {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kDtype = "f32le";
constexpr const char* kOrder = "row-major";

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

json parse_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace

VolumePaths volume_paths(const fs::path& path) {
  fs::path stem = path;
  if (stem.extension() == ".json" || stem.extension() == ".raw") stem.replace_extension();
  fs::path header = stem;
  header += ".json";
  fs::path payload = stem;
  payload += ".raw";
  return {header, payload};
}

ScalarVolume load_volume(const fs::path& path) {
  const auto [header_path, payload_path] = volume_paths(path);
  if (!fs::exists(header_path)) throw Error("missing volume header '" + header_path.string() + "'");
  if (!fs::exists(payload_path)) throw Error("missing volume payload '" + payload_path.string() + "'");

  const json header = parse_json(header_path);
  Shape shape;
  Spacing spacing{};
  try {
    if (header.at("dtype").get<std::string>() != kDtype) {
      throw Error("unsupported dtype in '" + header_path.string() + "' (expected f32le)");
    }
    if (header.contains("order") && header.at("order").get<std::string>() != kOrder) {
      throw Error("unsupported order in '" + header_path.string() + "' (expected row-major)");
    }
    const auto dims = header.at("shape").get<std::vector<std::int64_t>>();
    const auto sp = header.at("spacing").get<std::vector<double>>();
    if (dims.size() != 3 || sp.size() != 3) throw Error("malformed header '" + header_path.string() + "': need 3 dims");
    shape = {dims[0], dims[1], dims[2]};
    spacing = {sp[0], sp[1], sp[2]};
  } catch (const json::exception& e) {
    throw Error("malformed header '" + header_path.string() + "': " + e.what());
  }
  if (!shape.valid()) throw Error("malformed header '" + header_path.string() + "': non-positive shape");

  const auto bytes = fs::file_size(payload_path);
  const auto expected = static_cast<std::uintmax_t>(shape.voxels()) * sizeof(float);
  if (bytes != expected) {
    throw Error("payload length mismatch for '" + payload_path.string() + "': " + std::to_string(bytes) +
                " bytes, shape " + to_string(shape) + " needs " + std::to_string(expected));
  }

  std::vector<float> data(static_cast<std::size_t>(shape.voxels()));
  std::ifstream in(payload_path, std::ios::binary);
  if (!in || !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(expected))) {
    throw Error("cannot read payload '" + payload_path.string() + "'");
  }
  if constexpr (std::endian::native != std::endian::little) {
    for (float& v : data) v = std::bit_cast<float>(to_little_endian(std::bit_cast<std::uint32_t>(v)));
  }

  ScalarVolume volume(shape, spacing, std::move(data));
  volume.require_finite(payload_path.string());
  return volume;
}

void save_volume(const ScalarVolume& volume, const fs::path& path) {
  const auto [header_path, payload_path] = volume_paths(path);
  if (header_path.has_parent_path()) fs::create_directories(header_path.parent_path());

  json header;
  header["shape"] = {volume.shape().z, volume.shape().y, volume.shape().x};
  header["spacing"] = volume.spacing();
  header["dtype"] = kDtype;
  header["order"] = kOrder;
  write_text(header_path, header.dump(2) + "\n");

  std::ofstream out(payload_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + payload_path.string() + "'");
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(volume.data().data()),
              static_cast<std::streamsize>(volume.data().size_bytes()));
  } else {
    for (float v : volume.data()) {
      const std::uint32_t le = to_little_endian(std::bit_cast<std::uint32_t>(v));
      out.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
  }
  if (!out) throw Error("write failed for '" + payload_path.string() + "'");
}

BinaryMask load_mask(const fs::path& path) {
  try {
    return mask_from_volume(load_volume(path));
  } catch (const Error& e) {
    throw Error("'" + path.string() + "': " + e.what());
  }
}

void save_mask(const BinaryMask& mask, const fs::path& path) { save_volume(volume_from_mask(mask), path); }

std::vector<CaseManifest> read_manifest(const fs::path& path) {
  const json doc = parse_json(path);
  if (!doc.is_array()) throw Error("manifest '" + path.string() + "' must be a JSON array of case records");
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path rel(p);
    return rel.is_absolute() ? rel : base / rel;
  };

  std::vector<CaseManifest> cases;
  cases.reserve(doc.size());
  for (const auto& rec : doc) {
    CaseManifest c;
    try {
      c.case_id = rec.at("case_id").get<std::string>();
      for (const auto& m : rec.at("members")) c.member_paths.push_back(resolve(m.get<std::string>()));
      if (rec.contains("gt") && !rec.at("gt").is_null()) c.gt_path = resolve(rec.at("gt").get<std::string>());
      c.label = parse_provenance(rec.at("label").get<std::string>());
    } catch (const json::exception& e) {
      throw Error("malformed manifest record in '" + path.string() + "': " + e.what());
    }
    if (c.member_paths.empty()) throw Error("manifest case '" + c.case_id + "' lists no members");
    cases.push_back(std::move(c));
  }
  return cases;
}

void write_manifest(std::span<const CaseManifest> cases, const fs::path& path) {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  fs::create_directories(base);
  auto relative = [&](const fs::path& p) { return p.lexically_relative(base).generic_string(); };

  json doc = json::array();
  for (const auto& c : cases) {
    json rec;
    rec["case_id"] = c.case_id;
    rec["members"] = json::array();
    for (const auto& m : c.member_paths) rec["members"].push_back(relative(m));
    rec["gt"] = c.gt_path ? json(relative(*c.gt_path)) : json(nullptr);
    rec["label"] = std::string(to_string(c.label));
    doc.push_back(std::move(rec));
  }
  write_text(path, doc.dump(2) + "\n");
}

EnsembleCase load_case(const CaseManifest& manifest) {
  if (manifest.member_paths.empty()) throw Error("case '" + manifest.case_id + "': empty ensemble");
  std::vector<ScalarVolume> members;
  members.reserve(manifest.member_paths.size());
  for (const auto& p : manifest.member_paths) members.push_back(load_volume(p));

  std::optional<BinaryMask> gt;
  if (manifest.gt_path) {
    gt = load_mask(*manifest.gt_path);
  } else if (manifest.label == Provenance::OOD) {
    gt = BinaryMask(members.front().shape(), members.front().spacing());
  }
  return EnsembleCase(manifest.case_id, std::move(members), std::move(gt));
}

}  // namespace swu
