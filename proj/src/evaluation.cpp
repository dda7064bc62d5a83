#include "swu/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "text_format.hpp"

namespace swu {

using json = nlohmann::json;

namespace {

constexpr const char* kReportFormat = "swu-eval/1";

bool in_split(Provenance p, Split s) {
  switch (s) {
    case Split::ID: return p == Provenance::ID;
    case Split::OOD: return p == Provenance::OOD;
    case Split::Combined: return true;
  }
  return false;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::ID: return "id";
    case Split::OOD: return "ood";
    case Split::Combined: return "combined";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "id") return Split::ID;
  if (text == "ood") return Split::OOD;
  if (text == "combined") return Split::Combined;
  throw Error("unknown split '" + std::string(text) + "' (expected id, ood or combined)");
}

const MethodReport& EvalReport::method(std::string_view name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw Error("report has no method '" + std::string(name) + "'");
}

EvalReport evaluate(const ScoreTable& table, std::span<const CaseSummary> cases, Split split, std::string dataset) {
  std::map<std::string, const CaseSummary*> by_id;
  EvalReport report;
  report.dataset = std::move(dataset);
  report.split = split;
  for (const auto& c : cases) {
    if (!by_id.emplace(c.case_id, &c).second) throw Error("duplicate case id '" + c.case_id + "'");
    if (!in_split(c.provenance, split)) continue;
    ++report.n_cases;
    report.total_gt += c.gt_structures;
  }
  if (report.n_cases == 0) throw Error("no cases in split '" + std::string(to_string(split)) + "'");

  std::vector<const ScoreRow*> rows;
  std::map<std::pair<std::string, int>, std::int64_t> gt_keys;
  for (const auto& r : table.rows) {
    const auto it = by_id.find(r.case_id);
    if (it == by_id.end()) throw Error("score table row for case '" + r.case_id + "' which is not in the manifest");
    if (!in_split(it->second->provenance, split)) continue;
    if (r.tp && r.gt_label <= 0) throw Error("TP row without a GT label in case '" + r.case_id + "'");
    if (r.tp) gt_keys.emplace(std::pair{r.case_id, r.gt_label}, static_cast<std::int64_t>(gt_keys.size()));
    rows.push_back(&r);
  }

  for (std::size_t col = 0; col < table.methods.size(); ++col) {
    MethodReport m;
    m.method = table.methods[col];
    try {
      m.orientation = ScoringMethod::parse(m.method).spec.orientation();
    } catch (const Error& e) {
      throw Error("orientation metadata absent for column '" + m.method + "': " + e.what());
    }

    std::vector<Detection> detections;
    std::vector<double> scores_tp, dice_tp, scores_all, dice_all;
    for (const ScoreRow* r : rows) {
      const auto& score = r->scores.at(col);
      if (!score) continue;
      Detection d;
      d.score = *score;
      d.tp = r->tp;
      d.gt_key = r->tp ? gt_keys.at({r->case_id, r->gt_label}) : -1;
      detections.push_back(d);
      scores_all.push_back(*score);
      dice_all.push_back(r->tp ? r->dice : 0.0);
      if (r->tp) {
        scores_tp.push_back(*score);
        dice_tp.push_back(r->dice);
      }
    }
    m.n_structures = static_cast<std::int64_t>(detections.size());
    m.n_tp = static_cast<std::int64_t>(scores_tp.size());
    if (!detections.empty()) {
      FrocCurve curve = froc_curve(detections, m.orientation, report.total_gt, report.n_cases);
      curve.method = m.method;
      curve.dataset = report.dataset;
      const FpReduction fr = fp_reduction(curve);
      m.fp_reduction = fr.value;
      m.f100 = fr.f100;
      m.f95 = fr.f95;
      m.r_max = curve.r_max();
      m.curve = std::move(curve);
    }
    m.spearman_tp = spearman_abs(dice_tp, scores_tp);
    m.spearman_all = spearman_abs(dice_all, scores_all);
    report.methods.push_back(std::move(m));
  }

  std::optional<double> lowest, highest;
  for (const auto& m : report.methods) {
    if (!m.curve) continue;
    for (const auto& p : m.curve->points) {
      if (!p.precision) continue;
      lowest = lowest ? std::min(*lowest, *p.precision) : *p.precision;
      highest = highest ? std::max(*highest, *p.precision) : *p.precision;
    }
  }
  if (lowest) report.band = PrecisionBand{*lowest, 0.5 * (*lowest + *highest)};
  for (auto& m : report.methods) {
    if (m.curve) m.average_recall = average_recall(*m.curve, *report.band);
  }
  return report;
}

std::string method_file_stem(std::string_view method) {
  std::string out;
  for (char c : method) {
    if (c == ':') out += '_';
    else if (c == '@') out += "_m";
    else if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') out += c;
    else out += '_';
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  json doc;
  doc["format"] = kReportFormat;
  doc["dataset"] = report.dataset;
  doc["split"] = std::string(to_string(report.split));
  doc["n_cases"] = report.n_cases;
  doc["n_gt"] = report.total_gt;
  doc["precision_band"] = report.band ? json::array({report.band->lo, report.band->hi}) : json(nullptr);
  json methods = json::array();
  for (const auto& m : report.methods) {
    json j;
    j["method"] = m.method;
    j["orientation"] = std::string(to_string(m.orientation));
    j["n_structures"] = m.n_structures;
    j["n_tp"] = m.n_tp;
    j["fp_reduction"] = optional_json(m.fp_reduction);
    j["f100"] = m.f100;
    j["f95"] = m.f95;
    j["r_max"] = m.r_max;
    j["average_recall"] = optional_json(m.average_recall);
    j["spearman_tp"] = optional_json(m.spearman_tp);
    j["spearman_all"] = optional_json(m.spearman_all);
    j["froc_csv"] = m.curve ? json("froc/" + method_file_stem(m.method) + ".csv") : json(nullptr);
    methods.push_back(std::move(j));
  }
  doc["methods"] = std::move(methods);
  return doc.dump(2) + "\n";
}

void write_froc_csv(const FrocCurve& curve, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "threshold,recall,avg_fp,precision\n";
  for (const auto& p : curve.points) {
    out << detail::format_double(p.threshold) << ',' << detail::format_double(p.recall) << ','
        << detail::format_double(p.avg_fp) << ',' << (p.precision ? detail::format_double(*p.precision) : "") << '\n';
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_eval_outputs(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "eval.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + (dir / "eval.json").string() + "'");
    out << report_json(report);
  }
  for (const auto& m : report.methods) {
    if (m.curve) write_froc_csv(*m.curve, dir / "froc" / (method_file_stem(m.method) + ".csv"));
  }
}

ReportSummary read_report_summary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open report '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();

  ReportSummary out;
  try {
    const json doc = json::parse(buf.str());
    if (doc.value("format", std::string()) != kReportFormat) {
      throw Error("'" + path.string() + "' is not an evaluation report (format must be " + kReportFormat + ")");
    }
    out.dataset = doc.at("dataset").get<std::string>();
    out.split = doc.at("split").get<std::string>();
    for (const auto& m : doc.at("methods")) {
      ReportSummary::Row row;
      row.method = m.at("method").get<std::string>();
      for (const char* key : {"fp_reduction", "average_recall", "spearman_tp", "spearman_all"}) {
        if (!m.contains(key)) throw Error("report '" + path.string() + "' method entry lacks '" + key + "'");
      }
      row.fp_reduction = optional_from(m, "fp_reduction");
      row.average_recall = optional_from(m, "average_recall");
      row.spearman_tp = optional_from(m, "spearman_tp");
      row.spearman_all = optional_from(m, "spearman_all");
      out.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error("schema mismatch in report '" + path.string() + "': " + e.what());
  }
  return out;
}

}  // namespace swu
