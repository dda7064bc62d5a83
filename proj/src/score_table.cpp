#include "swu/score_table.hpp"

#include <array>
#include <algorithm>
#include <fstream>
#include <map>

#include "text_format.hpp"

namespace swu {

namespace {

constexpr std::array<const char*, 8> kFixedColumns{"case_id", "provenance", "source", "structure_label",
                                                   "volume_voxels", "match", "gt_label", "dice"};

void check_cell_text(const std::string& text) {
  if (text.find_first_of(",\"\n\r") != std::string::npos) {
    throw Error("value '" + text + "' cannot be stored in the score table (contains a comma, quote or newline)");
  }
}

}  // namespace

std::optional<std::size_t> ScoreTable::method_index(const std::string& name) const {
  const auto it = std::find(methods.begin(), methods.end(), name);
  if (it == methods.end()) return std::nullopt;
  return static_cast<std::size_t>(it - methods.begin());
}

std::string source_name(const Source& source) {
  return source.is_ensemble() ? "mean" : "m" + std::to_string(source.member);
}

void append_case(ScoreTable& table, std::span<const ScoredStructure> scored, std::span<const Structure> ground_truth,
                 Provenance provenance, double min_iou) {
  for (std::size_t begin = 0; begin < scored.size();) {
    std::size_t end = begin;
    while (end < scored.size() && scored[end].source == scored[begin].source) ++end;

    std::vector<Structure> predicted;
    predicted.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) predicted.push_back(scored[k].structure);
    const MatchResult match = match_structures(predicted, ground_truth, min_iou);

    for (std::size_t k = begin; k < end; ++k) {
      const ScoredStructure& s = scored[k];
      const PredictionMatch& m = match.predictions[k - begin];
      ScoreRow row;
      row.case_id = s.case_id;
      row.provenance = provenance;
      row.source = source_name(s.source);
      row.structure_label = s.structure.label;
      row.volume_voxels = s.structure.volume_voxels();
      row.tp = m.tp();
      row.gt_label = m.gt_label;
      row.dice = m.tp() ? m.dice : 0.0;
      row.scores.assign(table.methods.size(), std::nullopt);
      for (const auto& [name, value] : s.scores) {
        const auto idx = table.method_index(name);
        if (!idx) throw Error("score table has no column for method '" + name + "'");
        row.scores[*idx] = value;
      }
      table.rows.push_back(std::move(row));
    }
    begin = end;
  }
}

void write_score_csv(const ScoreTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");

  for (std::size_t c = 0; c < kFixedColumns.size(); ++c) out << (c ? "," : "") << kFixedColumns[c];
  for (const auto& m : table.methods) {
    check_cell_text(m);
    out << ',' << m;
  }
  out << '\n';

  for (const auto& r : table.rows) {
    check_cell_text(r.case_id);
    out << r.case_id << ',' << to_string(r.provenance) << ',' << r.source << ',' << r.structure_label << ','
        << r.volume_voxels << ',' << (r.tp ? "TP" : "FP") << ',' << r.gt_label << ',' << detail::format_double(r.dice);
    for (const auto& s : r.scores) {
      out << ',';
      if (s) out << detail::format_double(*s);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

ScoreTable read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open score table '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error("score table '" + path.string() + "' is empty (no header)");
  const auto header = detail::split_csv_line(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) column[std::string(header[c])] = c;
  for (const char* name : kFixedColumns) {
    if (!column.count(name)) throw Error("score table '" + path.string() + "' is missing column '" + name + "'");
  }

  ScoreTable table;
  std::vector<std::size_t> method_columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(header[c]);
    if (std::find_if(kFixedColumns.begin(), kFixedColumns.end(), [&](const char* f) { return name == f; }) !=
        kFixedColumns.end()) {
      continue;
    }
    table.methods.push_back(name);
    method_columns.push_back(c);
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error("score table line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                  " cells, found " + std::to_string(cells.size()));
    }
    auto cell = [&](const char* name) { return cells[column.at(name)]; };
    try {
      ScoreRow r;
      r.case_id = std::string(cell("case_id"));
      r.provenance = parse_provenance(cell("provenance"));
      r.source = std::string(cell("source"));
      r.structure_label = std::stoi(std::string(cell("structure_label")));
      r.volume_voxels = std::stoll(std::string(cell("volume_voxels")));
      const auto match = cell("match");
      if (match != "TP" && match != "FP") throw Error("match must be TP or FP");
      r.tp = match == "TP";
      r.gt_label = std::stoi(std::string(cell("gt_label")));
      r.dice = detail::parse_double(cell("dice"));
      for (std::size_t c : method_columns) {
        r.scores.push_back(cells[c].empty() ? std::nullopt : std::optional<double>(detail::parse_double(cells[c])));
      }
      table.rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error("score table line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace swu
