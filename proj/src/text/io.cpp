#include "fpt/text/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fpt/error.hpp"

namespace fpt::text {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t line_no) {
  const std::string t = trim(cell);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" + t + "'");
  }
  return value;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << contents;
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<Document> parse_dataset(const std::string& contents) {
  std::vector<Document> docs;
  std::istringstream ss(contents);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("text") ||
        !j["text"].is_string() || !j.contains("label") || !j["label"].is_number_integer()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected string 'id', string 'text' and integer 'label'");
    }
    Document d{j["id"].get<std::string>(), j["text"].get<std::string>(), j["label"].get<int>()};
    if (trim(d.raw_text).empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": document '" + d.id + "' is empty");
    }
    if (d.label < 0) {
      throw ParseError("line " + std::to_string(line_no) + ": negative label");
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

void write_dataset(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::string out;
  for (const auto& d : docs) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["text"] = d.raw_text;
    j["label"] = d.label;
    out += j.dump() + "\n";
  }
  write_file(path, out);
}

FeatureTable parse_feature_table(const std::string& contents) {
  FeatureTable table;
  std::istringstream ss(contents);
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(ss, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (header) {
      if (cells.empty() || trim(cells[0]) != "id") {
        throw ParseError("line " + std::to_string(line_no) + ": first header must be 'id'");
      }
      if (cells.size() < 2) {
        throw ParseError("line " + std::to_string(line_no) + ": no feature columns");
      }
      for (std::size_t i = 1; i < cells.size(); ++i) table.feature_names.push_back(trim(cells[i]));
      header = false;
      continue;
    }
    if (cells.size() != table.feature_names.size() + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.feature_names.size() + 1) + " cells, got " +
                       std::to_string(cells.size()));
    }
    RowVectorD row(static_cast<Index>(table.feature_names.size()));
    for (std::size_t i = 1; i < cells.size(); ++i) {
      row(static_cast<Index>(i - 1)) = parse_number(cells[i], line_no);
    }
    for (const auto& seen : table.ids) {
      if (seen == trim(cells[0])) {
        throw ParseError("line " + std::to_string(line_no) + ": duplicate id '" + seen + "'");
      }
    }
    table.ids.push_back(trim(cells[0]));
    table.rows.push_back(std::move(row));
  }
  if (header) throw ParseError("feature file has no header");
  return table;
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  return parse_feature_table(read_file(path));
}

std::string format_feature_table(const FeatureTable& table) {
  std::string out = "id";
  for (const auto& n : table.feature_names) out += "," + n;
  out += "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += table.ids[r];
    for (Index c = 0; c < table.rows[r].size(); ++c) out += "," + format_double(table.rows[r](c));
    out += "\n";
  }
  return out;
}

void write_feature_table(const std::filesystem::path& path, const FeatureTable& table) {
  write_file(path, format_feature_table(table));
}

std::vector<FeatureVector> align_features(const FeatureTable& table,
                                          const std::vector<Document>& docs) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < table.ids.size(); ++i) by_id.emplace(table.ids[i], i);
  std::vector<FeatureVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    auto it = by_id.find(d.id);
    if (it == by_id.end()) throw DataError("feature file has no row for document id '" + d.id + "'");
    out.push_back(FeatureVector{table.rows[it->second], table.feature_names});
  }
  return out;
}

std::vector<FeatureVector> load_external_features(const std::filesystem::path& path,
                                                  const std::vector<Document>& docs) {
  return align_features(read_feature_table(path), docs);
}

}  // namespace fpt::text
