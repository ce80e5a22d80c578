#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpt/text/document.hpp"

namespace fpt::text {

/// JSON-lines dataset: one object per line with string "id", string "text"
/// and integer "label". Blank lines are skipped.
std::vector<Document> read_dataset(const std::filesystem::path& path);
std::vector<Document> parse_dataset(const std::string& contents);
void write_dataset(const std::filesystem::path& path, const std::vector<Document>& docs);

/// Comma-separated feature table: header "id,<name>,...", one row per id.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> ids;
  std::vector<RowVectorD> rows;
};

FeatureTable parse_feature_table(const std::string& contents);
FeatureTable read_feature_table(const std::filesystem::path& path);
std::string format_feature_table(const FeatureTable& table);
void write_feature_table(const std::filesystem::path& path, const FeatureTable& table);

/// Rows of `table` aligned to `docs` by id.
std::vector<FeatureVector> align_features(const FeatureTable& table,
                                          const std::vector<Document>& docs);

/// Reads a feature file and aligns it to `docs`; an id missing from the file
/// is an error naming that id.
std::vector<FeatureVector> load_external_features(const std::filesystem::path& path,
                                                  const std::vector<Document>& docs);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace fpt::text
