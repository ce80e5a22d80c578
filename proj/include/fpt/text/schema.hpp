#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpt/text/document.hpp"

namespace fpt::text {

enum class FeatureSource { kBuiltin, kExternal };

/// Feature order plus z-normalization statistics fitted on a training set.
struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<FeatureSource> sources;
  RowVectorD mean;
  RowVectorD stddev;

  Index size() const { return static_cast<Index>(names.size()); }
  bool fitted() const { return mean.size() == size() && size() > 0; }

  /// Schema with the builtin features followed by `external_names`, unfitted.
  static FeatureSchema with_builtin(const std::vector<std::string>& external_names = {});
  /// Schema of external features only, unfitted.
  static FeatureSchema external_only(const std::vector<std::string>& external_names);

  /// Fits per-feature mean and population standard deviation. Features that
  /// are constant on `rows` get stddev 1 so they normalize to 0.
  void fit(const std::vector<RowVectorD>& rows);

  RowVectorD normalize(const RowVectorD& raw) const;

  nlohmann::json to_json() const;
  static FeatureSchema from_json(const nlohmann::json& j);
};

/// Builtin features of `doc` (if the schema has any) followed by the external
/// row, un-normalized.
RowVectorD raw_features(const Document& doc, const FeatureSchema& schema,
                        const std::optional<RowVectorD>& external = std::nullopt);

/// Raw features z-normalized with the schema statistics.
FeatureVector extract(const Document& doc, const FeatureSchema& schema,
                      const std::optional<RowVectorD>& external = std::nullopt);

}  // namespace fpt::text
