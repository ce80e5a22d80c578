#include "fpt/text/schema.hpp"

#include <algorithm>
#include <cmath>

#include "fpt/error.hpp"
#include "fpt/text/features.hpp"
#include "fpt/text/tokenize.hpp"

namespace fpt::text {
namespace {

Index builtin_count(const FeatureSchema& schema) {
  return static_cast<Index>(
      std::count(schema.sources.begin(), schema.sources.end(), FeatureSource::kBuiltin));
}

}  // namespace

FeatureSchema FeatureSchema::with_builtin(const std::vector<std::string>& external_names) {
  FeatureSchema s;
  for (const auto& n : builtin_feature_names()) {
    s.names.push_back(n);
    s.sources.push_back(FeatureSource::kBuiltin);
  }
  for (const auto& n : external_names) {
    if (std::find(s.names.begin(), s.names.end(), n) != s.names.end()) {
      throw ConfigError("duplicate feature name '" + n + "'");
    }
    s.names.push_back(n);
    s.sources.push_back(FeatureSource::kExternal);
  }
  return s;
}

FeatureSchema FeatureSchema::external_only(const std::vector<std::string>& external_names) {
  FeatureSchema s;
  for (const auto& n : external_names) {
    if (std::find(s.names.begin(), s.names.end(), n) != s.names.end()) {
      throw ConfigError("duplicate feature name '" + n + "'");
    }
    s.names.push_back(n);
    s.sources.push_back(FeatureSource::kExternal);
  }
  if (s.names.empty()) throw ConfigError("feature schema needs at least one feature");
  return s;
}

void FeatureSchema::fit(const std::vector<RowVectorD>& rows) {
  if (rows.empty()) throw DataError("cannot fit feature schema on zero documents");
  const Index a = size();
  mean = RowVectorD::Zero(a);
  for (const auto& r : rows) {
    if (r.size() != a) {
      throw DimensionError("feature row has " + std::to_string(r.size()) + " values, schema has " +
                           std::to_string(a));
    }
    mean += r;
  }
  mean /= static_cast<double>(rows.size());
  stddev = RowVectorD::Zero(a);
  for (const auto& r : rows) stddev += (r - mean).array().square().matrix();
  stddev = (stddev / static_cast<double>(rows.size())).array().sqrt().matrix();
  for (Index i = 0; i < a; ++i) {
    if (!(stddev(i) > 1e-12 * std::max(1.0, std::abs(mean(i))))) stddev(i) = 1.0;
  }
}

RowVectorD FeatureSchema::normalize(const RowVectorD& raw) const {
  if (!fitted()) throw ConfigError("feature schema used before fitting");
  if (raw.size() != size()) {
    throw DimensionError("feature row has " + std::to_string(raw.size()) + " values, schema has " +
                         std::to_string(size()));
  }
  return ((raw - mean).array() / stddev.array()).matrix();
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json j;
  j["names"] = names;
  std::vector<std::string> src;
  for (auto s : sources) src.push_back(s == FeatureSource::kBuiltin ? "builtin" : "external");
  j["sources"] = src;
  j["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  j["stddev"] = std::vector<double>(stddev.data(), stddev.data() + stddev.size());
  return j;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
  FeatureSchema s;
  s.names = j.at("names").get<std::vector<std::string>>();
  for (const auto& src : j.at("sources").get<std::vector<std::string>>()) {
    s.sources.push_back(src == "builtin" ? FeatureSource::kBuiltin : FeatureSource::kExternal);
  }
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("stddev").get<std::vector<double>>();
  if (m.size() != s.names.size() || sd.size() != s.names.size() ||
      s.sources.size() != s.names.size()) {
    throw ParseError("feature schema: inconsistent lengths");
  }
  s.mean = Eigen::Map<const RowVectorD>(m.data(), static_cast<Index>(m.size()));
  s.stddev = Eigen::Map<const RowVectorD>(sd.data(), static_cast<Index>(sd.size()));
  return s;
}

RowVectorD raw_features(const Document& doc, const FeatureSchema& schema,
                        const std::optional<RowVectorD>& external) {
  const Index n_builtin = builtin_count(schema);
  const Index n_external = schema.size() - n_builtin;
  RowVectorD out(schema.size());
  if (n_builtin > 0) {
    const NamedValues builtin = builtin_features(tokenize(doc.raw_text));
    if (static_cast<Index>(builtin.size()) != n_builtin) {
      throw DimensionError("schema expects " + std::to_string(n_builtin) + " builtin features");
    }
    for (Index i = 0; i < n_builtin; ++i) out(i) = builtin.values[static_cast<std::size_t>(i)];
  }
  if (n_external > 0) {
    if (!external) {
      throw DataError("document '" + doc.id + "' has no external feature row");
    }
    if (external->size() != n_external) {
      throw DimensionError("document '" + doc.id + "': external row has " +
                           std::to_string(external->size()) + " values, schema expects " +
                           std::to_string(n_external));
    }
    out.tail(n_external) = *external;
  }
  return out;
}

FeatureVector extract(const Document& doc, const FeatureSchema& schema,
                      const std::optional<RowVectorD>& external) {
  return FeatureVector{schema.normalize(raw_features(doc, schema, external)), schema.names};
}

}  // namespace fpt::text
