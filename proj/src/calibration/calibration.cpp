#include "fpt/calibration/calibration.hpp"

#include <algorithm>
#include <numeric>

#include "fpt/error.hpp"
#include "fpt/text/io.hpp"

namespace fpt::calibration {

ClassFeatureSet ClassFeatureSet::group(const std::vector<RowVectorD>& rows,
                                       const std::vector<int>& labels, int n_classes) {
  if (rows.size() != labels.size()) {
    throw DimensionError("ClassFeatureSet: " + std::to_string(rows.size()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
  }
  ClassFeatureSet sets;
  sets.by_class.resize(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw IndexError("label " + std::to_string(labels[i]) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    }
    sets.by_class[static_cast<std::size_t>(labels[i])].push_back(rows[i]);
  }
  for (int c = 0; c < n_classes; ++c) {
    if (sets.by_class[static_cast<std::size_t>(c)].empty()) {
      throw DataError("class " + std::to_string(c) + " has no samples");
    }
  }
  return sets;
}

std::vector<std::size_t> ClassFeatureSet::counts() const {
  std::vector<std::size_t> out;
  for (const auto& c : by_class) out.push_back(c.size());
  return out;
}

Index ClassFeatureSet::width() const {
  for (const auto& c : by_class) {
    if (!c.empty()) return c.front().size();
  }
  return 0;
}

TensorD ClassFeatureSet::stacked() const {
  Index n = 0;
  for (const auto& c : by_class) n += static_cast<Index>(c.size());
  TensorD out(n, width());
  Index r = 0;
  for (const auto& c : by_class) {
    for (const auto& row : c) out.row(r++) = row;
  }
  return out;
}

std::vector<int> ClassFeatureSet::stacked_labels() const {
  std::vector<int> out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    out.insert(out.end(), by_class[c].size(), static_cast<int>(c));
  }
  return out;
}

double class_pair_similarity(const std::vector<RowVectorD>& fm, const std::vector<RowVectorD>& fn) {
  if (fm.empty() || fn.empty()) throw DataError("class_pair_similarity: empty class");
  double total = 0;
  for (const auto& u : fm) {
    for (const auto& v : fn) {
      if (u.size() != v.size()) {
        throw DimensionError("class_pair_similarity: widths " + std::to_string(u.size()) +
                             " and " + std::to_string(v.size()));
      }
      total += cosine(u, v);
    }
  }
  return total / static_cast<double>(fm.size() * fn.size());
}

SimilarityMatrix similarity_matrix(const ClassFeatureSet& sets, Source source) {
  const Index n = sets.n_classes();
  if (n < 2) throw DataError("similarity matrix needs at least two classes");
  SimilarityMatrix m{TensorD(n, n), source};
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double s = class_pair_similarity(sets.by_class[static_cast<std::size_t>(i)],
                                             sets.by_class[static_cast<std::size_t>(j)]);
      m.values(i, j) = s;
      m.values(j, i) = s;
    }
  }
  return m;
}

RankingOrder ranking_order(const SimilarityMatrix& m) {
  const Index n = m.size();
  RankingOrder order;
  order.columns.resize(static_cast<std::size_t>(m.values.cols()));
  for (Index k = 0; k < m.values.cols(); ++k) {
    auto& col = order.columns[static_cast<std::size_t>(k)];
    col.resize(static_cast<std::size_t>(n));
    std::iota(col.begin(), col.end(), Index{0});
    std::stable_sort(col.begin(), col.end(),
                     [&](Index a, Index b) { return m.values(a, k) > m.values(b, k); });
  }
  return order;
}

TensorD rearrange(const SimilarityMatrix& m, const RankingOrder& order) {
  if (static_cast<Index>(order.columns.size()) != m.values.cols()) {
    throw DimensionError("rearrange: ranking has " + std::to_string(order.columns.size()) +
                         " columns, matrix is " + shape_string(m.values));
  }
  TensorD out(m.values.rows(), m.values.cols());
  for (Index k = 0; k < m.values.cols(); ++k) {
    const auto& col = order.columns[static_cast<std::size_t>(k)];
    if (static_cast<Index>(col.size()) != m.values.rows()) {
      throw DimensionError("rearrange: order length does not match " + shape_string(m.values));
    }
    for (Index r = 0; r < m.values.rows(); ++r) out(r, k) = m.values(col[static_cast<std::size_t>(r)], k);
  }
  return out;
}

ClassFeatureSet embedded_features(const ClassFeatureSet& raw, const feature_prompt::MultiHeadMLP& mlp,
                                  const ParamStore& params) {
  ad::Tape<double> tape;
  const auto pooled = mlp.embed_pooled(tape, params, tape.constant(raw.stacked()));
  ClassFeatureSet out;
  out.by_class.resize(raw.by_class.size());
  Index r = 0;
  for (std::size_t c = 0; c < raw.by_class.size(); ++c) {
    for (std::size_t i = 0; i < raw.by_class[c].size(); ++i) out.by_class[c].push_back(pooled.value().row(r++));
  }
  return out;
}

double calibration_loss(const ClassFeatureSet& sets, const feature_prompt::MultiHeadMLP& mlp,
                        const ParamStore& params, GradientMap* grads) {
  ad::Tape<double> tape;
  const auto loss = calibration_loss(tape, sets, mlp, params);
  if (grads != nullptr) {
    tape.backward(loss);
    *grads = tape.gradients();
  }
  return loss.scalar();
}

std::string format_grid(const TensorD& grid) {
  std::string out;
  for (Index r = 0; r < grid.rows(); ++r) {
    for (Index c = 0; c < grid.cols(); ++c) {
      if (c > 0) out += ",";
      out += text::format_double(grid(r, c));
    }
    out += "\n";
  }
  return out;
}

std::string SimilarityDump::raw_csv() const { return format_grid(raw.values); }
std::string SimilarityDump::embedded_csv() const { return format_grid(embedded.values); }
std::string SimilarityDump::difference_csv() const { return format_grid(difference); }

SimilarityDump similarity_dump(const ClassFeatureSet& sets, const feature_prompt::MultiHeadMLP& mlp,
                               const ParamStore& params) {
  SimilarityDump dump;
  dump.raw = similarity_matrix(sets, Source::kRaw);
  dump.embedded = similarity_matrix(embedded_features(sets, mlp, params), Source::kEmbedded);
  dump.difference = dump.embedded.values - dump.raw.values;
  return dump;
}

}  // namespace fpt::calibration
