#pragma once

#include <string>
#include <vector>

#include "fpt/feature_prompt/multi_head_mlp.hpp"
#include "fpt/numeric/ops.hpp"
#include "fpt/numeric/param_store.hpp"
#include "fpt/numeric/tape.hpp"

// Inter-class similarity calibration: class-pair cosine similarities over raw
// and embedded features, per-column ranking of the raw matrix, and a ListMLE
// loss that asks the embedded matrix to respect that ranking.
namespace fpt::calibration {

/// Feature rows grouped by class; every class needs at least one sample.
struct ClassFeatureSet {
  std::vector<std::vector<RowVectorD>> by_class;

  static ClassFeatureSet group(const std::vector<RowVectorD>& rows, const std::vector<int>& labels,
                               int n_classes);

  Index n_classes() const { return static_cast<Index>(by_class.size()); }
  std::vector<std::size_t> counts() const;
  Index width() const;

  /// All rows stacked class by class (N x width) with their class indices.
  TensorD stacked() const;
  std::vector<int> stacked_labels() const;
};

enum class Source { kRaw, kEmbedded };

struct SimilarityMatrix {
  TensorD values;
  Source source = Source::kRaw;

  Index size() const { return values.rows(); }
};

/// Column-wise descending orders: columns[i][r] is the row ranked r-th in
/// column i. Ties keep ascending row order.
struct RankingOrder {
  std::vector<std::vector<Index>> columns;
};

/// Mean cosine over all |Fm| x |Fn| cross pairs.
double class_pair_similarity(const std::vector<RowVectorD>& fm, const std::vector<RowVectorD>& fn);

/// n x n class similarities; the upper triangle is computed and mirrored.
SimilarityMatrix similarity_matrix(const ClassFeatureSet& sets, Source source = Source::kRaw);

RankingOrder ranking_order(const SimilarityMatrix& m);

/// Column i of the result is column i of `m` with rows listed in the order
/// pi_i, so row r holds the r-th ranked entry.
TensorD rearrange(const SimilarityMatrix& m, const RankingOrder& order);

/// Pooled embedded features of every sample (the F' sets), grouped like `raw`.
ClassFeatureSet embedded_features(const ClassFeatureSet& raw, const feature_prompt::MultiHeadMLP& mlp,
                                  const ParamStore& params);

/// Class-averaged cosine matrix of N x d rows on the tape:
///   A normalize(P) normalize(P)^T A^T, with A averaging rows by class.
template <typename S>
ad::Var<S> similarity_matrix(ad::Var<S> rows, const std::vector<int>& labels, Index n_classes) {
  const Index n = static_cast<Index>(labels.size());
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (int y : labels) counts[static_cast<std::size_t>(y)] += 1;
  Tensor<S> avg = Tensor<S>::Zero(n_classes, n);
  for (Index i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    avg(static_cast<Index>(y), i) = S(1) / S(counts[y]);
  }
  auto& tape = *rows.tape;
  const auto a = tape.constant(avg);
  const auto at = tape.constant(avg.transpose());
  const auto unit = ad::row_normalize(rows);
  const auto gram = ad::matmul(unit, ad::transpose(unit));
  return ad::matmul(ad::matmul(a, gram), at);
}

/// ListMLE of the embedded similarity matrix rearranged by the raw ranking.
/// The raw ranking is a constant: gradients reach only the MLP parameters.
/// This overload takes the ranking precomputed, e.g. from other feature values.
template <typename S>
ad::Var<S> calibration_loss(ad::Tape<S>& tape, const ClassFeatureSet& sets, const RankingOrder& order,
                            const feature_prompt::MultiHeadMLP& mlp, const ParamStore& params) {
  const auto inputs = tape.constant(sets.stacked().template cast<S>());
  const auto pooled = mlp.embed_pooled(tape, params, inputs);
  const auto embedded = similarity_matrix(pooled, sets.stacked_labels(), sets.n_classes());
  return ad::listmle(ad::permute_columns(embedded, order.columns));
}

template <typename S>
ad::Var<S> calibration_loss(ad::Tape<S>& tape, const ClassFeatureSet& sets,
                            const feature_prompt::MultiHeadMLP& mlp, const ParamStore& params) {
  return calibration_loss(tape, sets, ranking_order(similarity_matrix(sets, Source::kRaw)), mlp, params);
}

/// Convenience wrapper: value, and gradients when `grads` is non-null.
double calibration_loss(const ClassFeatureSet& sets, const feature_prompt::MultiHeadMLP& mlp,
                        const ParamStore& params, GradientMap* grads = nullptr);

/// Diagnostic dump: raw, embedded and (embedded - raw) grids as CSV.
struct SimilarityDump {
  SimilarityMatrix raw;
  SimilarityMatrix embedded;
  TensorD difference;

  std::string raw_csv() const;
  std::string embedded_csv() const;
  std::string difference_csv() const;
};

SimilarityDump similarity_dump(const ClassFeatureSet& sets, const feature_prompt::MultiHeadMLP& mlp,
                               const ParamStore& params);

std::string format_grid(const TensorD& grid);

}  // namespace fpt::calibration
