#pragma once

#include <string>
#include <vector>

#include "fpt/error.hpp"
#include "fpt/numeric/param_store.hpp"
#include "fpt/numeric/rng.hpp"
#include "fpt/numeric/tape.hpp"

namespace fpt::feature_prompt {

/// Maps an alpha-dimensional feature vector to l prompt rows of width d_model:
/// a shared tanh trunk (alpha -> d_hidden) feeding l independent tanh heads
/// (d_hidden -> d_model). Parameters live under "mlp.trunk.*" and
/// "mlp.head.{i}.*".
struct MultiHeadMLP {
  int alpha = 0;
  int d_hidden = 64;
  int d_model = 64;
  int heads = 4;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  void init_params(Rng& rng, ParamStore& params) const;

  static std::string trunk_name() { return "mlp.trunk"; }
  static std::string head_name(int i) { return "mlp.head." + std::to_string(i); }

  /// Prompt rows (l x d_model) for one 1 x alpha feature row.
  template <typename S>
  ad::Var<S> embed(ad::Tape<S>& tape, const ParamStore& params, ad::Var<S> features) const {
    if (features.rows() != 1 || features.cols() != alpha) {
      throw DimensionError("MultiHeadMLP expects a 1x" + std::to_string(alpha) +
                           " feature row, got " + shape_string(features.value()));
    }
    const auto trunk = ad::tanh(affine(tape, params, trunk_name(), features));
    std::vector<ad::Var<S>> rows;
    rows.reserve(static_cast<std::size_t>(heads));
    for (int i = 0; i < heads; ++i) rows.push_back(ad::tanh(affine(tape, params, head_name(i), trunk)));
    if (rows.empty()) return tape.constant(Tensor<S>(0, d_model));
    return ad::concat_rows(std::span<const ad::Var<S>>(rows));
  }

  /// Embeds every row of an N x alpha batch and average-pools each document's
  /// l rows, giving N x d_model.
  template <typename S>
  ad::Var<S> embed_pooled(ad::Tape<S>& tape, const ParamStore& params, ad::Var<S> batch) const {
    if (batch.cols() != alpha) {
      throw DimensionError("MultiHeadMLP expects " + std::to_string(alpha) + " features, got " +
                           shape_string(batch.value()));
    }
    if (heads < 1) throw DimensionError("average pooling needs at least one head");
    const auto trunk = ad::tanh(affine(tape, params, trunk_name(), batch));
    ad::Var<S> acc = ad::tanh(affine(tape, params, head_name(0), trunk));
    for (int i = 1; i < heads; ++i) acc = ad::add(acc, ad::tanh(affine(tape, params, head_name(i), trunk)));
    return ad::scale(acc, S(1) / S(heads));
  }

 private:
  template <typename S>
  static ad::Var<S> affine(ad::Tape<S>& tape, const ParamStore& params, const std::string& name,
                           ad::Var<S> x) {
    const auto w = tape.parameter(name + ".weight", params.at(name + ".weight"));
    const auto b = tape.parameter(name + ".bias", params.at(name + ".bias"));
    return ad::add_row(ad::matmul(x, w), b);
  }
};

/// Coordinate-wise mean of prompt rows (the pooled embedded feature).
template <typename S>
ad::Var<S> pool(ad::Var<S> rows) {
  return ad::mean_rows(rows);
}

}  // namespace fpt::feature_prompt
