#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpt/encoder/encoder.hpp"
#include "fpt/feature_prompt/multi_head_mlp.hpp"

namespace fpt::trainer {

/// One document ready for the model: vocabulary ids, normalized features and
/// its class.
struct Example {
  std::string id;
  std::vector<int> token_ids;
  RowVectorD features;
  /// Features before normalization; only read for a raw calibration ranking.
  RowVectorD raw_features;
  int label = 0;
};

/// Everything needed to rebuild the forward pass of a trained model.
struct ModelSpec {
  encoder::EncoderConfig encoder;
  encoder::PromptMode mode = encoder::PromptMode::kFPT;
  encoder::TemplateIds tmpl;
  feature_prompt::MultiHeadMLP mlp;

  /// Encoder (both heads), plus "prompt.soft" for SP/HBP and "mlp.*" for FPT.
  ParamStore init_params(std::uint64_t seed) const;

  bool uses_soft_prompt() const {
    return mode == encoder::PromptMode::kSP || mode == encoder::PromptMode::kHBP;
  }
  bool uses_features() const { return mode == encoder::PromptMode::kFPT; }
};

template <typename S>
encoder::PromptInput<S> build_input(ad::Tape<S>& tape, const ParamStore& params,
                                    const ModelSpec& spec, const Example& ex) {
  std::optional<ad::Var<S>> soft;
  std::optional<ad::Var<S>> feature_rows;
  if (spec.uses_soft_prompt()) soft = tape.parameter("prompt.soft", params.at("prompt.soft"));
  if (spec.uses_features()) {
    const auto f = tape.constant(ex.features.template cast<S>());
    feature_rows = spec.mlp.embed(tape, params, f);
  }
  return encoder::assemble(tape, params, spec.encoder, spec.mode, ex.token_ids, spec.tmpl, soft,
                           feature_rows);
}

template <typename S>
ad::Var<S> logits(ad::Tape<S>& tape, const ParamStore& params, const ModelSpec& spec,
                  const Example& ex, Rng* dropout_rng = nullptr) {
  return encoder::classify(tape, params, spec.encoder, build_input(tape, params, spec, ex),
                           dropout_rng);
}

/// Mean cross-entropy over a non-empty batch.
template <typename S>
ad::Var<S> classification_loss(ad::Tape<S>& tape, const ParamStore& params, const ModelSpec& spec,
                               std::span<const Example* const> batch, Rng* dropout_rng = nullptr) {
  if (batch.empty()) throw DataError("classification_loss: empty batch");
  std::vector<ad::Var<S>> losses;
  losses.reserve(batch.size());
  for (const Example* ex : batch) {
    losses.push_back(ad::cross_entropy(logits(tape, params, spec, *ex, dropout_rng), ex->label));
  }
  return ad::mean(std::span<const ad::Var<S>>(losses));
}

RowVectorD predict_logits(const ParamStore& params, const ModelSpec& spec, const Example& ex);
int predict(const ParamStore& params, const ModelSpec& spec, const Example& ex);
std::vector<int> predict_all(const ParamStore& params, const ModelSpec& spec,
                             const std::vector<Example>& examples);

}  // namespace fpt::trainer
