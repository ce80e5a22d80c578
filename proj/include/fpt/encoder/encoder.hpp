#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpt/encoder/config.hpp"
#include "fpt/encoder/prompt_template.hpp"
#include "fpt/error.hpp"
#include "fpt/numeric/param_store.hpp"
#include "fpt/numeric/rng.hpp"
#include "fpt/numeric/tape.hpp"

// Toy masked-language-model encoder: token embeddings, sinusoidal positions,
// a pre-norm transformer stack with a final layer norm, and the linear heads
// that read the [MASK] row (soft verbalizer) or the [CLS] row (fine-tuning).
namespace fpt::encoder {

/// Registers embeddings, transformer blocks, final norm and both heads.
void init_params(const EncoderConfig& config, Rng& rng, ParamStore& params);

/// Registers "prompt.soft" (l x d_model), copying embedding rows of randomly
/// sampled non-special vocabulary entries.
void init_soft_prompt(const EncoderConfig& config, Rng& rng, ParamStore& params);

/// Standard sin/cos position table, seq x d.
TensorD positional_encoding(Index seq, Index d);

/// Names of the tensors of one transformer layer.
std::string layer_prefix(int layer);

template <typename S>
struct PromptInput {
  PromptMode mode = PromptMode::kFT;
  ad::Var<S> rows;
  std::optional<Index> mask_position;
  std::optional<Index> cls_position;
  /// Leading rows that are never truncated (prompt, template and [MASK]).
  Index prompt_rows = 0;
  /// Number of input-text rows kept after truncation.
  Index text_rows = 0;
};

/// Builds the input embedding sequence of one document for `mode`:
///   FT  : [CLS], e(x), [SEP]
///   HP  : e(T with [MASK] in place), e(x)
///   SP  : soft, e([MASK]), e(x)
///   HBP : soft, e(T), e([MASK]), e(x)
///   FPT : feature rows, e(T), e([MASK]), e(x)
/// Over-long inputs lose rows from the end of e(x) only.
template <typename S>
PromptInput<S> assemble(ad::Tape<S>& tape, const ParamStore& params, const EncoderConfig& config,
                        PromptMode mode, std::span<const int> doc_ids, const TemplateIds& tmpl,
                        std::optional<ad::Var<S>> soft, std::optional<ad::Var<S>> feature_vs) {
  using ad::Var;
  const Var<S> table = tape.parameter("emb.token", params.at("emb.token"));
  auto embed_ids = [&](std::span<const int> ids) { return ad::gather_rows(table, ids); };
  const int mask_id[] = {kMaskId};

  PromptInput<S> in;
  in.mode = mode;
  std::vector<Var<S>> parts;
  Index prefix = 0;
  switch (mode) {
    case PromptMode::kFT: {
      const int cls[] = {kClsId};
      parts.push_back(embed_ids(cls));
      prefix = 1;
      in.cls_position = 0;
      break;
    }
    case PromptMode::kHP:
      parts.push_back(embed_ids(tmpl.with_mask));
      prefix = static_cast<Index>(tmpl.with_mask.size());
      in.mask_position = tmpl.mask_index;
      break;
    case PromptMode::kSP:
    case PromptMode::kHBP:
    case PromptMode::kFPT: {
      const bool fpt = mode == PromptMode::kFPT;
      const auto& lead = fpt ? feature_vs : soft;
      if (!lead) {
        throw ModeError(mode_name(mode) + " mode requires " +
                        (fpt ? std::string("feature prompt rows") : std::string("soft prompt rows")));
      }
      if (lead->cols() != config.d_model) {
        throw DimensionError("prompt rows have width " + std::to_string(lead->cols()) +
                             ", expected d_model " + std::to_string(config.d_model));
      }
      if (lead->rows() > 0) parts.push_back(*lead);
      prefix = lead->rows();
      if (mode != PromptMode::kSP && !tmpl.without_mask.empty()) {
        parts.push_back(embed_ids(tmpl.without_mask));
        prefix += static_cast<Index>(tmpl.without_mask.size());
      }
      parts.push_back(embed_ids(mask_id));
      in.mask_position = prefix;
      prefix += 1;
      break;
    }
  }
  const Index suffix = mode == PromptMode::kFT ? 1 : 0;
  const Index room = static_cast<Index>(config.max_seq_len) - prefix - suffix;
  if (room < 0) {
    throw ConfigError("max_seq_len " + std::to_string(config.max_seq_len) +
                      " cannot hold the " + std::to_string(prefix + suffix) + " prompt rows");
  }
  const Index keep = std::min<Index>(room, static_cast<Index>(doc_ids.size()));
  if (keep > 0) parts.push_back(embed_ids(doc_ids.first(static_cast<std::size_t>(keep))));
  if (mode == PromptMode::kFT) {
    const int sep[] = {kSepId};
    parts.push_back(embed_ids(sep));
  }
  in.rows = ad::concat_rows(std::span<const Var<S>>(parts));
  in.prompt_rows = prefix;
  in.text_rows = keep;
  return in;
}

namespace detail {

template <typename S>
ad::Var<S> dropout(ad::Var<S> x, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0) return x;
  Tensor<S> mask(x.rows(), x.cols());
  const S keep_scale = S(1) / S(1 - rate);
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < rate ? S(0) : keep_scale;
  return ad::mul(x, x.tape->constant(std::move(mask)));
}

template <typename S>
ad::Var<S> linear(ad::Tape<S>& tape, const ParamStore& params, const std::string& name,
                  ad::Var<S> x) {
  const auto w = tape.parameter(name + ".weight", params.at(name + ".weight"));
  const auto b = tape.parameter(name + ".bias", params.at(name + ".bias"));
  return ad::add_row(ad::matmul(x, w), b);
}

template <typename S>
ad::Var<S> norm(ad::Tape<S>& tape, const ParamStore& params, const std::string& name,
                ad::Var<S> x) {
  return ad::layer_norm(x, tape.parameter(name + ".gain", params.at(name + ".gain")),
                        tape.parameter(name + ".bias", params.at(name + ".bias")));
}

template <typename S>
ad::Var<S> self_attention(ad::Tape<S>& tape, const ParamStore& params, const EncoderConfig& config,
                          const std::string& prefix, ad::Var<S> x) {
  using std::sqrt;
  const auto q = linear(tape, params, prefix + "attn.q", x);
  const auto k = linear(tape, params, prefix + "attn.k", x);
  const auto v = linear(tape, params, prefix + "attn.v", x);
  const Index dh = config.d_model / config.n_heads;
  const S scale = S(1) / sqrt(S(dh));
  std::vector<ad::Var<S>> heads;
  heads.reserve(static_cast<std::size_t>(config.n_heads));
  for (int h = 0; h < config.n_heads; ++h) {
    const auto qh = ad::slice_cols(q, h * dh, dh);
    const auto kh = ad::slice_cols(k, h * dh, dh);
    const auto vh = ad::slice_cols(v, h * dh, dh);
    const auto scores = ad::scale(ad::matmul(qh, ad::transpose(kh)), scale);
    heads.push_back(ad::matmul(ad::softmax_rows(scores), vh));
  }
  return linear(tape, params, prefix + "attn.out", ad::concat_cols(std::span<const ad::Var<S>>(heads)));
}

}  // namespace detail

/// Runs the transformer stack on rows that already carry positions.
template <typename S>
ad::Var<S> encode_rows(ad::Tape<S>& tape, const ParamStore& params, const EncoderConfig& config,
                       ad::Var<S> x, Rng* dropout_rng = nullptr) {
  for (int layer = 0; layer < config.n_layers; ++layer) {
    const std::string p = layer_prefix(layer);
    auto attn = detail::self_attention(tape, params, config, p,
                                       detail::norm(tape, params, p + "ln1", x));
    x = ad::add(x, detail::dropout(attn, config.dropout_rate, dropout_rng));
    auto hidden = ad::gelu(detail::linear(tape, params, p + "ffn.in",
                                          detail::norm(tape, params, p + "ln2", x)));
    auto ffn = detail::linear(tape, params, p + "ffn.out", hidden);
    x = ad::add(x, detail::dropout(ffn, config.dropout_rate, dropout_rng));
  }
  return detail::norm(tape, params, "enc.ln_f", x);
}

/// Hidden vectors for every input row (positions added here).
template <typename S>
ad::Var<S> encode(ad::Tape<S>& tape, const ParamStore& params, const EncoderConfig& config,
                  const PromptInput<S>& input, Rng* dropout_rng = nullptr) {
  const Index seq = input.rows.rows();
  if (seq > config.max_seq_len) {
    throw DimensionError("sequence of " + std::to_string(seq) + " rows exceeds max_seq_len " +
                         std::to_string(config.max_seq_len));
  }
  const auto pe = tape.constant(positional_encoding(seq, config.d_model).template cast<S>());
  return encode_rows(tape, params, config, ad::add(input.rows, pe), dropout_rng);
}

/// Class logits (1 x n_classes): the [MASK] row through the verbalizer for
/// prompt modes, the [CLS] row through the fine-tuning head for FT.
template <typename S>
ad::Var<S> classify(ad::Tape<S>& tape, const ParamStore& params, const EncoderConfig& config,
                    const PromptInput<S>& input, Rng* dropout_rng = nullptr) {
  const auto hidden = encode(tape, params, config, input, dropout_rng);
  const bool prompt = is_prompt_mode(input.mode);
  const auto position = prompt ? input.mask_position : input.cls_position;
  if (!position) throw ModeError("prompt input has no readout position");
  const auto row = ad::slice_rows(hidden, *position, 1);
  const std::string head = prompt ? "verbalizer" : "fc";
  const auto w = tape.parameter(head + ".weight", params.at(head + ".weight"));
  const auto b = tape.parameter(head + ".bias", params.at(head + ".bias"));
  return ad::add_row(ad::matmul(row, ad::transpose(w)), b);
}

}  // namespace fpt::encoder
