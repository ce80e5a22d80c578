#include "fpt/encoder/encoder.hpp"

#include <cmath>

namespace fpt::encoder {
namespace {

TensorD uniform(Rng& rng, Index rows, Index cols, double bound) {
  TensorD t(rows, cols);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-bound, bound);
  return t;
}

void add_linear(ParamStore& params, Rng& rng, const std::string& name, Index in, Index out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  params.add(name + ".weight", uniform(rng, in, out, bound));
  params.add(name + ".bias", TensorD::Zero(1, out));
}

void add_norm(ParamStore& params, const std::string& name, Index d) {
  params.add(name + ".gain", TensorD::Ones(1, d));
  params.add(name + ".bias", TensorD::Zero(1, d));
}

}  // namespace

std::string layer_prefix(int layer) { return "enc." + std::to_string(layer) + "."; }

void init_params(const EncoderConfig& config, Rng& rng, ParamStore& params) {
  config.validate();
  if (config.vocab_size <= kMaskId) throw ConfigError("vocab_size must cover the special tokens");
  const Index d = config.d_model;

  TensorD emb(config.vocab_size, d);
  for (Index i = 0; i < emb.size(); ++i) emb.data()[i] = rng.normal();
  emb.row(kPadId).setZero();
  params.add("emb.token", std::move(emb));

  for (int layer = 0; layer < config.n_layers; ++layer) {
    const std::string p = layer_prefix(layer);
    add_norm(params, p + "ln1", d);
    for (const char* proj : {"attn.q", "attn.k", "attn.v", "attn.out"}) {
      add_linear(params, rng, p + proj, d, d);
    }
    add_norm(params, p + "ln2", d);
    add_linear(params, rng, p + "ffn.in", d, config.d_ff);
    add_linear(params, rng, p + "ffn.out", config.d_ff, d);
  }
  add_norm(params, "enc.ln_f", d);

  // Heads store weights as [n_classes x d_model].
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  params.add("verbalizer.weight", uniform(rng, config.n_classes, d, bound));
  params.add("verbalizer.bias", TensorD::Zero(1, config.n_classes));
  params.add("fc.weight", uniform(rng, config.n_classes, d, bound));
  params.add("fc.bias", TensorD::Zero(1, config.n_classes));
}

void init_soft_prompt(const EncoderConfig& config, Rng& rng, ParamStore& params) {
  const TensorD& emb = params.at("emb.token");
  const Index l = config.l_soft_tokens;
  TensorD soft(l, config.d_model);
  const auto candidates = static_cast<std::uint64_t>(emb.rows() - (kMaskId + 1));
  for (Index r = 0; r < l; ++r) {
    const Index id = candidates == 0 ? kUnkId
                                     : static_cast<Index>(kMaskId + 1 + rng.below(candidates));
    soft.row(r) = emb.row(id);
  }
  params.add("prompt.soft", std::move(soft));
}

TensorD positional_encoding(Index seq, Index d) {
  TensorD pe(seq, d);
  for (Index pos = 0; pos < seq; ++pos) {
    for (Index i = 0; i < d; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
      pe(pos, i) = (i % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
  }
  return pe;
}

}  // namespace fpt::encoder
