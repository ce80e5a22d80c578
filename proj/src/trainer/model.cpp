#include "fpt/trainer/model.hpp"

namespace fpt::trainer {

ParamStore ModelSpec::init_params(std::uint64_t seed) const {
  ParamStore params;
  Rng enc_rng = Rng::stream(seed, "init.encoder");
  encoder::init_params(encoder, enc_rng, params);
  if (uses_soft_prompt()) {
    Rng soft_rng = Rng::stream(seed, "init.soft_prompt");
    encoder::init_soft_prompt(encoder, soft_rng, params);
  }
  if (uses_features()) {
    Rng mlp_rng = Rng::stream(seed, "init.mlp");
    mlp.init_params(mlp_rng, params);
  }
  return params;
}

RowVectorD predict_logits(const ParamStore& params, const ModelSpec& spec, const Example& ex) {
  ad::Tape<double> tape;
  return logits(tape, params, spec, ex).value().row(0);
}

int predict(const ParamStore& params, const ModelSpec& spec, const Example& ex) {
  const RowVectorD z = predict_logits(params, spec, ex);
  Index best = 0;
  z.maxCoeff(&best);
  return static_cast<int>(best);
}

std::vector<int> predict_all(const ParamStore& params, const ModelSpec& spec,
                             const std::vector<Example>& examples) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(predict(params, spec, ex));
  return out;
}

}  // namespace fpt::trainer
