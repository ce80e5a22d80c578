#include "fpt/feature_prompt/multi_head_mlp.hpp"

#include <cmath>

namespace fpt::feature_prompt {
namespace {

void add_affine(ParamStore& params, Rng& rng, const std::string& name, Index in, Index out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  TensorD w(in, out);
  TensorD b(1, out);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-bound, bound);
  params.add(name + ".weight", std::move(w));
  params.add(name + ".bias", std::move(b));
}

}  // namespace

void MultiHeadMLP::init_params(Rng& rng, ParamStore& params) const {
  if (alpha < 1 || d_hidden < 1 || d_model < 1 || heads < 0) {
    throw DimensionError("MultiHeadMLP sizes must be positive");
  }
  add_affine(params, rng, trunk_name(), alpha, d_hidden);
  for (int i = 0; i < heads; ++i) add_affine(params, rng, head_name(i), d_hidden, d_model);
}

}  // namespace fpt::feature_prompt
