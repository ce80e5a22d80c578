#include "fpt/trainer/adamw.hpp"

#include <cmath>

#include "fpt/error.hpp"

namespace fpt::trainer {

void adamw_step(ParamStore& params, const GradientMap& grads, AdamWState& state, double lr,
                const AdamWOptions& options) {
  for (const auto& [name, g] : grads) {
    if (!all_finite(g)) throw TrainingError("non-finite gradient for tensor '" + name + "'");
    const TensorD& p = params.at(name);
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      throw DimensionError("gradient for '" + name + "' has shape " + shape_string(g) +
                           ", parameter is " + shape_string(p));
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (const auto& [name, g] : grads) {
    TensorD& p = params.at(name);
    auto [it, fresh] = state.moments.try_emplace(name);
    auto& mom = it->second;
    if (fresh) {
      mom.m = TensorD::Zero(p.rows(), p.cols());
      mom.v = TensorD::Zero(p.rows(), p.cols());
    }
    mom.m = options.beta1 * mom.m + (1.0 - options.beta1) * g;
    mom.v = options.beta2 * mom.v + (1.0 - options.beta2) * g.cwiseProduct(g);
    p *= 1.0 - lr * options.weight_decay;
    p.array() -= lr * (mom.m.array() / bc1) / ((mom.v.array() / bc2).sqrt() + options.epsilon);
  }
}

double warmup_lr(std::int64_t step, std::int64_t total_steps, double warmup_ratio, double peak_lr) {
  const auto warmup = static_cast<std::int64_t>(
      std::ceil(warmup_ratio * static_cast<double>(total_steps) - 1e-9));
  if (warmup <= 0 || step >= warmup) return peak_lr;
  return peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
}

}  // namespace fpt::trainer
