#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fpt/numeric/param_store.hpp"

namespace fpt::trainer {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// Per-tensor first/second moment estimates plus the shared step count.
struct AdamWState {
  struct Moments {
    TensorD m;
    TensorD v;
  };
  std::map<std::string, Moments> moments;
  std::int64_t step = 0;
};

/// One AdamW update with decoupled weight decay,
///   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p),
/// applied to every tensor present in `grads`; other tensors are untouched.
/// A non-finite gradient aborts with a TrainingError naming the tensor.
void adamw_step(ParamStore& params, const GradientMap& grads, AdamWState& state, double lr,
                const AdamWOptions& options = {});

/// Linear warmup over ceil(warmup_ratio * total_steps) steps, then constant.
/// `step` is 1-based.
double warmup_lr(std::int64_t step, std::int64_t total_steps, double warmup_ratio, double peak_lr);

}  // namespace fpt::trainer
