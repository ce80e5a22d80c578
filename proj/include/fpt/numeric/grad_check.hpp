#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fpt/error.hpp"
#include "fpt/numeric/param_store.hpp"
#include "fpt/numeric/rng.hpp"

namespace fpt {

struct GradCheckOptions {
  double step = 1e-5;
  /// Coordinates sampled per tensor; tensors at or below this size are checked
  /// exhaustively.
  std::size_t coords_per_tensor = 12;
  std::uint64_t seed = 0;
  /// Only tensors whose names start with one of these prefixes are checked
  /// (all tensors when empty).
  std::vector<std::string> prefixes;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Index worst_coord = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// Compares analytic gradients against central differences
///   |analytic - (f(x+h) - f(x-h)) / 2h| / max(|analytic|, |central|, 1e-8)
/// over a sampled coordinate set.
///
/// `objective(params, grads)` returns the scalar value and, when `grads` is
/// non-null, fills it with the analytic gradient. The value may be returned in
/// a wider floating type than double; the difference quotient is then formed
/// in that type, which keeps round-off well below the tolerance even for
/// coordinates with small gradients.
template <typename Objective>
GradCheckResult grad_check(Objective&& objective, const ParamStore& params,
                           const GradCheckOptions& options = {}) {
  using Value = decltype(objective(params, static_cast<GradientMap*>(nullptr)));

  GradientMap analytic;
  const Value base = objective(params, &analytic);
  if (!std::isfinite(static_cast<double>(base))) {
    throw EvaluationError("grad_check: objective is not finite at the base point");
  }

  auto selected = [&](const std::string& name) {
    if (options.prefixes.empty()) return true;
    return std::any_of(options.prefixes.begin(), options.prefixes.end(),
                       [&](const std::string& p) { return name.compare(0, p.size(), p) == 0; });
  };

  Rng rng(options.seed);
  GradCheckResult result;
  ParamStore probe = params;
  for (const auto& [name, tensor] : params) {
    if (!selected(name)) continue;
    const Index n = tensor.size();
    std::vector<Index> coords;
    if (static_cast<std::size_t>(n) <= options.coords_per_tensor) {
      for (Index i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (std::size_t c = 0; c < options.coords_per_tensor; ++c) {
        coords.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
      }
    }
    const auto g_it = analytic.find(name);
    for (Index c : coords) {
      const double analytic_value = g_it == analytic.end() ? 0.0 : g_it->second.data()[c];
      TensorD& slot = probe.at(name);
      const double original = slot.data()[c];
      slot.data()[c] = original + options.step;
      const Value plus = objective(probe, nullptr);
      slot.data()[c] = original - options.step;
      const Value minus = objective(probe, nullptr);
      slot.data()[c] = original;
      if (!std::isfinite(static_cast<double>(plus)) || !std::isfinite(static_cast<double>(minus))) {
        throw EvaluationError("grad_check: objective not finite when perturbing '" + name + "'");
      }
      const double central =
          static_cast<double>((plus - minus) / (Value(2) * static_cast<Value>(options.step)));
      const double denom = std::max({std::abs(analytic_value), std::abs(central), 1e-8});
      const double rel = std::abs(analytic_value - central) / denom;
      ++result.coords_checked;
      if (rel > result.max_rel_error || result.worst_coord < 0) {
        if (rel >= result.max_rel_error) {
          result.max_rel_error = rel;
          result.worst_tensor = name;
          result.worst_coord = c;
          result.worst_analytic = analytic_value;
          result.worst_numeric = central;
        }
      }
    }
  }
  return result;
}

}  // namespace fpt
