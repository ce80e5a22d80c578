#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "fpt/calibration/calibration.hpp"
#include "fpt/numeric/rng.hpp"

namespace fpt::testing {

/// Exhaustive ListMLE check on one random n x n matrix with distinct column
/// entries: the per-column descending arrangement must beat every other
/// combination of per-column permutations. Returns false on any violation.
inline bool listmle_sorted_is_strict_minimum(Rng& rng, Index n) {
  TensorD m(n, n);
  for (Index c = 0; c < n; ++c) {
    for (;;) {
      for (Index r = 0; r < n; ++r) m(r, c) = rng.uniform(-1.0, 1.0);
      std::vector<double> col(static_cast<std::size_t>(n));
      for (Index r = 0; r < n; ++r) col[static_cast<std::size_t>(r)] = m(r, c);
      std::sort(col.begin(), col.end());
      if (std::adjacent_find(col.begin(), col.end()) == col.end()) break;
    }
  }
  const auto sm = calibration::SimilarityMatrix{m, calibration::Source::kEmbedded};
  const auto order = calibration::ranking_order(sm);
  const double best = listmle_loss(calibration::rearrange(sm, order));

  std::vector<std::vector<Index>> perms;
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));

  const std::size_t per = perms.size();
  std::size_t combos = 1;
  for (Index c = 0; c < n; ++c) combos *= per;
  TensorD arranged(n, n);
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t rest = code;
    bool same = true;
    for (Index c = 0; c < n; ++c) {
      const auto& perm = perms[rest % per];
      rest /= per;
      for (Index r = 0; r < n; ++r) {
        arranged(r, c) = m(perm[static_cast<std::size_t>(r)], c);
      }
      same = same && perm == order.columns[static_cast<std::size_t>(c)];
    }
    if (same) continue;
    if (!(listmle_loss(arranged) > best)) return false;
  }
  return true;
}

}  // namespace fpt::testing
