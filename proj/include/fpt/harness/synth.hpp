#pragma once

#include <cstdint>
#include <vector>

#include "fpt/harness/dataset.hpp"

namespace fpt::harness {

struct SynthData {
  Dataset dataset;
  /// Builtin (un-normalized) features of each document, aligned with
  /// dataset.documents.
  std::vector<text::FeatureVector> features;
};

/// Ordinal toy corpus. Each document gets a difficulty level t: class c sits
/// at c / (n_classes - 1) and `noise` jitters t uniformly by up to
/// noise / (n_classes - 1), so noise 1 reaches the neighbouring class centres.
/// Sentence length and the share of long rare words both grow with t.
SynthData synth_dataset(int n_classes, int per_class, double noise, std::uint64_t seed);

}  // namespace fpt::harness
