#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fpt/text/document.hpp"

namespace fpt::harness {

/// Labelled documents; every class in [0, n_classes) occurs at least once.
struct Dataset {
  std::vector<text::Document> documents;
  int n_classes = 0;
  std::string name;

  /// n_classes <= 0 infers max label + 1.
  static Dataset from_documents(std::vector<text::Document> docs, std::string name,
                                int n_classes = 0);
  static Dataset load(const std::filesystem::path& path, int n_classes = 0);

  /// Throws DataError on out-of-range labels, absent classes or duplicate ids.
  void validate() const;
  std::size_t size() const { return documents.size(); }
};

struct FewShotSplit {
  int k = 0;
  std::uint64_t sample_seed = 0;
  std::vector<text::Document> train;  // k per class, grouped by class
  std::vector<text::Document> dev;    // k per class, disjoint from train
  std::vector<text::Document> test;
};

/// Per class, a seeded shuffle of that class's documents gives k train then k
/// dev documents. The test set is every remaining document in dataset order,
/// or `held_out` when it is non-empty.
FewShotSplit sample_few_shot(const Dataset& dataset, int k, std::uint64_t seed,
                             const std::vector<text::Document>& held_out = {});

}  // namespace fpt::harness
