#include "fpt/harness/dataset.hpp"

#include <algorithm>
#include <set>

#include "fpt/error.hpp"
#include "fpt/numeric/rng.hpp"
#include "fpt/text/io.hpp"

namespace fpt::harness {

Dataset Dataset::from_documents(std::vector<text::Document> docs, std::string name, int n_classes) {
  Dataset d;
  if (n_classes <= 0) {
    int top = -1;
    for (const auto& doc : docs) top = std::max(top, doc.label);
    n_classes = top + 1;
  }
  d.documents = std::move(docs);
  d.n_classes = n_classes;
  d.name = std::move(name);
  d.validate();
  return d;
}

Dataset Dataset::load(const std::filesystem::path& path, int n_classes) {
  return from_documents(text::read_dataset(path), path.stem().string(), n_classes);
}

void Dataset::validate() const {
  if (documents.empty()) throw DataError("dataset '" + name + "' is empty");
  if (n_classes < 1) throw DataError("dataset '" + name + "' has no classes");
  std::vector<int> seen(static_cast<std::size_t>(n_classes), 0);
  std::set<std::string> ids;
  for (const auto& doc : documents) {
    if (doc.label < 0 || doc.label >= n_classes) {
      throw DataError("document '" + doc.id + "' has label " + std::to_string(doc.label) +
                      " outside [0, " + std::to_string(n_classes) + ")");
    }
    if (!ids.insert(doc.id).second) throw DataError("duplicate document id '" + doc.id + "'");
    seen[static_cast<std::size_t>(doc.label)] += 1;
  }
  for (int c = 0; c < n_classes; ++c) {
    if (seen[static_cast<std::size_t>(c)] == 0) {
      throw DataError("class " + std::to_string(c) + " has no documents");
    }
  }
}

FewShotSplit sample_few_shot(const Dataset& dataset, int k, std::uint64_t seed,
                             const std::vector<text::Document>& held_out) {
  if (k < 1) throw ConfigError("k must be at least 1, got " + std::to_string(k));
  FewShotSplit split;
  split.k = k;
  split.sample_seed = seed;
  std::vector<bool> taken(dataset.documents.size(), false);
  const auto need = static_cast<std::size_t>(2 * k);
  for (int c = 0; c < dataset.n_classes; ++c) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < dataset.documents.size(); ++i) {
      if (dataset.documents[i].label == c) pool.push_back(i);
    }
    if (pool.size() < need) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                      " documents, needs " + std::to_string(need) + " (short by " +
                      std::to_string(need - pool.size()) + ")");
    }
    Rng rng = Rng::stream(seed, "few_shot.class." + std::to_string(c));
    rng.shuffle(std::span<std::size_t>(pool));
    for (std::size_t j = 0; j < need; ++j) {
      taken[pool[j]] = true;
      auto& dst = j < static_cast<std::size_t>(k) ? split.train : split.dev;
      dst.push_back(dataset.documents[pool[j]]);
    }
  }
  if (!held_out.empty()) {
    split.test = held_out;
  } else {
    for (std::size_t i = 0; i < dataset.documents.size(); ++i) {
      if (!taken[i]) split.test.push_back(dataset.documents[i]);
    }
  }
  return split;
}

}  // namespace fpt::harness
