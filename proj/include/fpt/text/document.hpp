#pragma once

#include <string>
#include <vector>

#include "fpt/numeric/tensor.hpp"

namespace fpt::text {

struct Document {
  std::string id;
  std::string raw_text;
  int label = 0;
};

/// Tokens grouped by sentence. Punctuation tokens are kept (the encoder sees
/// them) but do not count as words.
struct TokenizedDoc {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> tokens;
  std::vector<int> token_ids;

  std::vector<std::string> words() const;
  std::vector<std::vector<std::string>> sentence_words() const;
};

/// Linguistic feature vector of one document.
struct FeatureVector {
  RowVectorD values;
  std::vector<std::string> feature_names;

  Index size() const { return values.size(); }
};

/// Ordered (name, value) pairs.
struct NamedValues {
  std::vector<std::string> names;
  std::vector<double> values;

  void push(std::string name, double value) {
    names.push_back(std::move(name));
    values.push_back(value);
  }
  double at(const std::string& name) const;
  std::size_t size() const { return names.size(); }
};

}  // namespace fpt::text
