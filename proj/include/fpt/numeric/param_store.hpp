#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fpt/numeric/tensor.hpp"

namespace fpt {

using GradientMap = std::map<std::string, TensorD>;

/// Named trainable tensors, iterated in name order.
class ParamStore {
 public:
  using Map = std::map<std::string, TensorD>;

  /// Registers a new tensor; a name may only be registered once.
  void add(const std::string& name, TensorD value);

  /// Replaces the value of an existing tensor, keeping its shape.
  void set(const std::string& name, TensorD value);

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const TensorD& at(const std::string& name) const;
  TensorD& at(const std::string& name);

  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count() const;

  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  /// FNV-1a over names, shapes and raw bytes; used to assert that a tensor set
  /// was left untouched.
  std::uint64_t hash(const std::string& prefix = "") const;

  bool operator==(const ParamStore& other) const;

 private:
  Map tensors_;
};

}  // namespace fpt
