#include "fpt/numeric/param_store.hpp"

#include <cstring>

#include "fpt/error.hpp"

namespace fpt {

void ParamStore::add(const std::string& name, TensorD value) {
  if (name.empty()) throw ConfigError("parameter name must be non-empty");
  if (!all_finite(value)) throw EvaluationError("parameter '" + name + "' has non-finite entries");
  auto [it, inserted] = tensors_.emplace(name, std::move(value));
  if (!inserted) throw ConfigError("parameter '" + name + "' registered twice");
}

void ParamStore::set(const std::string& name, TensorD value) {
  TensorD& slot = at(name);
  if (slot.rows() != value.rows() || slot.cols() != value.cols()) {
    throw DimensionError("parameter '" + name + "' has shape " + shape_string(slot) +
                         ", cannot assign " + shape_string(value));
  }
  slot = std::move(value);
}

const TensorD& ParamStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw IndexError("unknown parameter '" + name + "'");
  return it->second;
}

TensorD& ParamStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw IndexError("unknown parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tensors_) {
    if (name.compare(0, prefix.size(), prefix) == 0) out.push_back(name);
  }
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += static_cast<std::size_t>(t.size());
  return n;
}

std::uint64_t ParamStore::hash(const std::string& prefix) const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, t] : tensors_) {
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    feed(name.data(), name.size());
    const Index shape[2] = {t.rows(), t.cols()};
    feed(shape, sizeof(shape));
    feed(t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
  }
  return h;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  auto a = tensors_.begin();
  auto b = other.tensors_.begin();
  for (; a != tensors_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    if (a->second.rows() != b->second.rows() || a->second.cols() != b->second.cols()) return false;
    if (std::memcmp(a->second.data(), b->second.data(),
                    static_cast<std::size_t>(a->second.size()) * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace fpt
