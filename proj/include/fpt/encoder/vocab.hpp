#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace fpt::encoder {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;

inline constexpr const char* kMaskToken = "[MASK]";

/// Token vocabulary: five special tokens followed by corpus tokens in order of
/// first appearance (min-count 1).
class Vocabulary {
 public:
  Vocabulary();

  /// Adds a token if unseen; returns its id.
  int add(const std::string& token);
  int lookup(const std::string& token) const;
  std::vector<int> encode(const std::vector<std::string>& tokens) const;

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }

  nlohmann::json to_json() const { return tokens_; }
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

}  // namespace fpt::encoder
