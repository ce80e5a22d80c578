#include "fpt/encoder/vocab.hpp"

#include "fpt/error.hpp"

namespace fpt::encoder {

Vocabulary::Vocabulary() {
  for (const char* t : {"[PAD]", "[UNK]", "[CLS]", "[SEP]", kMaskToken}) add(t);
}

int Vocabulary::add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lookup(t));
  return out;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  const auto tokens = j.get<std::vector<std::string>>();
  Vocabulary v;
  if (tokens.size() < 5) throw ParseError("vocabulary lacks special tokens");
  for (std::size_t i = 0; i < 5; ++i) {
    if (tokens[i] != v.token(static_cast<int>(i))) throw ParseError("vocabulary specials out of order");
  }
  for (std::size_t i = 5; i < tokens.size(); ++i) {
    if (v.add(tokens[i]) != static_cast<int>(i)) {
      throw ParseError("vocabulary has duplicate token '" + tokens[i] + "'");
    }
  }
  return v;
}

}  // namespace fpt::encoder
