#include "fpt/text/tokenize.hpp"

#include <algorithm>
#include <cctype>

#include "fpt/error.hpp"

namespace fpt::text {
namespace {

bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c) != 0; }

bool is_terminal(std::string_view token) {
  return token == "." || token == "!" || token == "?";
}

bool has_word(const std::vector<std::string>& sentence) {
  return std::any_of(sentence.begin(), sentence.end(),
                     [](const std::string& t) { return is_word_token(t); });
}

}  // namespace

bool is_word_char(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

bool is_word_token(std::string_view token) {
  return !token.empty() && is_word_char(static_cast<unsigned char>(token.front()));
}

std::vector<std::string> TokenizedDoc::words() const {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (is_word_token(t)) out.push_back(t);
  }
  return out;
}

std::vector<std::vector<std::string>> TokenizedDoc::sentence_words() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    auto& w = out.emplace_back();
    for (const auto& t : s) {
      if (is_word_token(t)) w.push_back(t);
    }
  }
  return out;
}

double NamedValues::at(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw IndexError("no feature named '" + name + "'");
}

TokenizedDoc tokenize(std::string_view text) {
  std::vector<std::vector<std::string>> raw;
  std::vector<std::string> current;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      std::string word;
      while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) {
        const auto b = static_cast<unsigned char>(text[j]);
        word.push_back(b < 0x80 ? static_cast<char>(std::tolower(b)) : static_cast<char>(b));
        ++j;
      }
      current.push_back(std::move(word));
      i = j;
      continue;
    }
    current.emplace_back(1, static_cast<char>(c));
    ++i;
    if (is_terminal(current.back()) &&
        (i == text.size() || is_space(static_cast<unsigned char>(text[i])))) {
      raw.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) raw.push_back(std::move(current));

  TokenizedDoc doc;
  std::vector<std::string> carry;
  for (auto& s : raw) {
    if (!has_word(s)) {
      if (!doc.sentences.empty()) {
        doc.sentences.back().insert(doc.sentences.back().end(), s.begin(), s.end());
      } else {
        carry.insert(carry.end(), s.begin(), s.end());
      }
      continue;
    }
    if (!carry.empty()) {
      s.insert(s.begin(), carry.begin(), carry.end());
      carry.clear();
    }
    doc.sentences.push_back(std::move(s));
  }
  if (doc.sentences.empty()) throw EmptyDocumentError("text contains no word tokens");
  for (const auto& s : doc.sentences) doc.tokens.insert(doc.tokens.end(), s.begin(), s.end());
  return doc;
}

std::string join(const TokenizedDoc& doc) {
  std::string out;
  for (const auto& sentence : doc.sentences) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      // A terminal mark inside a sentence must stay glued to the next token,
      // otherwise it would start a new sentence on re-tokenization.
      const bool glued = i > 0 && is_terminal(sentence[i - 1]);
      if (!out.empty() && !glued) out.push_back(' ');
      out += sentence[i];
    }
  }
  return out;
}

}  // namespace fpt::text
