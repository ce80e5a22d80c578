#include "fpt/text/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "fpt/text/tokenize.hpp"

namespace fpt::text {
namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// UTF-8 code points.
std::size_t char_count(std::string_view word) {
  return static_cast<std::size_t>(std::count_if(word.begin(), word.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0u) != 0x80u;
  }));
}

}  // namespace

int count_syllables(std::string_view word) {
  std::string w;
  for (char c : word) {
    const auto b = static_cast<unsigned char>(c);
    if (b < 0x80 && std::isalpha(b)) w.push_back(static_cast<char>(std::tolower(b)));
  }
  int groups = 0;
  bool prev = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !prev) ++groups;
    prev = v;
  }
  const std::size_t n = w.size();
  if (groups > 1 && w.back() == 'e' && !is_vowel(w[n - 2])) {
    // "-le" after a consonant is voiced (table, simple).
    const bool consonant_le = n > 2 && w[n - 2] == 'l' && !is_vowel(w[n - 3]);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

NamedValues shallow_features(const TokenizedDoc& doc) {
  const auto per_sentence = doc.sentence_words();
  double words = 0;
  double syllables = 0;
  double chars = 0;
  double complex_words = 0;
  for (const auto& s : per_sentence) {
    for (const auto& w : s) {
      const int syl = count_syllables(w);
      words += 1;
      syllables += syl;
      chars += static_cast<double>(char_count(w));
      if (syl >= 3) complex_words += 1;
    }
  }
  const double sentences = static_cast<double>(doc.sentences.size());

  // Linsear Write: easy words (< 3 syllables) score 1, hard words 3, over the
  // first 100 words, divided by the sentences those words span.
  int budget = 100;
  double linsear_score = 0;
  double linsear_sentences = 0;
  for (const auto& s : per_sentence) {
    if (budget == 0) break;
    const int take = std::min<int>(budget, static_cast<int>(s.size()));
    if (take > 0) linsear_sentences += 1;
    for (int i = 0; i < take; ++i) linsear_score += count_syllables(s[i]) >= 3 ? 3 : 1;
    budget -= take;
  }
  const double linsear_ratio = linsear_score / linsear_sentences;
  const double linsear = linsear_ratio > 20 ? linsear_ratio / 2 : (linsear_ratio - 2) / 2;

  const double words_per_sentence = words / sentences;
  const double letters_per_100 = chars / words * 100;
  const double sentences_per_100 = sentences / words * 100;

  NamedValues out;
  out.push("tokens_x_sentences", words * sentences);
  out.push("sqrt_tokens_x_sentences", std::sqrt(words * sentences));
  out.push("log_tokens_over_log_sentences",
           sentences == 1 ? 0.0 : std::log(words) / std::log(sentences));
  out.push("tokens_per_sentence", words_per_sentence);
  out.push("syllables_per_sentence", syllables / sentences);
  out.push("syllables_per_token", syllables / words);
  out.push("chars_per_sentence", chars / sentences);
  out.push("chars_per_token", chars / words);
  out.push("smog_index", 1.0430 * std::sqrt(complex_words * 30 / sentences) + 3.1291);
  out.push("coleman_liau", 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8);
  out.push("gunning_fog", 0.4 * (words_per_sentence + 100 * complex_words / words));
  out.push("automated_readability_index", 4.71 * chars / words + 0.5 * words_per_sentence - 21.43);
  out.push("flesch_kincaid_grade", 0.39 * words_per_sentence + 11.8 * syllables / words - 15.59);
  out.push("linsear_write", linsear);
  return out;
}

double mtld_pass(const std::vector<std::string>& words, double threshold) {
  if (words.empty()) return 0.0;
  std::set<std::string_view> terms;
  double count = 0;
  double factors = 0;
  double ttr = 1.0;
  for (const auto& w : words) {
    count += 1;
    terms.insert(w);
    ttr = static_cast<double>(terms.size()) / count;
    if (ttr <= threshold) {
      count = 0;
      terms.clear();
      factors += 1;
    }
  }
  if (count > 0) factors += (1 - ttr) / (1 - threshold);
  if (factors == 0) {
    // TTR never left 1 and no partial factor accrued.
    const std::set<std::string_view> all(words.begin(), words.end());
    const double t = static_cast<double>(all.size()) / static_cast<double>(words.size());
    factors = t == 1 ? 1 : (1 - t) / (1 - threshold);
  }
  return static_cast<double>(words.size()) / factors;
}

double mtld(const std::vector<std::string>& words, double threshold) {
  std::vector<std::string> reversed(words.rbegin(), words.rend());
  return (mtld_pass(words, threshold) + mtld_pass(reversed, threshold)) / 2;
}

NamedValues lexical_diversity_features(const TokenizedDoc& doc) {
  const auto words = doc.words();
  const std::set<std::string> unique(words.begin(), words.end());
  const double tokens = static_cast<double>(words.size());
  const double types = static_cast<double>(unique.size());
  // Log-ratio features are undefined for single-token or all-distinct text.
  const bool degenerate = tokens <= 1 || types == tokens;

  NamedValues out;
  out.push("ttr", types / tokens);
  out.push("corrected_ttr", types / std::sqrt(2 * tokens));
  out.push("bilog_ttr", degenerate ? 0.0 : std::log(types) / std::log(tokens));
  out.push("uber_index",
           degenerate ? 0.0 : std::pow(std::log(types), 2) / std::log(tokens / types));
  out.push("mtld", mtld(words));
  return out;
}

NamedValues builtin_features(const TokenizedDoc& doc) {
  NamedValues out = shallow_features(doc);
  const NamedValues lex = lexical_diversity_features(doc);
  for (std::size_t i = 0; i < lex.size(); ++i) out.push(lex.names[i], lex.values[i]);
  return out;
}

const std::vector<std::string>& builtin_feature_names() {
  static const std::vector<std::string> names = [] {
    TokenizedDoc probe;
    probe.sentences = {{"probe", "text", "here", "."}};
    probe.tokens = probe.sentences.front();
    return builtin_features(probe).names;
  }();
  return names;
}

}  // namespace fpt::text
