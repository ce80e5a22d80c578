#include "fpt/encoder/prompt_template.hpp"

#include <sstream>

#include "fpt/error.hpp"
#include "fpt/text/io.hpp"
#include "fpt/text/tokenize.hpp"

namespace fpt::encoder {

Template Template::parse(const std::string& text) {
  const std::string mask = kMaskToken;
  const auto first = text.find(mask);
  if (first == std::string::npos) throw ParseError("template '" + text + "' has no [MASK]");
  if (text.find(mask, first + mask.size()) != std::string::npos) {
    throw ParseError("template '" + text + "' has more than one [MASK]");
  }
  Template t;
  t.text = text;
  auto pieces = [](const std::string& s) {
    std::vector<std::string> out;
    if (s.find_first_not_of(" \t") == std::string::npos) return out;
    bool has_word = false;
    for (char c : s) has_word = has_word || text::is_word_char(static_cast<unsigned char>(c));
    if (!has_word) {
      // Punctuation-only fragment: keep each mark as its own token.
      for (char c : s) {
        if (c != ' ' && c != '\t') out.emplace_back(1, c);
      }
      return out;
    }
    return text::tokenize(s).tokens;
  };
  t.tokens = pieces(text.substr(0, first));
  t.mask_index = static_cast<Index>(t.tokens.size());
  t.tokens.push_back(mask);
  for (auto& tok : pieces(text.substr(first + mask.size()))) t.tokens.push_back(std::move(tok));
  return t;
}

std::vector<std::string> Template::tokens_without_mask() const {
  std::vector<std::string> out;
  for (Index i = 0; i < static_cast<Index>(tokens.size()); ++i) {
    if (i != mask_index) out.push_back(tokens[static_cast<std::size_t>(i)]);
  }
  return out;
}

TemplateIds TemplateIds::resolve(const Template& t, const Vocabulary& vocab) {
  TemplateIds ids;
  ids.with_mask = vocab.encode(t.tokens);
  ids.with_mask[static_cast<std::size_t>(t.mask_index)] = kMaskId;
  ids.without_mask = vocab.encode(t.tokens_without_mask());
  ids.mask_index = t.mask_index;
  return ids;
}

const std::vector<Template>& english_templates() {
  static const std::vector<Template> templates = {
      Template::parse("A [MASK] article to understand:"),
      Template::parse("A [MASK] text to understand:"),
      Template::parse("This is a [MASK] article to understand:"),
      Template::parse("A [MASK] article to read:"),
  };
  return templates;
}

std::vector<Template> load_templates(const std::filesystem::path& path) {
  std::istringstream ss(text::read_file(path));
  std::vector<Template> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(Template::parse(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw ParseError("template file '" + path.string() + "' has no templates");
  return out;
}

}  // namespace fpt::encoder
