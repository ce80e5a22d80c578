#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpt/encoder/vocab.hpp"
#include "fpt/numeric/tensor.hpp"

namespace fpt::encoder {

/// A hard template with exactly one "[MASK]" placeholder. The input text is
/// appended after the template.
struct Template {
  std::string text;
  std::vector<std::string> tokens;  // includes the "[MASK]" token
  Index mask_index = 0;

  static Template parse(const std::string& text);

  /// Template tokens with the placeholder removed (the T of the hybrid layouts).
  std::vector<std::string> tokens_without_mask() const;
};

/// Template token ids resolved against a vocabulary.
struct TemplateIds {
  std::vector<int> with_mask;
  std::vector<int> without_mask;
  Index mask_index = 0;

  static TemplateIds resolve(const Template& t, const Vocabulary& vocab);
};

/// The four English readability templates.
const std::vector<Template>& english_templates();

/// One template per non-empty line; each must contain "[MASK]" exactly once.
std::vector<Template> load_templates(const std::filesystem::path& path);

}  // namespace fpt::encoder
