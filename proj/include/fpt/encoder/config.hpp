#pragma once

#include <string>

#include <json.hpp>

namespace fpt::encoder {

enum class PromptMode { kFT, kHP, kSP, kHBP, kFPT };

PromptMode parse_mode(const std::string& name);
std::string mode_name(PromptMode mode);

/// True for the four modes that read the [MASK] row through the verbalizer.
inline bool is_prompt_mode(PromptMode m) { return m != PromptMode::kFT; }

struct EncoderConfig {
  int vocab_size = 0;  // set from the vocabulary when a model is built
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 128;
  int max_seq_len = 128;
  int n_classes = 5;
  int l_soft_tokens = 4;
  double dropout_rate = 0.0;

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;

  void to_json(nlohmann::json& j) const;
  /// Reads only the keys present in `j`, leaving other fields untouched.
  void update_from_json(const nlohmann::json& j);
};

}  // namespace fpt::encoder
