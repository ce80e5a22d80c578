#include "fpt/encoder/config.hpp"

#include <algorithm>
#include <cctype>

#include "fpt/error.hpp"

namespace fpt::encoder {

PromptMode parse_mode(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "ft") return PromptMode::kFT;
  if (n == "hp") return PromptMode::kHP;
  if (n == "sp") return PromptMode::kSP;
  if (n == "hbp") return PromptMode::kHBP;
  if (n == "fpt") return PromptMode::kFPT;
  throw ModeError("unknown mode '" + name + "' (expected ft, hp, sp, hbp or fpt)");
}

std::string mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::kFT: return "ft";
    case PromptMode::kHP: return "hp";
    case PromptMode::kSP: return "sp";
    case PromptMode::kHBP: return "hbp";
    case PromptMode::kFPT: return "fpt";
  }
  return "?";
}

void EncoderConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("encoder: " + m); };
  if (d_model <= 0 || n_heads <= 0 || d_ff <= 0 || n_layers < 0) fail("sizes must be positive");
  if (d_model % n_heads != 0) fail("d_model must be divisible by n_heads");
  if (n_classes < 1) fail("n_classes must be at least 1");
  if (l_soft_tokens < 0) fail("l_soft_tokens must be non-negative");
  if (max_seq_len < 3) fail("max_seq_len too small");
  if (dropout_rate < 0 || dropout_rate >= 1) fail("dropout_rate must lie in [0, 1)");
}

void EncoderConfig::to_json(nlohmann::json& j) const {
  j["vocab_size"] = vocab_size;
  j["d_model"] = d_model;
  j["n_layers"] = n_layers;
  j["n_heads"] = n_heads;
  j["d_ff"] = d_ff;
  j["max_seq_len"] = max_seq_len;
  j["n_classes"] = n_classes;
  j["l_soft_tokens"] = l_soft_tokens;
  j["dropout_rate"] = dropout_rate;
}

void EncoderConfig::update_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("vocab_size")) vocab_size = j["vocab_size"].get<int>();
    if (j.contains("d_model")) d_model = j["d_model"].get<int>();
    if (j.contains("n_layers")) n_layers = j["n_layers"].get<int>();
    if (j.contains("n_heads")) n_heads = j["n_heads"].get<int>();
    if (j.contains("d_ff")) d_ff = j["d_ff"].get<int>();
    if (j.contains("max_seq_len")) max_seq_len = j["max_seq_len"].get<int>();
    if (j.contains("n_classes")) n_classes = j["n_classes"].get<int>();
    if (j.contains("l_soft_tokens")) l_soft_tokens = j["l_soft_tokens"].get<int>();
    if (j.contains("dropout_rate")) dropout_rate = j["dropout_rate"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("encoder config: ") + e.what());
  }
}

}  // namespace fpt::encoder
