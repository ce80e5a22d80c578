#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fpt/text/document.hpp"

namespace fpt::text {

inline constexpr double kMtldThreshold = 0.72;

/// Vowel groups (a, e, i, o, u, y) with a silent trailing-e adjustment,
/// floored at 1.
int count_syllables(std::string_view word);

/// The fourteen shallow traditional features, in table order.
NamedValues shallow_features(const TokenizedDoc& doc);

/// TTR, corrected TTR, bi-logarithmic TTR, Uber index and MTLD.
NamedValues lexical_diversity_features(const TokenizedDoc& doc);

/// One directional MTLD pass (factor count with partial final factor).
double mtld_pass(const std::vector<std::string>& words, double threshold = kMtldThreshold);
double mtld(const std::vector<std::string>& words, double threshold = kMtldThreshold);

/// Shallow followed by lexical-diversity features (19 values).
NamedValues builtin_features(const TokenizedDoc& doc);
const std::vector<std::string>& builtin_feature_names();

}  // namespace fpt::text
