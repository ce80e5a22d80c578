#include "fpt/harness/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "fpt/error.hpp"
#include "fpt/numeric/rng.hpp"
#include "fpt/text/features.hpp"
#include "fpt/text/tokenize.hpp"

namespace fpt::harness {
namespace {

constexpr std::array<std::string_view, 40> kCommon = {
    "the", "a", "cat", "dog", "sun", "ran", "sat", "big", "red", "hat",
    "we", "go", "to", "map", "box", "fox", "day", "sky", "bird", "tree",
    "fish", "cup", "pen", "bed", "car", "hill", "road", "home", "play", "jump",
    "look", "saw", "had", "has", "is", "was", "in", "on", "it", "and"};

constexpr std::array<std::string_view, 40> kRare = {
    "consideration", "extraordinary", "administration", "revolutionary", "opportunity",
    "communication", "responsibility", "photosynthesis", "interpretation", "infrastructure",
    "characteristic", "international", "organization", "environmental", "determination",
    "approximately", "philosophical", "investigation", "unquestionable", "identification",
    "evolutionary", "mathematical", "transformation", "contemporary", "significantly",
    "independently", "comprehensive", "documentation", "experimental", "participation",
    "sophisticated", "electricity", "biological", "vocabulary", "hypothetical",
    "overwhelmingly", "constitutional", "pharmaceutical", "technological", "ideological"};

constexpr int kSentences = 4;

std::string make_text(double t, Rng& rng) {
  const int length = std::max(3, static_cast<int>(std::lround(5.0 + 10.0 * t)));
  const double rare_rate = std::clamp(0.05 + 0.45 * t, 0.0, 1.0);
  std::string out;
  for (int s = 0; s < kSentences; ++s) {
    for (int w = 0; w < length; ++w) {
      const bool rare = rng.uniform() < rare_rate;
      std::string word(rare ? kRare[rng.below(kRare.size())] : kCommon[rng.below(kCommon.size())]);
      if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      if (!out.empty()) out += ' ';
      out += word;
    }
    out += '.';
  }
  return out;
}

}  // namespace

SynthData synth_dataset(int n_classes, int per_class, double noise, std::uint64_t seed) {
  if (n_classes < 2) throw ConfigError("synth_dataset needs at least 2 classes");
  if (per_class < 1) throw ConfigError("synth_dataset needs at least 1 document per class");
  if (noise < 0) throw ConfigError("noise must be non-negative");
  Rng rng = Rng::stream(seed, "synth");
  const double spacing = 1.0 / static_cast<double>(n_classes - 1);
  SynthData out;
  std::vector<text::Document> docs;
  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const double t = c * spacing + noise * spacing * rng.uniform(-1.0, 1.0);
      text::Document doc;
      doc.id = "c" + std::to_string(c) + "_" + std::to_string(i);
      doc.raw_text = make_text(t, rng);
      doc.label = c;
      const auto named = text::builtin_features(text::tokenize(doc.raw_text));
      text::FeatureVector fv;
      fv.feature_names = named.names;
      fv.values = Eigen::Map<const RowVectorD>(named.values.data(),
                                               static_cast<Index>(named.values.size()));
      out.features.push_back(std::move(fv));
      docs.push_back(std::move(doc));
    }
  }
  out.dataset = Dataset::from_documents(std::move(docs), "synth", n_classes);
  return out;
}

}  // namespace fpt::harness
