#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpt/encoder/prompt_template.hpp"
#include "fpt/encoder/vocab.hpp"
#include "fpt/harness/dataset.hpp"
#include "fpt/harness/metrics.hpp"
#include "fpt/text/io.hpp"
#include "fpt/text/schema.hpp"
#include "fpt/trainer/trainer.hpp"

namespace fpt::harness {

inline constexpr int kSampleSeeds = 4;
inline constexpr int kRepeats = 4;

/// How template-based modes pick among the templates: one fixed template, the
/// mean over all templates, or the template with the best dev accuracy.
enum class TemplatePolicy { kFixed, kAverage, kBestDev };

TemplatePolicy parse_template_policy(const std::string& name);
std::string template_policy_name(TemplatePolicy policy);

/// Flat JSON config: TrainConfig and EncoderConfig keys plus "d_hidden",
/// "template_index" and "template_policy".
struct ExperimentConfig {
  trainer::TrainConfig train;
  encoder::EncoderConfig encoder;
  int d_hidden = 64;
  int template_index = 0;
  TemplatePolicy template_policy = TemplatePolicy::kFixed;
  std::vector<encoder::Template> templates = encoder::english_templates();

  void validate() const;
  nlohmann::json to_json() const;
  void update_from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Externally supplied feature rows keyed by document id.
struct FeatureBank {
  std::vector<std::string> names;
  std::map<std::string, RowVectorD> rows;

  static FeatureBank from_table(const text::FeatureTable& table);
  const RowVectorD& row(const std::string& id) const;
};

enum class FeatureVariant { kReal, kRandom };

/// Per-document standard-normal vector of width `alpha`, fixed by (seed, id).
RowVectorD random_feature_vector(const std::string& id, Index alpha, std::uint64_t seed);

/// Everything needed to turn raw documents into model inputs.
struct ModelBundle {
  trainer::ModelSpec spec;
  encoder::Vocabulary vocab;
  text::FeatureSchema schema;
  encoder::Template tmpl;
  bool external_features = false;
  FeatureVariant variant = FeatureVariant::kReal;
  std::uint64_t random_seed = 0;

  trainer::Example example(const text::Document& doc, const FeatureBank* bank = nullptr) const;
  std::vector<trainer::Example> examples(const std::vector<text::Document>& docs,
                                         const FeatureBank* bank = nullptr) const;

  nlohmann::json to_json() const;
  static ModelBundle from_json(const nlohmann::json& j);
};

/// Vocabulary from the training documents and template, feature statistics
/// fitted on the training documents, and the model spec sized to both.
ModelBundle build_bundle(const std::vector<text::Document>& train, int n_classes,
                         encoder::PromptMode mode, const ExperimentConfig& config,
                         const encoder::Template& tmpl, const FeatureBank* bank = nullptr,
                         FeatureVariant variant = FeatureVariant::kReal);

struct RunOptions {
  const FeatureBank* bank = nullptr;
  FeatureVariant variant = FeatureVariant::kReal;
};

struct RunResult {
  double test_accuracy = 0.0;
  double dev_accuracy = 0.0;
  trainer::TrainLog log;
  ParamStore params;
  ModelBundle bundle;
};

/// Trains one model on a split (seeded by `seed`) and scores the best-dev
/// checkpoint on the test set.
RunResult run_single(const FewShotSplit& split, int n_classes, encoder::PromptMode mode,
                     const ExperimentConfig& config, std::uint64_t seed,
                     const encoder::Template& tmpl, const RunOptions& options = {});

double evaluate(const ModelBundle& bundle, const ParamStore& params,
                const std::vector<text::Document>& docs, const FeatureBank* bank = nullptr);

struct RunRecord {
  int k = 0;
  int sample_index = 0;
  int repeat = 0;
  std::uint64_t sample_seed = 0;
  std::uint64_t run_seed = 0;
  double accuracy = 0.0;
  int best_epoch = 0;
  bool alternation_ok = true;
  std::string log_csv;
};

struct RunMatrix {
  encoder::PromptMode mode = encoder::PromptMode::kFPT;
  std::vector<int> k_list;
  std::vector<RunRecord> runs;
  /// "<kind>: <message>" of the run that aborted the matrix, if any.
  std::optional<std::string> failure;

  std::vector<double> accuracies(int k) const;
  MeanStd aggregate(int k) const;
  std::string cell(int k) const;
  /// One line per run: k,sample,repeat,sample_seed,run_seed,accuracy,best_epoch.
  std::string runs_csv() const;
  /// "k,<mode>" header then one "mean(std)" cell per k.
  std::string summary_csv() const;
};

std::uint64_t sample_seed(std::uint64_t base, int sample_index);
std::uint64_t run_seed(std::uint64_t sample_seed, int repeat);

using Progress = std::function<void(const RunRecord&)>;

/// For each k: 4 sampled splits x 4 training repeats. A failing run stops the
/// matrix; the runs completed so far are kept and `failure` is set.
RunMatrix run_matrix(const Dataset& dataset, encoder::PromptMode mode, const std::vector<int>& k_list,
                     const ExperimentConfig& config, const RunOptions& options = {},
                     const std::vector<text::Document>& held_out = {},
                     const Progress& progress = {});

struct AblationTable {
  std::vector<int> k_list;
  std::vector<std::string> columns;
  std::vector<RunMatrix> matrices;

  std::optional<std::string> failure() const;
  /// "k,FPT,-SC,-SC-FP,FPT-random" header then mean(std) cells per k.
  std::string to_csv() const;
  /// Mean accuracy of a column over every run of every k.
  double column_mean(std::size_t column) const;
};

/// FPT, FPT without calibration, the hybrid prompt with pseudo tokens, and FPT
/// fed frozen random vectors instead of linguistic features.
AblationTable ablation_suite(const Dataset& dataset, const std::vector<int>& k_list,
                             const ExperimentConfig& config, const FeatureBank* bank = nullptr,
                             const std::vector<text::Document>& held_out = {},
                             const Progress& progress = {});

}  // namespace fpt::harness
