#include "fpt/harness/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "fpt/error.hpp"
#include "fpt/text/tokenize.hpp"

namespace fpt::harness {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "epochs", "batch_size", "learning_rate", "weight_decay", "warmup_ratio",
      "calibration_learning_rate", "calibration_steps", "calibration_ranking", "seed", "mode", "calibration_enabled",
      "vocab_size", "d_model", "n_layers", "n_heads", "d_ff", "max_seq_len", "n_classes",
      "l_soft_tokens", "dropout_rate", "d_hidden", "template_index", "template_policy"};
  return keys;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool uses_template(encoder::PromptMode mode) {
  return mode == encoder::PromptMode::kHP || mode == encoder::PromptMode::kHBP ||
         mode == encoder::PromptMode::kFPT;
}

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->kind() + ": " + err->what();
  return std::string("internal: ") + e.what();
}

}  // namespace

TemplatePolicy parse_template_policy(const std::string& name) {
  const std::string n = lower(name);
  if (n == "fixed") return TemplatePolicy::kFixed;
  if (n == "average") return TemplatePolicy::kAverage;
  if (n == "best_dev") return TemplatePolicy::kBestDev;
  throw ConfigError("unknown template policy '" + name + "' (expected fixed, average or best_dev)");
}

std::string template_policy_name(TemplatePolicy policy) {
  switch (policy) {
    case TemplatePolicy::kFixed: return "fixed";
    case TemplatePolicy::kAverage: return "average";
    case TemplatePolicy::kBestDev: return "best_dev";
  }
  return "fixed";
}

void ExperimentConfig::validate() const {
  train.validate();
  encoder::EncoderConfig probe = encoder;
  if (probe.vocab_size <= 0) probe.vocab_size = encoder::kMaskId + 1;
  probe.validate();
  if (d_hidden < 1) throw ConfigError("d_hidden must be at least 1");
  if (templates.empty()) throw ConfigError("no templates configured");
  if (template_index < 0 || template_index >= static_cast<int>(templates.size())) {
    throw ConfigError("template_index " + std::to_string(template_index) + " outside [0, " +
                      std::to_string(templates.size()) + ")");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  train.to_json(j);
  encoder.to_json(j);
  j["d_hidden"] = d_hidden;
  j["template_index"] = template_index;
  j["template_policy"] = template_policy_name(template_policy);
  return j;
}

void ExperimentConfig::update_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  train.update_from_json(j);
  encoder.update_from_json(j);
  try {
    if (j.contains("d_hidden")) d_hidden = j["d_hidden"].get<int>();
    if (j.contains("template_index")) template_index = j["template_index"].get<int>();
    if (j.contains("template_policy")) {
      template_policy = parse_template_policy(j["template_policy"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  ExperimentConfig config;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  config.update_from_json(j);
  return config;
}

FeatureBank FeatureBank::from_table(const text::FeatureTable& table) {
  FeatureBank bank;
  bank.names = table.feature_names;
  for (std::size_t i = 0; i < table.ids.size(); ++i) bank.rows.emplace(table.ids[i], table.rows[i]);
  return bank;
}

const RowVectorD& FeatureBank::row(const std::string& id) const {
  auto it = rows.find(id);
  if (it == rows.end()) throw DataError("no feature row for document '" + id + "'");
  return it->second;
}

RowVectorD random_feature_vector(const std::string& id, Index alpha, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "random_features." + id);
  RowVectorD v(alpha);
  for (Index i = 0; i < alpha; ++i) v(i) = rng.normal();
  return v;
}

trainer::Example ModelBundle::example(const text::Document& doc, const FeatureBank* bank) const {
  trainer::Example ex;
  ex.id = doc.id;
  ex.label = doc.label;
  ex.token_ids = vocab.encode(text::tokenize(doc.raw_text).tokens);
  if (spec.uses_features()) {
    if (variant == FeatureVariant::kRandom) {
      ex.features = random_feature_vector(doc.id, schema.size(), random_seed);
      ex.raw_features = ex.features;
    } else {
      std::optional<RowVectorD> external;
      if (external_features) {
        if (bank == nullptr) throw DataError("model expects an external feature file");
        external = bank->row(doc.id);
      }
      ex.raw_features = text::raw_features(doc, schema, external);
      ex.features = schema.normalize(ex.raw_features);
    }
  }
  return ex;
}

std::vector<trainer::Example> ModelBundle::examples(const std::vector<text::Document>& docs,
                                                    const FeatureBank* bank) const {
  std::vector<trainer::Example> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) out.push_back(example(doc, bank));
  return out;
}

nlohmann::json ModelBundle::to_json() const {
  nlohmann::json j;
  nlohmann::json enc = nlohmann::json::object();
  spec.encoder.to_json(enc);
  j["encoder"] = enc;
  j["mode"] = encoder::mode_name(spec.mode);
  j["mlp"] = {{"alpha", spec.mlp.alpha}, {"d_hidden", spec.mlp.d_hidden},
              {"d_model", spec.mlp.d_model}, {"heads", spec.mlp.heads}};
  j["template"] = tmpl.text;
  j["vocab"] = vocab.to_json();
  j["schema"] = schema.to_json();
  j["external_features"] = external_features;
  j["feature_variant"] = variant == FeatureVariant::kRandom ? "random" : "real";
  j["random_seed"] = random_seed;
  return j;
}

ModelBundle ModelBundle::from_json(const nlohmann::json& j) {
  try {
    ModelBundle b;
    b.spec.encoder.update_from_json(j.at("encoder"));
    b.spec.mode = encoder::parse_mode(j.at("mode").get<std::string>());
    const auto& mlp = j.at("mlp");
    b.spec.mlp.alpha = mlp.at("alpha").get<int>();
    b.spec.mlp.d_hidden = mlp.at("d_hidden").get<int>();
    b.spec.mlp.d_model = mlp.at("d_model").get<int>();
    b.spec.mlp.heads = mlp.at("heads").get<int>();
    b.tmpl = encoder::Template::parse(j.at("template").get<std::string>());
    b.vocab = encoder::Vocabulary::from_json(j.at("vocab"));
    b.schema = text::FeatureSchema::from_json(j.at("schema"));
    b.external_features = j.at("external_features").get<bool>();
    b.variant = j.at("feature_variant").get<std::string>() == "random" ? FeatureVariant::kRandom
                                                                        : FeatureVariant::kReal;
    b.random_seed = j.at("random_seed").get<std::uint64_t>();
    b.spec.tmpl = encoder::TemplateIds::resolve(b.tmpl, b.vocab);
    b.spec.encoder.validate();
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model description: ") + e.what());
  }
}

ModelBundle build_bundle(const std::vector<text::Document>& train, int n_classes,
                         encoder::PromptMode mode, const ExperimentConfig& config,
                         const encoder::Template& tmpl, const FeatureBank* bank,
                         FeatureVariant variant) {
  if (train.empty()) throw DataError("empty training set");
  ModelBundle b;
  b.tmpl = tmpl;
  b.variant = variant;
  b.random_seed = config.train.seed;
  for (const auto& tok : tmpl.tokens_without_mask()) b.vocab.add(tok);
  for (const auto& doc : train) {
    for (const auto& tok : text::tokenize(doc.raw_text).tokens) b.vocab.add(tok);
  }

  b.external_features = bank != nullptr;
  b.schema = bank != nullptr ? text::FeatureSchema::external_only(bank->names)
                             : text::FeatureSchema::with_builtin();
  std::vector<RowVectorD> raw;
  raw.reserve(train.size());
  for (const auto& doc : train) {
    std::optional<RowVectorD> external;
    if (bank != nullptr) external = bank->row(doc.id);
    raw.push_back(text::raw_features(doc, b.schema, external));
  }
  b.schema.fit(raw);

  b.spec.mode = mode;
  b.spec.encoder = config.encoder;
  b.spec.encoder.vocab_size = b.vocab.size();
  b.spec.encoder.n_classes = n_classes;
  b.spec.encoder.validate();
  b.spec.tmpl = encoder::TemplateIds::resolve(tmpl, b.vocab);
  b.spec.mlp.alpha = static_cast<int>(b.schema.size());
  b.spec.mlp.d_hidden = config.d_hidden;
  b.spec.mlp.d_model = config.encoder.d_model;
  b.spec.mlp.heads = config.encoder.l_soft_tokens;
  return b;
}

double evaluate(const ModelBundle& bundle, const ParamStore& params,
                const std::vector<text::Document>& docs, const FeatureBank* bank) {
  const auto examples = bundle.examples(docs, bank);
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const auto& ex : examples) labels.push_back(ex.label);
  return accuracy(trainer::predict_all(params, bundle.spec, examples), labels);
}

RunResult run_single(const FewShotSplit& split, int n_classes, encoder::PromptMode mode,
                     const ExperimentConfig& config, std::uint64_t seed,
                     const encoder::Template& tmpl, const RunOptions& options) {
  ExperimentConfig local = config;
  local.train.seed = seed;
  local.train.mode = mode;
  RunResult r;
  r.bundle = build_bundle(split.train, n_classes, mode, config, tmpl, options.bank, options.variant);
  const auto train = r.bundle.examples(split.train, options.bank);
  const auto dev = r.bundle.examples(split.dev, options.bank);
  trainer::Trainer trainer(r.bundle.spec, local.train);
  auto result = trainer.train(r.bundle.spec.init_params(seed), train, dev);
  r.params = std::move(result.best);
  r.log = std::move(result.log);
  std::vector<int> dev_labels;
  for (const auto& ex : dev) dev_labels.push_back(ex.label);
  r.dev_accuracy = dev.empty() ? 0.0 : accuracy(trainer::predict_all(r.params, r.bundle.spec, dev), dev_labels);
  r.test_accuracy = split.test.empty() ? 0.0 : evaluate(r.bundle, r.params, split.test, options.bank);
  return r;
}

std::vector<double> RunMatrix::accuracies(int k) const {
  std::vector<double> out;
  for (const auto& r : runs) {
    if (r.k == k) out.push_back(r.accuracy);
  }
  return out;
}

MeanStd RunMatrix::aggregate(int k) const { return mean_std(accuracies(k)); }

std::string RunMatrix::cell(int k) const { return format_cell(aggregate(k)); }

std::string RunMatrix::runs_csv() const {
  std::string out = "k,sample,repeat,sample_seed,run_seed,accuracy,best_epoch\n";
  for (const auto& r : runs) {
    out += std::to_string(r.k) + "," + std::to_string(r.sample_index) + "," +
           std::to_string(r.repeat) + "," + std::to_string(r.sample_seed) + "," +
           std::to_string(r.run_seed) + "," + text::format_double(r.accuracy) + "," +
           std::to_string(r.best_epoch) + "\n";
  }
  return out;
}

std::string RunMatrix::summary_csv() const {
  std::string out = "k," + encoder::mode_name(mode) + "\n";
  for (int k : k_list) {
    if (accuracies(k).empty()) continue;
    out += std::to_string(k) + "," + cell(k) + "\n";
  }
  return out;
}

std::uint64_t sample_seed(std::uint64_t base, int sample_index) {
  return Rng::mix(base, "sample." + std::to_string(sample_index));
}

std::uint64_t run_seed(std::uint64_t sample_seed, int repeat) {
  return Rng::mix(sample_seed, "repeat." + std::to_string(repeat));
}

RunMatrix run_matrix(const Dataset& dataset, encoder::PromptMode mode, const std::vector<int>& k_list,
                     const ExperimentConfig& config, const RunOptions& options,
                     const std::vector<text::Document>& held_out, const Progress& progress) {
  config.validate();
  RunMatrix m;
  m.mode = mode;
  m.k_list = k_list;
  std::vector<std::size_t> template_ids;
  if (!uses_template(mode) || config.template_policy == TemplatePolicy::kFixed) {
    template_ids.push_back(static_cast<std::size_t>(config.template_index));
  } else {
    for (std::size_t t = 0; t < config.templates.size(); ++t) template_ids.push_back(t);
  }
  try {
    for (int k : k_list) {
      for (int s = 0; s < kSampleSeeds; ++s) {
        const std::uint64_t sseed = sample_seed(config.train.seed, s);
        const FewShotSplit split = sample_few_shot(dataset, k, sseed, held_out);
        for (int rep = 0; rep < kRepeats; ++rep) {
          RunRecord rec;
          rec.k = k;
          rec.sample_index = s;
          rec.repeat = rep;
          rec.sample_seed = sseed;
          rec.run_seed = run_seed(sseed, rep);
          double sum = 0;
          double best_dev = -1;
          for (std::size_t t : template_ids) {
            const RunResult r = run_single(split, dataset.n_classes, mode, config, rec.run_seed,
                                           config.templates[t], options);
            rec.alternation_ok = rec.alternation_ok && r.log.calibration_follows_batches();
            sum += r.test_accuracy;
            if (r.dev_accuracy > best_dev) {
              best_dev = r.dev_accuracy;
              rec.best_epoch = r.log.best_epoch;
              rec.log_csv = r.log.to_csv();
              if (config.template_policy == TemplatePolicy::kBestDev) rec.accuracy = r.test_accuracy;
            }
          }
          if (config.template_policy != TemplatePolicy::kBestDev || template_ids.size() == 1) {
            rec.accuracy = sum / static_cast<double>(template_ids.size());
          }
          m.runs.push_back(rec);
          if (progress) progress(rec);
        }
      }
    }
  } catch (const std::exception& e) {
    m.failure = describe(e);
  }
  return m;
}

std::optional<std::string> AblationTable::failure() const {
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    if (matrices[i].failure) return columns[i] + ": " + *matrices[i].failure;
  }
  return std::nullopt;
}

std::string AblationTable::to_csv() const {
  std::string out = "k";
  for (const auto& c : columns) out += "," + c;
  out += "\n";
  for (int k : k_list) {
    out += std::to_string(k);
    for (const auto& m : matrices) out += "," + (m.accuracies(k).empty() ? std::string("-") : m.cell(k));
    out += "\n";
  }
  return out;
}

double AblationTable::column_mean(std::size_t column) const {
  std::vector<double> all;
  for (const auto& r : matrices.at(column).runs) all.push_back(r.accuracy);
  return mean_std(all).mean;
}

AblationTable ablation_suite(const Dataset& dataset, const std::vector<int>& k_list,
                             const ExperimentConfig& config, const FeatureBank* bank,
                             const std::vector<text::Document>& held_out, const Progress& progress) {
  AblationTable table;
  table.k_list = k_list;
  table.columns = {"FPT", "-SC", "-SC-FP", "FPT-random"};

  ExperimentConfig with_sc = config;
  with_sc.train.calibration_enabled = true;
  ExperimentConfig without_sc = config;
  without_sc.train.calibration_enabled = false;

  const RunOptions real{bank, FeatureVariant::kReal};
  const RunOptions random{bank, FeatureVariant::kRandom};
  table.matrices.push_back(run_matrix(dataset, encoder::PromptMode::kFPT, k_list, with_sc, real,
                                      held_out, progress));
  if (!table.matrices.back().failure) {
    table.matrices.push_back(run_matrix(dataset, encoder::PromptMode::kFPT, k_list, without_sc, real,
                                        held_out, progress));
  }
  if (!table.matrices.back().failure) {
    table.matrices.push_back(run_matrix(dataset, encoder::PromptMode::kHBP, k_list, config, real,
                                        held_out, progress));
  }
  if (!table.matrices.back().failure) {
    table.matrices.push_back(run_matrix(dataset, encoder::PromptMode::kFPT, k_list, with_sc, random,
                                        held_out, progress));
  }
  table.columns.resize(table.matrices.size());
  return table;
}

}  // namespace fpt::harness
