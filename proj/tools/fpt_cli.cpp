// Command-line driver: feature extraction, training, evaluation and the
// few-shot experiment protocols.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpt/calibration/calibration.hpp"
#include "fpt/error.hpp"
#include "fpt/harness/experiment.hpp"
#include "fpt/harness/synth.hpp"
#include "fpt/numeric/checkpoint.hpp"
#include "fpt/text/features.hpp"
#include "fpt/text/tokenize.hpp"

namespace fs = std::filesystem;
using namespace fpt;

namespace {

struct Common {
  std::string dataset;
  std::string features;
  std::string config;
  std::string test;
  std::string templates;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int n_classes = 0;
};

harness::ExperimentConfig load_config(const Common& c) {
  harness::ExperimentConfig config;
  if (!c.config.empty()) config = harness::ExperimentConfig::load(c.config);
  if (!c.templates.empty()) config.templates = encoder::load_templates(c.templates);
  if (c.seed_set) config.train.seed = c.seed;
  return config;
}

std::optional<harness::FeatureBank> load_bank(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return harness::FeatureBank::from_table(text::read_feature_table(path));
}

std::vector<text::Document> load_test(const std::string& path) {
  if (path.empty()) return {};
  return text::read_dataset(path);
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

std::vector<int> parse_k_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string piece = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const int k = std::stoi(piece, &used);
      if (used != piece.size() || k < 1) throw std::invalid_argument(piece);
      out.push_back(k);
    } catch (const std::exception&) {
      throw ConfigError("invalid k value '" + piece + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void write_matrix(const std::string& dir, const std::string& prefix, const harness::RunMatrix& m) {
  text::write_file(fs::path(dir) / (prefix + "runs.csv"), m.runs_csv());
  text::write_file(fs::path(dir) / (prefix + "summary.csv"), m.summary_csv());
  std::string logs;
  for (const auto& r : m.runs) {
    logs += "# k=" + std::to_string(r.k) + " sample=" + std::to_string(r.sample_index) +
            " repeat=" + std::to_string(r.repeat) + "\n" + r.log_csv;
  }
  text::write_file(fs::path(dir) / (prefix + "train_logs.csv"), logs);
}

void print_progress(const harness::RunRecord& r) {
  std::cerr << "k=" << r.k << " sample=" << r.sample_index << " repeat=" << r.repeat
            << " accuracy=" << text::format_double(r.accuracy) << "\n";
}

int cmd_synth(int classes, int per_class, double noise, const Common& c) {
  const auto data = harness::synth_dataset(classes, per_class, noise, c.seed);
  if (c.out.empty()) throw ConfigError("--out is required");
  text::write_dataset(c.out, data.dataset.documents);
  std::cout << "wrote " << data.dataset.size() << " documents to " << c.out << "\n";
  return 0;
}

int cmd_extract(const Common& c) {
  const auto docs = text::read_dataset(c.dataset);
  text::FeatureTable table;
  table.feature_names = text::builtin_feature_names();
  for (const auto& doc : docs) {
    const auto named = text::builtin_features(text::tokenize(doc.raw_text));
    table.ids.push_back(doc.id);
    table.rows.push_back(Eigen::Map<const RowVectorD>(named.values.data(),
                                                      static_cast<Index>(named.values.size())));
  }
  if (c.out.empty()) {
    std::cout << text::format_feature_table(table);
  } else {
    text::write_feature_table(c.out, table);
  }
  return 0;
}

int cmd_train(const Common& c, const std::string& mode_name, int k) {
  auto config = load_config(c);
  const auto mode = encoder::parse_mode(mode_name);
  config.train.mode = mode;
  config.validate();
  const auto dataset = harness::Dataset::load(c.dataset, c.n_classes);
  const auto bank = load_bank(c.features);
  const auto split = harness::sample_few_shot(dataset, k, harness::sample_seed(config.train.seed, 0),
                                              load_test(c.test));
  const auto seed = harness::run_seed(split.sample_seed, 0);
  const auto& tmpl = config.templates.at(static_cast<std::size_t>(config.template_index));
  harness::RunOptions options;
  options.bank = bank ? &*bank : nullptr;
  const auto r = harness::run_single(split, dataset.n_classes, mode, config, seed, tmpl, options);

  ensure_dir(c.out);
  checkpoint::save(fs::path(c.out) / "model.ckpt", r.params);
  nlohmann::json model = r.bundle.to_json();
  model["train_config"] = config.to_json();
  text::write_file(fs::path(c.out) / "model.json", model.dump(2) + "\n");
  text::write_file(fs::path(c.out) / "train_log.csv", r.log.to_csv());
  nlohmann::json split_ids;
  for (const auto* part : {&split.train, &split.dev}) {
    std::vector<std::string> ids;
    for (const auto& d : *part) ids.push_back(d.id);
    split_ids[part == &split.train ? "train" : "dev"] = ids;
  }
  text::write_file(fs::path(c.out) / "split.json", split_ids.dump(2) + "\n");
  for (const auto& w : r.log.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "best_epoch=" << r.log.best_epoch
            << " dev_accuracy=" << text::format_double(r.dev_accuracy)
            << " test_accuracy=" << text::format_double(r.test_accuracy) << "\n";
  return 0;
}

struct LoadedModel {
  harness::ModelBundle bundle;
  ParamStore params;
};

LoadedModel load_model(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--model is required");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(fs::path(dir) / "model.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model.json: ") + e.what());
  }
  LoadedModel m{harness::ModelBundle::from_json(j), checkpoint::load(fs::path(dir) / "model.ckpt")};
  const auto expected = m.bundle.spec.init_params(0);
  for (const auto& name : expected.names()) {
    if (!m.params.contains(name)) throw DataError("checkpoint is missing tensor '" + name + "'");
  }
  return m;
}

int cmd_evaluate(const Common& c, const std::string& model_dir) {
  const auto m = load_model(model_dir);
  const auto docs = text::read_dataset(c.dataset);
  const auto bank = load_bank(c.features);
  const double acc = harness::evaluate(m.bundle, m.params, docs, bank ? &*bank : nullptr);
  std::cout << "documents=" << docs.size() << " accuracy=" << text::format_double(acc) << "\n";
  return 0;
}

int cmd_run_matrix(const Common& c, const std::string& mode_name, const std::string& ks) {
  auto config = load_config(c);
  const auto mode = encoder::parse_mode(mode_name);
  const auto dataset = harness::Dataset::load(c.dataset, c.n_classes);
  const auto bank = load_bank(c.features);
  ensure_dir(c.out);
  harness::RunOptions options;
  options.bank = bank ? &*bank : nullptr;
  const auto m = harness::run_matrix(dataset, mode, parse_k_list(ks), config, options,
                                     load_test(c.test), print_progress);
  write_matrix(c.out, "", m);
  std::cout << m.summary_csv();
  if (m.failure) throw TrainingError("run matrix aborted after " + std::to_string(m.runs.size()) +
                                     " runs: " + *m.failure);
  return 0;
}

int cmd_ablate(const Common& c, const std::string& ks) {
  auto config = load_config(c);
  const auto dataset = harness::Dataset::load(c.dataset, c.n_classes);
  const auto bank = load_bank(c.features);
  ensure_dir(c.out);
  const auto table = harness::ablation_suite(dataset, parse_k_list(ks), config,
                                             bank ? &*bank : nullptr, load_test(c.test),
                                             print_progress);
  const std::vector<std::string> prefixes = {"fpt_", "no_sc_", "hbp_", "fpt_random_"};
  for (std::size_t i = 0; i < table.matrices.size(); ++i) write_matrix(c.out, prefixes[i], table.matrices[i]);
  text::write_file(fs::path(c.out) / "ablation.csv", table.to_csv());
  std::cout << table.to_csv();
  if (const auto f = table.failure()) throw TrainingError("ablation aborted: " + *f);
  return 0;
}

int cmd_dump_similarity(const Common& c, const std::string& model_dir) {
  const auto m = load_model(model_dir);
  if (!m.bundle.spec.uses_features()) throw ModeError("dump-similarity needs an fpt model");
  const auto dataset = harness::Dataset::load(c.dataset, m.bundle.spec.encoder.n_classes);
  const auto bank = load_bank(c.features);
  std::vector<RowVectorD> rows;
  std::vector<int> labels;
  for (const auto& ex : m.bundle.examples(dataset.documents, bank ? &*bank : nullptr)) {
    rows.push_back(ex.features);
    labels.push_back(ex.label);
  }
  const auto sets = calibration::ClassFeatureSet::group(rows, labels, dataset.n_classes);
  const auto dump = calibration::similarity_dump(sets, m.bundle.spec.mlp, m.params);
  ensure_dir(c.out);
  text::write_file(fs::path(c.out) / "raw.csv", dump.raw_csv());
  text::write_file(fs::path(c.out) / "embedded.csv", dump.embedded_csv());
  text::write_file(fs::path(c.out) / "difference.csv", dump.difference_csv());
  std::cout << "raw\n" << calibration::format_grid(dump.raw.values) << "embedded\n"
            << calibration::format_grid(dump.embedded.values) << "difference\n"
            << calibration::format_grid(dump.difference);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature prompt tuning for few-shot readability assessment"};
  app.require_subcommand(1);
  Common c;
  std::string mode = "fpt";
  std::string model_dir;
  std::string ks = "2";
  int k = 2;
  int classes = 5;
  int per_class = 40;
  double noise = 0.5;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { c.seed = s; c.seed_set = true; }, "Base seed");
  };
  auto add_data = [&](CLI::App* sub, bool features) {
    sub->add_option("--dataset", c.dataset, "JSON-lines dataset")->required();
    if (features) sub->add_option("--features", c.features, "Feature table (id column first)");
  };
  auto add_experiment = [&](CLI::App* sub) {
    sub->add_option("--config", c.config, "JSON config");
    sub->add_option("--test", c.test, "Held-out test set (default: documents outside the split)");
    sub->add_option("--templates", c.templates, "Template file, one per line");
    sub->add_option("--classes", c.n_classes, "Number of classes (default: max label + 1)");
    add_seed(sub);
  };

  auto* synth = app.add_subcommand("synth", "Write a synthetic ordinal dataset");
  synth->add_option("--classes", classes)->capture_default_str();
  synth->add_option("--per-class", per_class)->capture_default_str();
  synth->add_option("--noise", noise)->capture_default_str();
  synth->add_option("--out", c.out)->required();
  add_seed(synth);

  auto* extract = app.add_subcommand("extract-features", "Builtin linguistic features per document");
  add_data(extract, false);
  extract->add_option("--out", c.out, "Output table (default: stdout)");

  auto* train = app.add_subcommand("train", "Train one model on a k-shot split");
  add_data(train, true);
  add_experiment(train);
  train->add_option("--mode", mode)->capture_default_str();
  train->add_option("--k", k)->capture_default_str();
  train->add_option("--out", c.out, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy of a trained model on a dataset");
  add_data(evaluate, true);
  evaluate->add_option("--model", model_dir, "Directory written by train")->required();

  auto* matrix = app.add_subcommand("run-matrix", "4 samples x 4 repeats per k");
  add_data(matrix, true);
  add_experiment(matrix);
  matrix->add_option("--mode", mode)->capture_default_str();
  matrix->add_option("--k", ks, "Comma-separated k values")->capture_default_str();
  matrix->add_option("--out", c.out, "Output directory")->required();

  auto* ablate = app.add_subcommand("ablate", "FPT, -SC, -SC-FP and random-feature comparison");
  add_data(ablate, true);
  add_experiment(ablate);
  ablate->add_option("--k", ks, "Comma-separated k values")->capture_default_str();
  ablate->add_option("--out", c.out, "Output directory")->required();

  auto* dump = app.add_subcommand("dump-similarity", "Raw and embedded class similarity grids");
  add_data(dump, true);
  dump->add_option("--model", model_dir, "Directory written by train")->required();
  dump->add_option("--out", c.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*synth) return cmd_synth(classes, per_class, noise, c);
    if (*extract) return cmd_extract(c);
    if (*train) return cmd_train(c, mode, k);
    if (*evaluate) return cmd_evaluate(c, model_dir);
    if (*matrix) return cmd_run_matrix(c, mode, ks);
    if (*ablate) return cmd_ablate(c, ks);
    if (*dump) return cmd_dump_similarity(c, model_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
