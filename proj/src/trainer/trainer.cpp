#include "fpt/trainer/trainer.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "fpt/calibration/calibration.hpp"
#include "fpt/error.hpp"
#include "fpt/harness/metrics.hpp"
#include "fpt/text/io.hpp"

namespace fpt::trainer {
namespace {

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw TrainingError(what + " is not finite");
}

}  // namespace

CalibrationRanking parse_calibration_ranking(const std::string& name) {
  if (name == "normalized") return CalibrationRanking::kNormalized;
  if (name == "raw") return CalibrationRanking::kRaw;
  throw ConfigError("unknown calibration ranking '" + name + "' (expected normalized or raw)");
}

std::string calibration_ranking_name(CalibrationRanking r) {
  return r == CalibrationRanking::kRaw ? "raw" : "normalized";
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (weight_decay < 0) throw ConfigError("weight_decay must be non-negative");
  if (!(warmup_ratio >= 0 && warmup_ratio < 1)) throw ConfigError("warmup_ratio must lie in [0, 1)");
  if (calibration_steps < 1) throw ConfigError("calibration_steps must be at least 1");
}

void TrainConfig::to_json(nlohmann::json& j) const {
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["weight_decay"] = weight_decay;
  j["warmup_ratio"] = warmup_ratio;
  j["calibration_learning_rate"] = effective_calibration_lr();
  j["calibration_steps"] = calibration_steps;
  j["seed"] = seed;
  j["mode"] = encoder::mode_name(mode);
  j["calibration_enabled"] = calibration_enabled;
  j["calibration_ranking"] = calibration_ranking_name(calibration_ranking);
}

void TrainConfig::update_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("epochs")) epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) batch_size = j["batch_size"].get<int>();
    if (j.contains("learning_rate")) learning_rate = j["learning_rate"].get<double>();
    if (j.contains("weight_decay")) weight_decay = j["weight_decay"].get<double>();
    if (j.contains("warmup_ratio")) warmup_ratio = j["warmup_ratio"].get<double>();
    if (j.contains("calibration_learning_rate")) {
      calibration_learning_rate = j["calibration_learning_rate"].get<double>();
    }
    if (j.contains("calibration_steps")) calibration_steps = j["calibration_steps"].get<int>();
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mode")) mode = encoder::parse_mode(j["mode"].get<std::string>());
    if (j.contains("calibration_enabled")) calibration_enabled = j["calibration_enabled"].get<bool>();
    if (j.contains("calibration_ranking")) {
      calibration_ranking = parse_calibration_ranking(j["calibration_ranking"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
}

std::string TrainLog::to_csv() const {
  std::string out = "epoch,cls_loss,cal_loss,dev_acc\n";
  for (const auto& e : entries) {
    out += std::to_string(e.epoch) + "," + text::format_double(e.cls_loss) + ",";
    if (e.cal_loss) out += text::format_double(*e.cal_loss);
    out += "," + text::format_double(e.dev_acc) + "\n";
  }
  return out;
}

bool TrainLog::calibration_follows_batches() const {
  std::map<int, std::int64_t> last_batch;
  for (const auto& ev : events) {
    if (ev.kind == TrainEvent::Kind::kBatch) {
      auto& t = last_batch[ev.epoch];
      t = std::max(t, ev.tick);
    }
  }
  for (const auto& ev : events) {
    if (ev.kind != TrainEvent::Kind::kCalibration) continue;
    auto it = last_batch.find(ev.epoch);
    if (it != last_batch.end() && ev.tick <= it->second) return false;
  }
  return true;
}

Trainer::Trainer(ModelSpec spec, TrainConfig config)
    : spec_(std::move(spec)),
      config_(config),
      shuffle_rng_(Rng::stream(config.seed, "train.shuffle")),
      dropout_rng_(Rng::stream(config.seed, "train.dropout")) {
  config_.validate();
  spec_.mode = config_.mode;
}

EpochStats Trainer::train_epoch_classification(ParamStore& params,
                                               const std::vector<Example>& train, int epoch) {
  if (train.empty()) throw DataError("classification epoch on an empty training set");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_rng_.shuffle(std::span<std::size_t>(order));

  Rng* dropout = spec_.encoder.dropout_rate > 0 ? &dropout_rng_ : nullptr;
  const auto batch = static_cast<std::size_t>(config_.batch_size);
  EpochStats stats;
  double weighted_loss = 0;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const std::size_t end = std::min(order.size(), begin + batch);
    std::vector<const Example*> members;
    for (std::size_t i = begin; i < end; ++i) members.push_back(&train[order[i]]);

    ad::Tape<double> tape;
    std::vector<ad::Var<double>> losses;
    for (const Example* ex : members) {
      const auto z = logits(tape, params, spec_, *ex, dropout);
      Index arg = 0;
      z.value().row(0).maxCoeff(&arg);
      correct += arg == ex->label ? 1 : 0;
      losses.push_back(ad::cross_entropy(z, ex->label));
    }
    const auto loss = ad::mean(std::span<const ad::Var<double>>(losses));
    require_finite(loss.scalar(), "classification loss at epoch " + std::to_string(epoch));
    tape.backward(loss);
    const double lr = warmup_lr(cls_state_.step + 1, total_steps_, config_.warmup_ratio,
                                config_.learning_rate);
    adamw_step(params, tape.gradients(), cls_state_, lr,
               AdamWOptions{.weight_decay = config_.weight_decay});
    log_.events.push_back({epoch, TrainEvent::Kind::kBatch, ++tick_});
    weighted_loss += loss.scalar() * static_cast<double>(members.size());
    stats.steps += 1;
  }
  stats.loss = weighted_loss / static_cast<double>(train.size());
  stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
  return stats;
}

EpochStats Trainer::train_epoch_calibration(ParamStore& params, const std::vector<Example>& train,
                                            int epoch) {
  EpochStats stats;
  if (!spec_.uses_features()) throw ModeError("calibration requires fpt mode");
  // Classes present in the training data, in ascending order.
  std::map<int, int> remap;
  for (const auto& ex : train) remap.emplace(ex.label, 0);
  if (remap.size() < 2) {
    log_.warnings.push_back("epoch " + std::to_string(epoch) +
                            ": calibration skipped, fewer than two classes");
    stats.skipped = true;
    return stats;
  }
  int next = 0;
  for (auto& [label, idx] : remap) idx = next++;
  const bool raw_rank = config_.calibration_ranking == CalibrationRanking::kRaw;
  std::vector<RowVectorD> rows, rank_rows;
  std::vector<int> labels;
  for (const auto& ex : train) {
    rows.push_back(ex.features);
    if (raw_rank) {
      if (ex.raw_features.size() != ex.features.size()) {
        throw DataError("example '" + ex.id + "' has no raw features for the calibration ranking");
      }
      rank_rows.push_back(ex.raw_features);
    }
    labels.push_back(remap.at(ex.label));
  }
  const auto sets = calibration::ClassFeatureSet::group(rows, labels, next);
  const auto order = calibration::ranking_order(calibration::similarity_matrix(
      raw_rank ? calibration::ClassFeatureSet::group(rank_rows, labels, next) : sets));

  for (int s = 0; s < config_.calibration_steps; ++s) {
    ad::Tape<double> tape;
    const auto loss = calibration::calibration_loss(tape, sets, order, spec_.mlp, params);
    require_finite(loss.scalar(), "calibration loss at epoch " + std::to_string(epoch));
    if (s == 0) stats.loss = loss.scalar();
    tape.backward(loss);
    GradientMap grads;
    for (auto& [name, g] : tape.gradients()) {
      if (name.rfind("mlp.", 0) == 0) grads.emplace(name, std::move(g));
    }
    adamw_step(params, grads, cal_state_, config_.effective_calibration_lr(),
               AdamWOptions{.weight_decay = config_.weight_decay});
    log_.events.push_back({epoch, TrainEvent::Kind::kCalibration, ++tick_});
    stats.steps += 1;
  }
  return stats;
}

TrainResult Trainer::train(ParamStore params, const std::vector<Example>& train,
                           const std::vector<Example>& dev) {
  log_ = TrainLog{};
  TrainResult result{params, {}};
  if (config_.epochs == 0) {
    result.log = log_;
    return result;
  }
  const auto batches = static_cast<std::int64_t>(
      (train.size() + static_cast<std::size_t>(config_.batch_size) - 1) /
      static_cast<std::size_t>(config_.batch_size));
  total_steps_ = batches * config_.epochs;

  std::vector<int> dev_labels;
  for (const auto& ex : dev) dev_labels.push_back(ex.label);
  double best_acc = -1;

  for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
    TrainLog::Entry entry;
    entry.epoch = epoch;
    entry.cls_loss = train_epoch_classification(params, train, epoch).loss;
    if (config_.calibrates()) {
      const EpochStats cal = train_epoch_calibration(params, train, epoch);
      if (!cal.skipped) entry.cal_loss = cal.loss;
    }
    entry.dev_acc = dev.empty() ? 0.0 : harness::accuracy(predict_all(params, spec_, dev), dev_labels);
    log_.entries.push_back(entry);
    const bool better = dev.empty() ? true : entry.dev_acc > best_acc;
    if (better) {
      best_acc = entry.dev_acc;
      result.best = params;
      log_.best_epoch = epoch;
    }
  }
  result.log = log_;
  return result;
}

}  // namespace fpt::trainer
