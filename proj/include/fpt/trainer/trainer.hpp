#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpt/trainer/adamw.hpp"
#include "fpt/trainer/model.hpp"

namespace fpt::trainer {

/// Which feature values order the raw class similarities for calibration.
enum class CalibrationRanking { kNormalized, kRaw };

CalibrationRanking parse_calibration_ranking(const std::string& name);
std::string calibration_ranking_name(CalibrationRanking r);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double warmup_ratio = 0.05;
  /// Non-positive means "same as learning_rate".
  double calibration_learning_rate = 0.0;
  /// Calibration updates per epoch, each a full-set evaluation plus one step.
  int calibration_steps = 1;
  std::uint64_t seed = 0;
  encoder::PromptMode mode = encoder::PromptMode::kFPT;
  bool calibration_enabled = true;
  CalibrationRanking calibration_ranking = CalibrationRanking::kNormalized;

  double effective_calibration_lr() const {
    return calibration_learning_rate > 0 ? calibration_learning_rate : learning_rate;
  }
  bool calibrates() const { return calibration_enabled && mode == encoder::PromptMode::kFPT; }

  void validate() const;
  void to_json(nlohmann::json& j) const;
  void update_from_json(const nlohmann::json& j);
};

/// Logical clock entries recording the order of optimizer updates.
struct TrainEvent {
  enum class Kind { kBatch, kCalibration };
  int epoch = 0;
  Kind kind = Kind::kBatch;
  std::int64_t tick = 0;
};

struct EpochStats {
  double loss = 0.0;
  double train_accuracy = 0.0;
  int steps = 0;
  bool skipped = false;
};

struct TrainLog {
  struct Entry {
    int epoch = 0;
    double cls_loss = 0.0;
    std::optional<double> cal_loss;
    double dev_acc = 0.0;
  };
  std::vector<Entry> entries;
  std::vector<TrainEvent> events;
  std::vector<std::string> warnings;
  int best_epoch = 0;  // 0 = initialization (no epoch run)

  /// "epoch,cls_loss,cal_loss,dev_acc" header plus one line per epoch; the
  /// calibration field is empty when calibration did not run.
  std::string to_csv() const;

  /// True when, in every epoch, each calibration event follows all batch
  /// events of that epoch.
  bool calibration_follows_batches() const;
};

struct TrainResult {
  ParamStore best;
  TrainLog log;
};

/// Alternating training: per epoch, shuffled classification batches over all
/// trainable groups, then the calibration update of the feature MLP only,
/// then dev evaluation. The best-dev parameters (earliest on ties) are kept.
class Trainer {
 public:
  Trainer(ModelSpec spec, TrainConfig config);

  /// Runs one epoch of classification batches (the last partial batch is kept).
  EpochStats train_epoch_classification(ParamStore& params, const std::vector<Example>& train,
                                        int epoch = 1);

  /// Full-set calibration loss and a step on "mlp.*" tensors only.
  EpochStats train_epoch_calibration(ParamStore& params, const std::vector<Example>& train,
                                     int epoch = 1);

  TrainResult train(ParamStore params, const std::vector<Example>& train,
                    const std::vector<Example>& dev);

  const ModelSpec& spec() const { return spec_; }
  const TrainConfig& config() const { return config_; }
  const TrainLog& log() const { return log_; }

  /// Total classification steps used by the warmup schedule.
  void set_total_steps(std::int64_t steps) { total_steps_ = steps; }

 private:
  ModelSpec spec_;
  TrainConfig config_;
  AdamWState cls_state_;
  AdamWState cal_state_;
  Rng shuffle_rng_;
  Rng dropout_rng_;
  std::int64_t total_steps_ = 0;
  std::int64_t tick_ = 0;
  TrainLog log_;
};

}  // namespace fpt::trainer
