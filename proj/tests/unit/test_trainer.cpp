#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "fpt/trainer/adamw.hpp"
#include "fpt/trainer/trainer.hpp"
#include "support/grad_cases.hpp"

using namespace fpt;
using namespace fpt::trainer;
using encoder::PromptMode;
using fpt::testing::random_examples;
using fpt::testing::random_tensor;
using fpt::testing::tiny_spec;

namespace {

bool bitwise_equal(const TensorD& a, const TensorD& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

bool bitwise_equal(const ParamStore& a, const ParamStore& b, const std::string& skip_prefix = "") {
  if (a.names() != b.names()) return false;
  for (const auto& n : a.names()) {
    if (!skip_prefix.empty() && n.rfind(skip_prefix, 0) == 0) continue;
    if (!bitwise_equal(a.at(n), b.at(n))) return false;
  }
  return true;
}

TrainConfig quick_config(PromptMode mode, int epochs = 2) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 3;
  c.seed = 11;
  c.mode = mode;
  return c;
}

}  // namespace

TEST(AdamW, ZeroGradientZeroDecayLeavesParameters) {
  Rng rng(1);
  ParamStore p;
  p.add("w", random_tensor(rng, 3, 4));
  const ParamStore before = p;
  AdamWState state;
  GradientMap g{{"w", TensorD::Zero(3, 4)}};
  for (int i = 0; i < 5; ++i) adamw_step(p, g, state, 0.1, {.weight_decay = 0.0});
  EXPECT_TRUE(bitwise_equal(p, before));
}

TEST(AdamW, DecoupledDecayClosedForm) {
  Rng rng(2);
  ParamStore p;
  const TensorD w0 = random_tensor(rng, 2, 3);
  p.add("w", w0);
  AdamWState state;
  GradientMap g{{"w", TensorD::Zero(2, 3)}};
  const double lr = 0.05, wd = 0.1;
  for (int i = 0; i < 7; ++i) adamw_step(p, g, state, lr, {.weight_decay = wd});
  EXPECT_LT((p.at("w") - w0 * std::pow(1 - lr * wd, 7)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  ParamStore p;
  p.add("w", TensorD::Zero(1, 3));
  AdamWState state;
  TensorD g(1, 3);
  g << 2.0, -0.5, 1e-3;
  adamw_step(p, {{"w", g}}, state, 0.01, {.weight_decay = 0.0});
  // bias-corrected moments give m/sqrt(v) = sign(g) on the first step
  EXPECT_NEAR(p.at("w")(0, 0), -0.01, 1e-9);
  EXPECT_NEAR(p.at("w")(0, 1), 0.01, 1e-9);
  EXPECT_NEAR(p.at("w")(0, 2), -0.01, 1e-7);
  EXPECT_EQ(state.step, 1);
}

TEST(AdamW, OnlyTensorsWithGradientsMove) {
  Rng rng(3);
  ParamStore p;
  p.add("a", random_tensor(rng, 2, 2));
  p.add("b", random_tensor(rng, 2, 2));
  const TensorD b0 = p.at("b");
  AdamWState state;
  adamw_step(p, {{"a", TensorD::Ones(2, 2)}}, state, 0.1);
  EXPECT_TRUE(bitwise_equal(p.at("b"), b0));
}

TEST(AdamW, NonFiniteGradientIsTrainingError) {
  ParamStore p;
  p.add("w", TensorD::Zero(1, 2));
  TensorD g(1, 2);
  g << 1.0, std::nan("");
  AdamWState state;
  try {
    adamw_step(p, {{"w", g}}, state, 0.1);
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("w"), std::string::npos);
  }
}

TEST(Warmup, Schedule) {
  EXPECT_DOUBLE_EQ(warmup_lr(5, 100, 0.05, 2e-3), 2e-3);
  EXPECT_DOUBLE_EQ(warmup_lr(1, 100, 0.05, 2e-3), 2e-3 / 5);
  EXPECT_DOUBLE_EQ(warmup_lr(3, 100, 0.05, 2e-3), 2e-3 * 3 / 5);
  EXPECT_DOUBLE_EQ(warmup_lr(80, 100, 0.05, 2e-3), 2e-3);
  EXPECT_DOUBLE_EQ(warmup_lr(1, 100, 0.0, 2e-3), 2e-3);
  // ceil(0.05 * 30) = 2
  EXPECT_DOUBLE_EQ(warmup_lr(1, 30, 0.05, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(warmup_lr(2, 30, 0.05, 1.0), 1.0);
}

TEST(TrainConfig, ValidationAndJson) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.warmup_ratio = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.calibration_learning_rate = 5e-4;
  c.epochs = 7;
  nlohmann::json j;
  c.to_json(j);
  TrainConfig back;
  back.update_from_json(j);
  nlohmann::json j2;
  back.to_json(j2);
  EXPECT_EQ(j, j2);
  EXPECT_EQ(back.epochs, 7);
  TrainConfig shared;
  EXPECT_DOUBLE_EQ(shared.effective_calibration_lr(), shared.learning_rate);
}

TEST(Trainer, ZeroEpochsReturnsInitialization) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  const auto init = spec.init_params(4);
  Rng rng(4);
  const auto data = random_examples(rng, spec, 6);
  Trainer t(spec, quick_config(PromptMode::kFPT, 0));
  const auto r = t.train(init, data, data);
  EXPECT_TRUE(bitwise_equal(r.best, init));
  EXPECT_TRUE(r.log.entries.empty());
  EXPECT_TRUE(r.log.events.empty());
  EXPECT_EQ(r.log.best_epoch, 0);
}

TEST(Trainer, EpochDeterminism) {
  const auto spec = tiny_spec(PromptMode::kHBP);
  Rng rng(5);
  const auto data = random_examples(rng, spec, 7);
  ParamStore a = spec.init_params(6);
  ParamStore b = spec.init_params(6);
  Trainer ta(spec, quick_config(PromptMode::kHBP));
  Trainer tb(spec, quick_config(PromptMode::kHBP));
  ta.set_total_steps(6);
  tb.set_total_steps(6);
  const auto sa = ta.train_epoch_classification(a, data);
  const auto sb = tb.train_epoch_classification(b, data);
  EXPECT_TRUE(bitwise_equal(a, b));
  EXPECT_EQ(sa.loss, sb.loss);
  // 7 examples in batches of 3: the partial batch is kept
  EXPECT_EQ(sa.steps, 3);
  EXPECT_FALSE(bitwise_equal(a, spec.init_params(6)));
}

TEST(Trainer, CalibrationTouchesOnlyMlp) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  Rng rng(7);
  const auto data = random_examples(rng, spec, 9);
  ParamStore p = spec.init_params(8);
  const ParamStore before = p;
  Trainer t(spec, quick_config(PromptMode::kFPT));
  const auto stats = t.train_epoch_calibration(p, data);
  EXPECT_FALSE(stats.skipped);
  EXPECT_TRUE(bitwise_equal(p, before, "mlp."));
  EXPECT_FALSE(bitwise_equal(p, before));
  for (const auto& n : p.names()) {
    if (n.rfind("mlp.", 0) != 0) EXPECT_TRUE(bitwise_equal(p.at(n), before.at(n))) << n;
  }
}

TEST(Trainer, CalibrationLossDecreases) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  Rng rng(9);
  auto data = random_examples(rng, spec, 12);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].label = static_cast<int>(i % 3);
  ParamStore p = spec.init_params(10);
  auto cfg = quick_config(PromptMode::kFPT);
  cfg.calibration_learning_rate = 1e-3;
  cfg.weight_decay = 0.0;
  Trainer t(spec, cfg);
  double previous = t.train_epoch_calibration(p, data).loss;
  for (int step = 0; step < 50; ++step) {
    const double loss = t.train_epoch_calibration(p, data).loss;
    EXPECT_LT(loss, previous) << "step " << step;
    previous = loss;
  }
}

TEST(Trainer, CalibrationSkippedWithOneClass) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  Rng rng(10);
  auto data = random_examples(rng, spec, 4);
  for (auto& ex : data) ex.label = 1;
  ParamStore p = spec.init_params(1);
  Trainer t(spec, quick_config(PromptMode::kFPT));
  EXPECT_TRUE(t.train_epoch_calibration(p, data).skipped);
  EXPECT_EQ(t.log().warnings.size(), 1u);
}

TEST(Trainer, CalibrationRequiresFeatureMode) {
  const auto spec = tiny_spec(PromptMode::kHP);
  Rng rng(11);
  const auto data = random_examples(rng, spec, 4);
  ParamStore p = spec.init_params(1);
  Trainer t(spec, quick_config(PromptMode::kHP));
  EXPECT_THROW(t.train_epoch_calibration(p, data), ModeError);
}

TEST(Trainer, AlternationOrderAndLog) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  Rng rng(12);
  auto train = random_examples(rng, spec, 9);
  for (std::size_t i = 0; i < train.size(); ++i) train[i].label = static_cast<int>(i % 3);
  const auto dev = random_examples(rng, spec, 6);
  Trainer t(spec, quick_config(PromptMode::kFPT, 3));
  const auto r = t.train(spec.init_params(13), train, dev);
  ASSERT_EQ(r.log.entries.size(), 3u);
  EXPECT_TRUE(r.log.calibration_follows_batches());
  int cal = 0;
  for (std::size_t i = 0; i < r.log.events.size(); ++i) {
    if (i > 0) EXPECT_GT(r.log.events[i].tick, r.log.events[i - 1].tick);
    cal += r.log.events[i].kind == TrainEvent::Kind::kCalibration;
  }
  EXPECT_EQ(cal, 3);
  for (const auto& e : r.log.entries) EXPECT_TRUE(e.cal_loss.has_value());
  const std::string csv = r.log.to_csv();
  EXPECT_EQ(csv.rfind("epoch,cls_loss,cal_loss,dev_acc\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);

  // best epoch is the earliest maximum of dev accuracy
  int best = 1;
  for (const auto& e : r.log.entries) {
    if (e.dev_acc > r.log.entries[static_cast<std::size_t>(best - 1)].dev_acc) best = e.epoch;
  }
  EXPECT_EQ(r.log.best_epoch, best);
}

TEST(Trainer, OrderCheckDetectsViolation) {
  TrainLog log;
  log.events = {{1, TrainEvent::Kind::kBatch, 1}, {1, TrainEvent::Kind::kCalibration, 2},
                {2, TrainEvent::Kind::kCalibration, 3}, {2, TrainEvent::Kind::kBatch, 4}};
  EXPECT_FALSE(log.calibration_follows_batches());
  log.events.pop_back();
  EXPECT_TRUE(log.calibration_follows_batches());
}

TEST(Trainer, DisabledCalibrationLeavesNoEntries) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  Rng rng(14);
  const auto data = random_examples(rng, spec, 6);
  auto cfg = quick_config(PromptMode::kFPT, 2);
  cfg.calibration_enabled = false;
  const auto r = Trainer(spec, cfg).train(spec.init_params(2), data, data);
  for (const auto& e : r.log.events) EXPECT_EQ(e.kind, TrainEvent::Kind::kBatch);
  for (const auto& e : r.log.entries) EXPECT_FALSE(e.cal_loss.has_value());
  EXPECT_NE(r.log.to_csv().find(",,"), std::string::npos);
}

TEST(Trainer, FullRunDeterminism) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  Rng rng(15);
  const auto data = random_examples(rng, spec, 6);
  const auto a = Trainer(spec, quick_config(PromptMode::kFPT)).train(spec.init_params(3), data, data);
  const auto b = Trainer(spec, quick_config(PromptMode::kFPT)).train(spec.init_params(3), data, data);
  EXPECT_TRUE(bitwise_equal(a.best, b.best));
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
}

TEST(Trainer, FineTuningIgnoresTemplatesAndSoftPrompts) {
  auto spec = tiny_spec(PromptMode::kFT);
  Rng rng(16);
  const auto data = random_examples(rng, spec, 6);
  const auto init = spec.init_params(4);
  EXPECT_FALSE(init.contains("prompt.soft"));
  EXPECT_TRUE(init.names_with_prefix("mlp.").empty());
  const auto a = Trainer(spec, quick_config(PromptMode::kFT)).train(init, data, data);
  spec.tmpl.with_mask = {9, encoder::kMaskId};
  spec.tmpl.without_mask = {9};
  spec.tmpl.mask_index = 1;
  spec.encoder.l_soft_tokens = 3;
  const auto b = Trainer(spec, quick_config(PromptMode::kFT)).train(init, data, data);
  EXPECT_TRUE(bitwise_equal(a.best, b.best));
  // the verbalizer is unused in FT; the fc head carries the gradient
  EXPECT_TRUE(bitwise_equal(a.best.at("verbalizer.weight"), init.at("verbalizer.weight")));
  EXPECT_FALSE(bitwise_equal(a.best.at("fc.weight"), init.at("fc.weight")));
}

TEST(Predict, ArgmaxOfLogits) {
  const auto spec = tiny_spec(PromptMode::kSP);
  const auto p = spec.init_params(5);
  Rng rng(17);
  const auto data = random_examples(rng, spec, 5);
  const auto preds = predict_all(p, spec, data);
  ASSERT_EQ(preds.size(), 5u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    Index arg;
    predict_logits(p, spec, data[i]).maxCoeff(&arg);
    EXPECT_EQ(preds[i], static_cast<int>(arg));
  }
}

TEST(Trainer, RawCalibrationRanking) {
  const auto spec = tiny_spec(PromptMode::kFPT);
  Rng rng(18);
  auto data = random_examples(rng, spec, 9);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].label = static_cast<int>(i % 3);
  auto cfg = quick_config(PromptMode::kFPT);
  cfg.calibration_ranking = CalibrationRanking::kRaw;
  ParamStore p = spec.init_params(6);
  EXPECT_THROW(Trainer(spec, cfg).train_epoch_calibration(p, data), DataError);

  // Raw values equal to the normalized ones reproduce the default ranking.
  for (auto& ex : data) ex.raw_features = ex.features;
  ParamStore a = spec.init_params(6), b = spec.init_params(6);
  const double raw_loss = Trainer(spec, cfg).train_epoch_calibration(a, data).loss;
  const double norm_loss = Trainer(spec, quick_config(PromptMode::kFPT)).train_epoch_calibration(b, data).loss;
  EXPECT_EQ(raw_loss, norm_loss);
  EXPECT_TRUE(bitwise_equal(a, b));

  EXPECT_EQ(parse_calibration_ranking("raw"), CalibrationRanking::kRaw);
  EXPECT_THROW(parse_calibration_ranking("sorted"), ConfigError);
  nlohmann::json j;
  cfg.to_json(j);
  EXPECT_EQ(j["calibration_ranking"], "raw");
}
