#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tlunet/data/dataset.hpp"
#include "tlunet/data/normalize.hpp"
#include "tlunet/data/rle.hpp"
#include "tlunet/data/split.hpp"
#include "tlunet/metrics/metrics.hpp"
#include "tlunet/model/unet.hpp"
#include "tlunet/objective/loss.hpp"
#include "tlunet/train/adam.hpp"

namespace tlunet::train {

enum class StopMetric { kValLoss, kValDice };
std::string to_string(StopMetric m);
StopMetric parse_stop_metric(const std::string& text);

struct TrainConfig {
  int batch_size = 16;
  double learning_rate = 5e-4;
  double beta1 = 0.99;
  double beta2 = 0.99;
  int max_epochs = 10;
  StopMetric early_stop_metric = StopMetric::kValLoss;
  int patience = 3;
  std::uint64_t seed = 0;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, 1e-8}; }
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0;  // mean per image
  double val_loss = 0;    // mean per image
  double val_dice = 0;
  double val_mla = 0;
  double seconds = 0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based
};

/// epoch,train_loss,val_loss,val_dice,val_mla (no timing, so reruns match).
std::string format_history_csv(const TrainingHistory& history);
TrainingHistory parse_history_csv(std::string_view text);

/// Normalized input batch plus targets for the given ids.
struct Batch {
  Tensor input;
  objective::Targets targets;
};

/// When `augment_seed` is set each record is flipped with a generator seeded
/// from (seed, image id), so augmentation does not depend on batch order.
Batch make_batch(const data::Dataset& dataset, std::span<const std::string> ids,
                 const data::NormStats& norm, const std::uint64_t* augment_seed = nullptr);

/// One optimizer step on a batch; returns the loss before the update.
objective::LossTerms train_step(model::UNet& model, const Batch& batch, AdamState& state,
                                const AdamConfig& adam, const objective::LossConfig& loss);

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Shuffled mini-batches with flip augmentation; validation after every
/// epoch; stops once the monitored metric has not improved for `patience`
/// epochs and restores the best epoch's weights.
TrainingHistory train(model::UNet& model, const data::Dataset& dataset,
                      const data::DatasetSplit& split, const data::NormStats& norm,
                      const TrainConfig& cfg, const objective::LossConfig& loss,
                      const TrainHooks& hooks = {});

/// Eval-mode forward per image, 0.5 threshold for masks and labels, all
/// metrics. `mean_loss` is the per-image joint loss.
metrics::MetricReport evaluate(model::UNet& model, const data::Dataset& dataset,
                               std::span<const std::string> ids, const data::NormStats& norm,
                               const objective::LossConfig& loss, int batch_size = 16);

struct PredictResult {
  model::Prediction prediction;  // batch of one
  data::MaskSet masks;
  std::vector<data::RleString> rle;
  std::vector<double> class_probs;
  std::vector<std::uint8_t> labels;  // class_prob >= 0.5
};

PredictResult predict(model::UNet& model, const data::Image& image, const data::NormStats& norm);
PredictResult predict(model::UNet& model, const std::filesystem::path& image_path,
                      const data::NormStats& norm);

}  // namespace tlunet::train
