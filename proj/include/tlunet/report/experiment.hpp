#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tlunet/data/dataset.hpp"
#include "tlunet/data/normalize.hpp"
#include "tlunet/data/split.hpp"
#include "tlunet/kv.hpp"
#include "tlunet/metrics/metrics.hpp"
#include "tlunet/model/config.hpp"
#include "tlunet/objective/loss.hpp"
#include "tlunet/train/trainer.hpp"

namespace tlunet::report {

/// Environment variable that replaces `data_root` when set.
inline constexpr const char* kDataRootEnv = "TLUNET_DATA_ROOT";

/// One experiment: data location, model, optimizer, loss, training-data
/// fraction and where the artifacts go (`output_dir / label`).
///
/// Config keys (flat `key = value`):
///   data_root, annotations (train.csv), images (images), output_dir, label,
///   data_fraction, split_seed,
///   encoder, init, pretrained, stages, classes, height, width,
///   encoder_width, decoder_channels, init_seed,
///   batch_size, learning_rate, beta1, beta2, max_epochs, early_stop,
///   patience, train_seed,
///   lambda_cls, lambda_seg, pixel_reduction
struct ExperimentConfig {
  std::filesystem::path data_root = ".";
  std::filesystem::path annotations = "train.csv";
  std::filesystem::path images = "images";
  std::filesystem::path output_dir = "runs";
  std::string label = "experiment";
  double data_fraction = 1.0;
  std::uint64_t split_seed = 0;
  model::ModelConfig model;
  train::TrainConfig train;
  objective::LossConfig loss;

  std::filesystem::path annotations_path() const;
  std::filesystem::path images_path() const;
  std::filesystem::path run_dir() const { return output_dir / label; }

  void validate() const;
  KeyValues to_kv() const;
  /// Unknown keys are a validation error.
  static ExperimentConfig from_kv(const KeyValues& kv);
  /// Reads a config file and applies the data-root environment override.
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Applies `key=value` overrides on top of a config's key-value form.
ExperimentConfig with_overrides(const ExperimentConfig& base,
                                const std::vector<std::string>& assignments);

/// Dataset, split (after training-data subsampling) and training-set
/// normalization statistics.
struct PreparedData {
  data::Dataset dataset;
  data::DatasetSplit split;
  data::NormStats norm;
};

/// Checks that every referenced path exists (IO error otherwise) and that
/// image sizes match the model config.
PreparedData prepare(const ExperimentConfig& cfg);
/// Writes config.txt, split.txt and norm_stats.txt into the run directory.
void write_prepared(const ExperimentConfig& cfg, const PreparedData& data);

struct RunArtifacts {
  std::string label;
  std::string network;
  std::string init;
  double fraction = 1.0;
  train::TrainingHistory history;
  metrics::MetricReport report;
};

/// Run directory layout:
///   config.txt, split.txt, norm_stats.txt, checkpoint/, history.csv,
///   timing.csv, per_image.csv, summary.json, box_stats.csv, roc.csv,
///   convergence.csv
/// Everything except timing.csv is byte-identical across reruns.
/// The run directory must be absent or empty.
RunArtifacts run_experiment(const ExperimentConfig& cfg, const train::TrainHooks& hooks = {});

/// Reads a finished run directory back (no inference).
RunArtifacts load_run(const std::filesystem::path& run_dir);

/// Re-evaluates a run's checkpoint on one of its split subsets
/// ("train", "val" or "test").
metrics::MetricReport evaluate_run(const std::filesystem::path& run_dir, const std::string& subset);

struct GridOptions {
  /// Encoder archives for the pretrained rows; a family without one is
  /// skipped for pretrained init.
  std::optional<std::filesystem::path> resnet_pretrained;
  std::optional<std::filesystem::path> densenet_pretrained;
};

/// {resnet, densenet} × {random, pretrained} with shared split and seeds.
/// Labels are `<base label>_<encoder>_<init>`. Writes, under
/// `output_dir/<base label>_summary`, grid-wide plot data and one
/// pretrained-vs-random comparison per encoder.
std::vector<RunArtifacts> run_grid(const ExperimentConfig& base, const GridOptions& options,
                                   const train::TrainHooks& hooks = {});

}  // namespace tlunet::report
