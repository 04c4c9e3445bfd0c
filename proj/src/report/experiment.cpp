#include "tlunet/report/experiment.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "tlunet/error.hpp"
#include "tlunet/io.hpp"
#include "tlunet/model/archive.hpp"
#include "tlunet/report/compare.hpp"
#include "tlunet/report/plot_data.hpp"

namespace tlunet::report {

namespace fs = std::filesystem;

namespace {

fs::path under_root(const fs::path& root, const fs::path& p) {
  return p.is_absolute() ? p : root / p;
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw IoError(what + " not found: " + p.string());
}

}  // namespace

fs::path ExperimentConfig::annotations_path() const { return under_root(data_root, annotations); }
fs::path ExperimentConfig::images_path() const { return under_root(data_root, images); }

void ExperimentConfig::validate() const {
  if (label.empty() || label.find_first_of("/\\") != std::string::npos || label == "." || label == "..") {
    throw ValidationError("label must be a plain, non-empty directory name");
  }
  if (!(data_fraction > 0.0 && data_fraction <= 1.0)) {
    throw ValidationError("data_fraction must lie in (0, 1]");
  }
  model.validate();
  train.validate();
  loss.validate();
}

KeyValues ExperimentConfig::to_kv() const {
  KeyValues kv = model.to_kv();
  kv.set("data_root", data_root.string());
  kv.set("annotations", annotations.string());
  kv.set("images", images.string());
  kv.set("output_dir", output_dir.string());
  kv.set("label", label);
  kv.set("data_fraction", format_real(data_fraction, 6));
  kv.set("split_seed", std::to_string(split_seed));
  kv.set("batch_size", std::to_string(train.batch_size));
  kv.set("learning_rate", format_real(train.learning_rate, 10));
  kv.set("beta1", format_real(train.beta1, 10));
  kv.set("beta2", format_real(train.beta2, 10));
  kv.set("max_epochs", std::to_string(train.max_epochs));
  kv.set("early_stop", train::to_string(train.early_stop_metric));
  kv.set("patience", std::to_string(train.patience));
  kv.set("train_seed", std::to_string(train.seed));
  kv.set("lambda_cls", format_real(loss.lambda_cls, 10));
  kv.set("lambda_seg", format_real(loss.lambda_seg, 10));
  kv.set("pixel_reduction", objective::to_string(loss.pixel_reduction));
  return kv;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValues& kv) {
  ExperimentConfig cfg;
  cfg.data_root = kv.get_string("data_root", cfg.data_root.string());
  cfg.annotations = kv.get_string("annotations", cfg.annotations.string());
  cfg.images = kv.get_string("images", cfg.images.string());
  cfg.output_dir = kv.get_string("output_dir", cfg.output_dir.string());
  cfg.label = kv.get_string("label", cfg.label);
  cfg.data_fraction = kv.get_real("data_fraction", cfg.data_fraction);
  cfg.split_seed = kv.get_u64("split_seed", cfg.split_seed);
  cfg.model = model::ModelConfig::from_kv(kv);
  cfg.train.batch_size = kv.get_int("batch_size", cfg.train.batch_size);
  cfg.train.learning_rate = kv.get_real("learning_rate", cfg.train.learning_rate);
  cfg.train.beta1 = kv.get_real("beta1", cfg.train.beta1);
  cfg.train.beta2 = kv.get_real("beta2", cfg.train.beta2);
  cfg.train.max_epochs = kv.get_int("max_epochs", cfg.train.max_epochs);
  cfg.train.early_stop_metric =
      train::parse_stop_metric(kv.get_string("early_stop", train::to_string(cfg.train.early_stop_metric)));
  cfg.train.patience = kv.get_int("patience", cfg.train.patience);
  cfg.train.seed = kv.get_u64("train_seed", cfg.train.seed);
  cfg.loss.lambda_cls = kv.get_real("lambda_cls", cfg.loss.lambda_cls);
  cfg.loss.lambda_seg = kv.get_real("lambda_seg", cfg.loss.lambda_seg);
  cfg.loss.pixel_reduction =
      objective::parse_pixel_reduction(kv.get_string("pixel_reduction", objective::to_string(cfg.loss.pixel_reduction)));
  if (const auto unused = kv.unused_keys(); !unused.empty()) {
    throw ValidationError("unknown config key(s): " + fmt::format("{}", fmt::join(unused, ", ")));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  auto cfg = from_kv(KeyValues::load(path));
  if (const char* root = std::getenv(kDataRootEnv); root != nullptr && *root != '\0') {
    cfg.data_root = root;
  }
  return cfg;
}

ExperimentConfig with_overrides(const ExperimentConfig& base, const std::vector<std::string>& assignments) {
  KeyValues kv = base.to_kv();
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override must be key=value: " + a);
    kv.set(a.substr(0, eq), a.substr(eq + 1));
  }
  return ExperimentConfig::from_kv(kv);
}

PreparedData prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  require_exists(cfg.annotations_path(), "annotation file");
  require_exists(cfg.images_path(), "image directory");
  if (cfg.model.init == model::InitMode::kPretrained) {
    require_exists(*cfg.model.pretrained_source, "pretrained encoder archive");
  }
  PreparedData out;
  out.dataset = data::load_dataset(cfg.annotations_path(), cfg.images_path(), cfg.model.num_classes);
  if (out.dataset.size() == 0) throw ValidationError("no images in " + cfg.images_path().string());
  for (const auto& rec : out.dataset.records()) {
    if (rec.pixels.height != cfg.model.height || rec.pixels.width != cfg.model.width) {
      throw ValidationError(fmt::format("image {} is {}x{} but the model expects {}x{}", rec.image_id,
                                        rec.pixels.height, rec.pixels.width, cfg.model.height,
                                        cfg.model.width));
    }
  }
  const auto ids = out.dataset.ids();
  out.split = data::build_splits(ids, cfg.split_seed);
  if (cfg.data_fraction < 1.0) out.split = data::subsample_training(out.split, cfg.data_fraction);
  std::vector<const data::Image*> images;
  for (const auto& id : out.split.train) images.push_back(&out.dataset.get(id).pixels);
  out.norm = data::compute_norm_stats(images);
  return out;
}

void write_prepared(const ExperimentConfig& cfg, const PreparedData& data) {
  const fs::path dir = cfg.run_dir();
  write_text_file(dir / "config.txt", cfg.to_kv().str());
  data::write_split_manifest(dir / "split.txt", data.split);
  data::write_norm_stats(dir / "norm_stats.txt", data.norm);
}

namespace {

std::string format_timing_csv(const train::TrainingHistory& h) {
  std::string out = "epoch,seconds\n";
  for (const auto& e : h.epochs) out += fmt::format("{},{}\n", e.epoch, format_real(e.seconds, 3));
  return out;
}

int best_epoch_of(const train::TrainingHistory& h, train::StopMetric metric) {
  int best = 0;
  double best_score = 0;
  for (const auto& e : h.epochs) {
    const double s = metric == train::StopMetric::kValLoss ? -e.val_loss : e.val_dice;
    if (best == 0 || s > best_score) {
      best = e.epoch;
      best_score = s;
    }
  }
  return best;
}

void require_clean(const fs::path& dir) {
  if (fs::exists(dir) && !(fs::is_directory(dir) && fs::is_empty(dir))) {
    throw ValidationError("run directory " + dir.string() +
                          " already has content; resuming a partial run is not supported");
  }
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg, const train::TrainHooks& hooks) {
  cfg.validate();
  const fs::path dir = cfg.run_dir();
  require_clean(dir);
  const PreparedData data = prepare(cfg);
  write_prepared(cfg, data);

  auto net = model::build_model(cfg.model);
  if (cfg.model.init == model::InitMode::kPretrained) {
    const auto manifest = model::load_pretrained(*net, *cfg.model.pretrained_source);
    std::string text;
    for (const auto& n : manifest.loaded) text += "loaded\t" + n + "\n";
    for (const auto& n : manifest.skipped) text += "skipped\t" + n + "\n";
    write_text_file(dir / "pretrained_load.txt", text);
  }

  RunArtifacts art;
  art.label = cfg.label;
  art.network = model::to_string(cfg.model.encoder);
  art.init = model::to_string(cfg.model.init);
  art.fraction = cfg.data_fraction;
  art.history = train::train(*net, data.dataset, data.split, data.norm, cfg.train, cfg.loss, hooks);
  model::save_checkpoint(dir / "checkpoint", *net);
  write_text_file(dir / "history.csv", train::format_history_csv(art.history));
  write_text_file(dir / "timing.csv", format_timing_csv(art.history));

  const auto evaluated = train::evaluate(*net, data.dataset, data.split.test, data.norm, cfg.loss, cfg.train.batch_size);
  // Everything downstream is derived from the persisted rows, so it can be
  // regenerated from per_image.csv alone.
  art.report = metrics::parse_report_csv(metrics::format_report_csv(evaluated));
  art.report.mean_loss = evaluated.mean_loss;
  metrics::write_report(dir, art.report);
  emit_plot_data(dir, std::span(&art, 1));
  return art;
}

RunArtifacts load_run(const fs::path& run_dir) {
  const auto cfg = ExperimentConfig::from_kv(KeyValues::load(run_dir / "config.txt"));
  RunArtifacts art;
  art.label = cfg.label;
  art.network = model::to_string(cfg.model.encoder);
  art.init = model::to_string(cfg.model.init);
  art.fraction = cfg.data_fraction;
  art.history = train::parse_history_csv(read_text_file(run_dir / "history.csv"));
  art.history.best_epoch = best_epoch_of(art.history, cfg.train.early_stop_metric);
  art.report = metrics::parse_report_csv(read_text_file(run_dir / "per_image.csv"));
  return art;
}

metrics::MetricReport evaluate_run(const fs::path& run_dir, const std::string& subset) {
  const auto cfg = ExperimentConfig::load(run_dir / "config.txt");
  const auto split = data::read_split_manifest(run_dir / "split.txt");
  const std::vector<std::string>* ids = nullptr;
  if (subset == "train") ids = &split.train;
  if (subset == "val") ids = &split.val;
  if (subset == "test") ids = &split.test;
  if (ids == nullptr) throw ValidationError("subset must be train, val or test");
  const auto norm = data::read_norm_stats(run_dir / "norm_stats.txt");
  require_exists(cfg.annotations_path(), "annotation file");
  require_exists(cfg.images_path(), "image directory");
  const auto dataset = data::load_dataset(cfg.annotations_path(), cfg.images_path(), cfg.model.num_classes);
  auto net = model::load_checkpoint(run_dir / "checkpoint");
  return train::evaluate(*net, dataset, *ids, norm, cfg.loss, cfg.train.batch_size);
}

std::vector<RunArtifacts> run_grid(const ExperimentConfig& base, const GridOptions& options,
                                   const train::TrainHooks& hooks) {
  const fs::path summary = base.output_dir / (base.label + "_summary");
  require_clean(summary);
  std::vector<RunArtifacts> runs;
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> pairs;
  for (const auto family : {model::EncoderFamily::kResNet, model::EncoderFamily::kDenseNet}) {
    const auto& archive = family == model::EncoderFamily::kResNet ? options.resnet_pretrained
                                                                   : options.densenet_pretrained;
    std::size_t random_index = 0;
    for (const auto init : {model::InitMode::kRandom, model::InitMode::kPretrained}) {
      if (init == model::InitMode::kPretrained && !archive) continue;
      ExperimentConfig cfg = base;
      cfg.model.encoder = family;
      cfg.model.init = init;
      cfg.model.pretrained_source.reset();
      if (init == model::InitMode::kPretrained) cfg.model.pretrained_source = *archive;
      cfg.label = base.label + "_" + model::to_string(family) + "_" + model::to_string(init);
      runs.push_back(run_experiment(cfg, hooks));
      if (init == model::InitMode::kRandom) {
        random_index = runs.size() - 1;
      } else {
        pairs.push_back({model::to_string(family), {runs.size() - 1, random_index}});
      }
    }
  }
  emit_plot_data(summary, runs);
  for (const auto& [family, idx] : pairs) {
    const auto& a = runs[idx.first];
    const auto& b = runs[idx.second];
    write_comparison(summary / ("compare_" + family), compare(a.report, b.report), a.label, b.label);
  }
  return runs;
}

}  // namespace tlunet::report
