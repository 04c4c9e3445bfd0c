#include "tlunet/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "tlunet/data/augment.hpp"
#include "tlunet/error.hpp"
#include "tlunet/io.hpp"

namespace tlunet::train {

std::string to_string(StopMetric m) { return m == StopMetric::kValLoss ? "val_loss" : "val_dice"; }

StopMetric parse_stop_metric(const std::string& text) {
  if (text == "val_loss") return StopMetric::kValLoss;
  if (text == "val_dice") return StopMetric::kValDice;
  throw ValidationError("unknown early-stop metric '" + text + "' (expected val_loss or val_dice)");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw ValidationError("learning rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (patience < 1) throw ValidationError("patience must be >= 1");
}

std::string format_history_csv(const TrainingHistory& history) {
  std::string out = "epoch,train_loss,val_loss,val_dice,val_mla\n";
  for (const auto& e : history.epochs) {
    out += fmt::format("{},{},{},{},{}\n", e.epoch, format_real(e.train_loss, 8),
                       format_real(e.val_loss, 8), format_real(e.val_dice, 8),
                       format_real(e.val_mla, 8));
  }
  return out;
}

TrainingHistory parse_history_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("epoch,train_loss")) {
    throw ParseError(1, "unexpected history header");
  }
  TrainingHistory h;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    EpochRecord e;
    char c1, c2, c3, c4;
    std::istringstream row(line);
    if (!(row >> e.epoch >> c1 >> e.train_loss >> c2 >> e.val_loss >> c3 >> e.val_dice >> c4 >> e.val_mla)) {
      throw ParseError(line_no, "malformed history row");
    }
    h.epochs.push_back(e);
  }
  return h;
}

Batch make_batch(const data::Dataset& dataset, std::span<const std::string> ids,
                 const data::NormStats& norm, const std::uint64_t* augment_seed) {
  if (ids.empty()) throw ValidationError("empty batch");
  const auto& first = dataset.get(ids.front());
  const int h = first.pixels.height;
  const int w = first.pixels.width;
  const int classes = dataset.classes();
  const int b = static_cast<int>(ids.size());
  Batch batch{Tensor(b, 3, h, w), {Tensor(b, classes, h, w), Tensor(b, classes, 1, 1)}};
  for (int i = 0; i < b; ++i) {
    const auto& rec = dataset.get(ids[i]);
    if (rec.pixels.height != h || rec.pixels.width != w) {
      throw ValidationError("image " + rec.image_id + " differs in size from the batch");
    }
    const data::Image* image = &rec.pixels;
    const data::MaskSet* masks = &rec.masks;
    data::AugmentedPair aug;
    if (augment_seed != nullptr) {
      Rng rng(mix_seed(*augment_seed, hash_string(rec.image_id)));
      aug = data::augment_pair(rec.pixels, rec.masks, rng);
      image = &aug.image;
      masks = &aug.masks;
    }
    data::normalize_into(*image, norm, batch.input, i);
    for (int m = 0; m < classes; ++m) {
      const auto src = masks->mask(m);
      double* dst = batch.targets.masks.plane(i, m);
      bool any = false;
      for (std::size_t p = 0; p < src.size(); ++p) {
        dst[p] = src[p];
        any = any || src[p] != 0;
      }
      batch.targets.labels.at(i, m, 0, 0) = any ? 1.0 : 0.0;
    }
  }
  return batch;
}

objective::LossTerms train_step(model::UNet& model, const Batch& batch, AdamState& state,
                                const AdamConfig& adam, const objective::LossConfig& loss) {
  model.set_training(true);
  model.zero_grad();
  auto out = model.forward(batch.input);
  objective::LossGradients grads;
  const auto terms = objective::joint_loss_from_logits(out.pixel_logits, out.class_logits,
                                                       batch.targets, loss, &grads);
  if (!std::isfinite(terms.total())) throw NumericError("non-finite training loss");
  model.backward(grads.pixel, grads.cls);
  auto params = model.parameters();
  adam_step(params, state, adam);
  return terms;
}

namespace {

std::vector<Tensor> snapshot(model::UNet& model) {
  std::vector<Tensor> out;
  for (const nn::Parameter* p : model.parameters()) out.push_back(p->value);
  return out;
}

void restore(model::UNet& model, const std::vector<Tensor>& saved) {
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = saved[i];
}

}  // namespace

TrainingHistory train(model::UNet& model, const data::Dataset& dataset,
                      const data::DatasetSplit& split, const data::NormStats& norm,
                      const TrainConfig& cfg, const objective::LossConfig& loss,
                      const TrainHooks& hooks) {
  cfg.validate();
  loss.validate();
  if (split.train.empty()) throw ValidationError("empty training split");
  if (split.val.empty()) throw ValidationError("early stopping needs a non-empty validation split");

  TrainingHistory history;
  AdamState state;
  const AdamConfig adam = cfg.adam();
  std::vector<Tensor> best_weights = snapshot(model);
  double best_score = 0;
  int stale = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::string> order = split.train;
    Rng shuffle_rng(mix_seed(cfg.seed, 0x5f00 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    const std::uint64_t augment_seed = mix_seed(cfg.seed, 0xa000 + static_cast<std::uint64_t>(epoch));

    double loss_sum = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const Batch batch = make_batch(dataset, std::span(order).subspan(begin, end - begin), norm,
                                     &augment_seed);
      loss_sum += train_step(model, batch, state, adam, loss).total();
    }

    const auto val = evaluate(model, dataset, split.val, norm, loss, cfg.batch_size);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_loss = val.mean_loss;
    rec.val_dice = val.mean_dice;
    rec.val_mla = val.mla;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);

    const double score = cfg.early_stop_metric == StopMetric::kValLoss ? -rec.val_loss : rec.val_dice;
    if (epoch == 1 || score > best_score) {
      best_score = score;
      history.best_epoch = epoch;
      best_weights = snapshot(model);
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  restore(model, best_weights);
  model.set_training(false);
  return history;
}

metrics::MetricReport evaluate(model::UNet& model, const data::Dataset& dataset,
                               std::span<const std::string> ids, const data::NormStats& norm,
                               const objective::LossConfig& loss, int batch_size) {
  if (ids.empty()) throw ValidationError("evaluation over zero images");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  const bool was_training = model.training();
  model.set_training(false);
  const int classes = model.config().num_classes;
  std::vector<metrics::ImageOutcome> outcomes;
  double loss_sum = 0;
  for (std::size_t begin = 0; begin < ids.size(); begin += batch_size) {
    const std::size_t end = std::min(ids.size(), begin + batch_size);
    const Batch batch = make_batch(dataset, ids.subspan(begin, end - begin), norm);
    const auto out = model.forward(batch.input);
    loss_sum += objective::joint_loss_from_logits(out.pixel_logits, out.class_logits,
                                                  batch.targets, loss)
                    .total();
    const auto pred = model::to_prediction(out);
    const Tensor masks = objective::threshold(pred.pixel_probs, 0.5);
    const std::size_t plane = masks.shape().plane();
    std::vector<std::uint8_t> p(plane);
    std::vector<std::uint8_t> t(plane);
    for (int i = 0; i < batch.input.n(); ++i) {
      const auto& rec = dataset.get(ids[begin + i]);
      metrics::ImageOutcome o;
      o.image_id = rec.image_id;
      for (int m = 0; m < classes; ++m) {
        const double* pm = masks.plane(i, m);
        for (std::size_t k = 0; k < plane; ++k) p[k] = pm[k] != 0.0;
        const auto truth = rec.masks.mask(m);
        std::copy(truth.begin(), truth.end(), t.begin());
        o.dice.push_back(metrics::dice(t, p));
        o.iou.push_back(metrics::iou(t, p));
        const double prob = pred.class_probs.at(i, m, 0, 0);
        o.class_probs.push_back(prob);
        o.pred_labels.push_back(prob >= 0.5 ? 1 : 0);
        o.true_labels.push_back(rec.labels[m]);
      }
      outcomes.push_back(std::move(o));
    }
  }
  auto report = metrics::summarize(std::move(outcomes), classes);
  report.mean_loss = loss_sum / static_cast<double>(ids.size());
  model.set_training(was_training);
  return report;
}

PredictResult predict(model::UNet& model, const data::Image& image, const data::NormStats& norm) {
  const auto& cfg = model.config();
  if (image.height != cfg.height || image.width != cfg.width) {
    throw ValidationError(fmt::format("image is {}x{} but the model expects {}x{}", image.height,
                                      image.width, cfg.height, cfg.width));
  }
  const bool was_training = model.training();
  model.set_training(false);
  Tensor input(1, 3, image.height, image.width);
  data::normalize_into(image, norm, input, 0);
  PredictResult r;
  r.prediction = model::to_prediction(model.forward(input));
  model.set_training(was_training);

  const Tensor masks = objective::threshold(r.prediction.pixel_probs, 0.5);
  r.masks = data::MaskSet(cfg.num_classes, image.height, image.width);
  for (int m = 0; m < cfg.num_classes; ++m) {
    auto dst = r.masks.mask(m);
    const double* src = masks.plane(0, m);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = src[k] != 0.0;
    r.rle.push_back(data::rle_encode(dst, image.height, image.width));
    const double prob = r.prediction.class_probs.at(0, m, 0, 0);
    r.class_probs.push_back(prob);
    r.labels.push_back(prob >= 0.5 ? 1 : 0);
  }
  return r;
}

PredictResult predict(model::UNet& model, const std::filesystem::path& image_path,
                      const data::NormStats& norm) {
  return predict(model, data::load_image(image_path), norm);
}

}  // namespace tlunet::train
