#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tlunet/data/normalize.hpp"
#include "tlunet/data/split.hpp"
#include "tlunet/error.hpp"
#include "tlunet/train/adam.hpp"
#include "tlunet/train/trainer.hpp"

using namespace tlunet;
using namespace tlunet::train;

namespace {

struct Fixture {
  data::Dataset dataset;
  data::DatasetSplit split;
  data::NormStats norm;
};

Fixture fixture(int count = 24, int size = 16, std::uint64_t seed = 2) {
  Fixture f;
  f.dataset = testing::synthetic_dataset(count, size, seed);
  const auto ids = f.dataset.ids();
  f.split = data::build_splits(ids, seed);
  std::vector<const data::Image*> imgs;
  for (const auto& id : f.split.train) imgs.push_back(&f.dataset.get(id).pixels);
  f.norm = data::compute_norm_stats(imgs);
  return f;
}

model::ModelConfig tiny16(model::EncoderFamily family = model::EncoderFamily::kResNet) {
  return testing::tiny_config(family, 16);
}

void make_constant(model::UNet& net, double seg_bias, double cls_bias) {
  for (const char* name : {"segmentation_head.weight", "classification_head.weight"}) net.find(name)->value.zero();
  net.find("segmentation_head.bias")->value.fill(seg_bias);
  net.find("classification_head.bias")->value.fill(cls_bias);
}

nn::Parameter make_param(double value, double grad) {
  nn::Parameter p = nn::make_parameter("p", {1}, nn::ParamKind::kBias, Shape{1, 1, 1, 1});
  p.value[0] = value;
  p.grad[0] = grad;
  return p;
}

}  // namespace

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  auto p = make_param(1.5, 0.0);
  nn::Parameter* ps[] = {&p};
  AdamState st;
  adam_step(ps, st, {});
  CHECK(p.value[0] == 1.5);
  CHECK(st.step == 1);
}

TEST_CASE("first adam step moves by the learning rate against the gradient sign") {
  for (double g : {3.0, -0.02, 250.0}) {
    auto p = make_param(0.0, g);
    nn::Parameter* ps[] = {&p};
    AdamState st;
    AdamConfig cfg;
    adam_step(ps, st, cfg);
    CHECK(p.value[0] == doctest::Approx(-cfg.learning_rate * (g > 0 ? 1 : -1)).epsilon(1e-6));
  }
}

TEST_CASE("adam matches a hand-rolled two-step update") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.999;
  auto p = make_param(1.0, 0.5);
  nn::Parameter* ps[] = {&p};
  AdamState st;
  adam_step(ps, st, cfg);
  p.grad[0] = -0.25;
  adam_step(ps, st, cfg);
  double x = 1.0;
  double m = 0;
  double v = 0;
  const double grads[] = {0.5, -0.25};
  for (int t = 1; t <= 2; ++t) {
    m = 0.9 * m + 0.1 * grads[t - 1];
    v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    x -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
  }
  CHECK(p.value[0] == doctest::Approx(x).epsilon(1e-14));
}

TEST_CASE("adam rejects non-finite gradients without side effects") {
  auto a = make_param(1.0, 0.5);
  auto b = make_param(2.0, NAN);
  nn::Parameter* ps[] = {&a, &b};
  AdamState st;
  CHECK_THROWS_AS(adam_step(ps, st, {}), NumericError);
  CHECK(a.value[0] == 1.0);
  CHECK(st.step == 0);
}

TEST_CASE("adam skips running statistics") {
  nn::Parameter p = nn::make_parameter("rm", {1}, nn::ParamKind::kRunningMean, Shape{1, 1, 1, 1});
  p.value[0] = 0.25;
  p.grad[0] = 10.0;
  nn::Parameter* ps[] = {&p};
  AdamState st;
  adam_step(ps, st, {});
  CHECK(p.value[0] == 0.25);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.beta2 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  CHECK(parse_stop_metric("val_dice") == StopMetric::kValDice);
  CHECK_THROWS_AS(parse_stop_metric("val_auc"), ValidationError);
}

TEST_CASE("training runs max_epochs when patience is large and is deterministic") {
  const auto f = fixture();
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_epochs = 3;
  cfg.patience = 3;
  cfg.seed = 5;
  model::UNet a(tiny16());
  model::UNet b(tiny16());
  const auto ha = train::train(a, f.dataset, f.split, f.norm, cfg, {});
  const auto hb = train::train(b, f.dataset, f.split, f.norm, cfg, {});
  CHECK(ha.epochs.size() == 3);
  CHECK(format_history_csv(ha) == format_history_csv(hb));
  CHECK(ha.best_epoch == hb.best_epoch);
  for (std::size_t i = 0; i < ha.epochs.size(); ++i) CHECK(ha.epochs[i].train_loss == hb.epochs[i].train_loss);
}

TEST_CASE("early stopping restores the best epoch") {
  const auto f = fixture();
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_epochs = 6;
  cfg.patience = 1;
  cfg.learning_rate = 0.05;  // large enough to make validation loss bounce
  cfg.seed = 9;
  model::UNet net(tiny16());
  const auto h = train::train(net, f.dataset, f.split, f.norm, cfg, {});
  REQUIRE(h.best_epoch >= 1);
  CHECK(h.epochs.size() <= 6);
  const auto& best = h.epochs[h.best_epoch - 1];
  for (const auto& e : h.epochs) CHECK(best.val_loss <= e.val_loss);
  if (h.epochs.size() < 6) CHECK(static_cast<int>(h.epochs.size()) == h.best_epoch + cfg.patience);
  const auto rep = evaluate(net, f.dataset, f.split.val, f.norm, {}, cfg.batch_size);
  CHECK(rep.mean_loss == doctest::Approx(best.val_loss).epsilon(1e-12));

  auto dice_cfg = cfg;
  dice_cfg.early_stop_metric = StopMetric::kValDice;
  model::UNet net2(tiny16());
  const auto h2 = train::train(net2, f.dataset, f.split, f.norm, dice_cfg, {});
  for (const auto& e : h2.epochs) CHECK(h2.epochs[h2.best_epoch - 1].val_dice >= e.val_dice);
}

TEST_CASE("training preconditions") {
  const auto f = fixture();
  model::UNet net(tiny16());
  auto empty = f.split;
  empty.train.clear();
  CHECK_THROWS_AS(train::train(net, f.dataset, empty, f.norm, {}, {}), ValidationError);
}

TEST_CASE("history csv roundtrip") {
  TrainingHistory h;
  h.epochs.push_back({1, 0.5, 0.6, 0.7, 0.8, 12.0});
  h.epochs.push_back({2, 0.25, 0.5, 0.75, 0.875, 11.0});
  const auto text = format_history_csv(h);
  CHECK(text.starts_with("epoch,train_loss,val_loss,val_dice,val_mla\n"));
  CHECK(text.find("12") == std::string::npos);
  const auto back = parse_history_csv(text);
  REQUIRE(back.epochs.size() == 2);
  CHECK(back.epochs[1].val_mla == 0.875);
}

TEST_CASE("constant one-half model evaluates to the closed form") {
  const auto f = fixture();
  model::UNet net(tiny16());
  make_constant(net, 0.0, 0.0);
  const auto rep = evaluate(net, f.dataset, f.split.test, f.norm, {});
  const double hw = 16.0 * 16.0;
  double label_ones = 0;
  for (const auto& img : rep.images) {
    const auto& rec = f.dataset.get(img.image_id);
    for (int m = 0; m < 4; ++m) {
      const auto mask = rec.masks.mask(m);
      const double y = static_cast<double>(std::count(mask.begin(), mask.end(), 1));
      CHECK(img.dice[m] == doctest::Approx(2 * y / (y + hw)).epsilon(1e-14));
      CHECK(img.pred_labels[m] == 1);
      label_ones += rec.labels[m];
    }
  }
  CHECK(rep.mla == doctest::Approx(label_ones / (4.0 * rep.images.size())));
  const auto again = evaluate(net, f.dataset, f.split.test, f.norm, {});
  CHECK(metrics::format_report_csv(again) == metrics::format_report_csv(rep));
}

TEST_CASE("prediction output") {
  const auto f = fixture(8, 16, 3);
  model::UNet net(tiny16(model::EncoderFamily::kDenseNet));
  const auto& rec = f.dataset.records().front();
  const auto res = predict(net, rec.pixels, f.norm);
  REQUIRE(res.rle.size() == 4);
  for (int m = 0; m < 4; ++m) {
    const Tensor thr = objective::threshold(res.prediction.pixel_probs, 0.5);
    std::vector<std::uint8_t> expected(256);
    for (int i = 0; i < 256; ++i) expected[i] = thr.plane(0, m)[i] != 0.0;
    CHECK(data::rle_decode(res.rle[m], 16, 16) == expected);
    CHECK(res.labels[m] == (res.class_probs[m] >= 0.5 ? 1 : 0));
  }

  make_constant(net, -20.0, -20.0);
  const auto none = predict(net, rec.pixels, f.norm);
  for (const auto& r : none.rle) CHECK(r.str().empty());
  for (auto l : none.labels) CHECK(l == 0);

  CHECK_THROWS_AS(predict(net, std::filesystem::path("/nonexistent/x.png"), f.norm), IoError);
  data::Image wrong(8, 8);
  CHECK_THROWS_AS(predict(net, wrong, f.norm), ValidationError);
}

TEST_CASE("a repeated batch is fitted") {
  const auto f = fixture(8, 16, 4);
  model::UNet net(tiny16());
  auto ids = f.dataset.ids();
  ids.resize(4);
  const auto batch = make_batch(f.dataset, ids, f.norm);
  AdamState st;
  AdamConfig adam;
  adam.learning_rate = 1e-2;
  adam.beta1 = 0.9;
  adam.beta2 = 0.999;
  const double first = train_step(net, batch, st, adam, {}).total();
  double last = first;
  for (int i = 0; i < 60; ++i) last = train_step(net, batch, st, adam, {}).total();
  CHECK(last < 0.5 * first);
}
