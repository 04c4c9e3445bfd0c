#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tlunet/error.hpp"
#include "tlunet/objective/loss.hpp"

using namespace tlunet;
using namespace tlunet::objective;

namespace {

Targets one_pixel_targets(double mask, double label) {
  return {Tensor(1, 1, 1, 1, mask), Tensor(1, 1, 1, 1, label)};
}

double logit(double p) { return std::log(p / (1 - p)); }

}  // namespace

TEST_CASE("bce values") {
  CHECK(bce(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce(1.0, 1) < 1e-6);
  CHECK(bce(0.9, 0) == doctest::Approx(2.302585).epsilon(1e-6));
  CHECK(std::isfinite(bce(0.0, 1)));
  CHECK(bce(0.0, 1) == doctest::Approx(-std::log(kClampEps)));
  CHECK_THROWS_AS(bce(std::nan(""), 1), NumericError);
  CHECK_THROWS_AS(bce(INFINITY, 0), NumericError);
}

TEST_CASE("bce derivative matches finite differences") {
  const double h = 1e-7;
  for (double p : {0.05, 0.2, 0.5, 0.77, 0.93}) {
    for (double y : {0.0, 1.0}) {
      const double numeric = (bce(p + h, y) - bce(p - h, y)) / (2 * h);
      CHECK(bce_grad(p, y) == doctest::Approx((p - y) / (p * (1 - p))).epsilon(1e-12));
      CHECK(std::abs(bce_grad(p, y) - numeric) / std::abs(numeric) < 1e-6);
    }
  }
}

TEST_CASE("one-pixel joint loss in sum mode") {
  LossConfig cfg;
  cfg.pixel_reduction = PixelReduction::kSum;
  const auto t = one_pixel_targets(1, 1);
  const auto terms = joint_loss(Tensor(1, 1, 1, 1, 0.5), Tensor(1, 1, 1, 1, 0.5), t, cfg);
  CHECK(terms.total() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  const auto from_logits = joint_loss_from_logits(Tensor(1, 1, 1, 1, 0.0), Tensor(1, 1, 1, 1, 0.0), t, cfg);
  CHECK(from_logits.total() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("joint loss structure") {
  Rng rng(1);
  const auto cfg_model = testing::tiny_config(model::EncoderFamily::kResNet);
  auto [x, t] = testing::random_problem(cfg_model, 3, rng);
  Tensor pix(t.masks.shape());
  Tensor cls(t.labels.shape());
  for (double& v : pix.values()) v = rng.uniform(0.01, 0.99);
  for (double& v : cls.values()) v = rng.uniform(0.01, 0.99);

  const LossConfig unit;
  LossConfig cls_only;
  cls_only.lambda_seg = 0;
  LossConfig seg_only;
  seg_only.lambda_cls = 0;
  const double full = joint_loss(pix, cls, t, unit).total();
  CHECK(full > 0);
  CHECK(joint_loss(pix, cls, t, cls_only).total() + joint_loss(pix, cls, t, seg_only).total() ==
        doctest::Approx(full).epsilon(1e-12));

  LossConfig doubled;
  doubled.lambda_seg = 2;
  const auto a = joint_loss(pix, cls, t, unit);
  const auto b = joint_loss(pix, cls, t, doubled);
  CHECK(b.segmentation == doctest::Approx(2 * a.segmentation).epsilon(1e-12));
  CHECK(b.classification == doctest::Approx(a.classification).epsilon(1e-12));

  LossConfig sum;
  sum.pixel_reduction = PixelReduction::kSum;
  CHECK(joint_loss(pix, cls, t, sum).segmentation ==
        doctest::Approx(a.segmentation * 64).epsilon(1e-12));

  // Batch permutation.
  auto swap01 = [](const Tensor& src) {
    Tensor out(src.shape());
    const std::size_t per = src.size() / src.n();
    std::copy_n(src.values().begin() + per, per, out.values().begin());
    std::copy_n(src.values().begin(), per, out.values().begin() + per);
    std::copy(src.values().begin() + 2 * per, src.values().end(), out.values().begin() + 2 * per);
    return out;
  };
  const Targets tp{swap01(t.masks), swap01(t.labels)};
  CHECK(joint_loss(swap01(pix), swap01(cls), tp, unit).total() == doctest::Approx(full).epsilon(1e-12));

  // Logit form agrees with the probability form away from the clamp.
  Tensor zp(pix.shape());
  Tensor zc(cls.shape());
  for (std::size_t i = 0; i < pix.size(); ++i) zp[i] = logit(pix[i]);
  for (std::size_t i = 0; i < cls.size(); ++i) zc[i] = logit(cls[i]);
  CHECK(joint_loss_from_logits(zp, zc, t, unit).total() == doctest::Approx(full).epsilon(1e-10));

  // Exactly correct predictions give (nearly) zero.
  CHECK(joint_loss(t.masks, t.labels, t, unit).total() < 1e-5);

  CHECK_THROWS_AS(joint_loss(Tensor(1, 4, 2, 2), cls, t, unit), ValidationError);
}

TEST_CASE("joint loss gradients") {
  Rng rng(2);
  const auto cfg_model = testing::tiny_config(model::EncoderFamily::kResNet, 4);
  auto [x, t] = testing::random_problem(cfg_model, 2, rng);
  Tensor pix(t.masks.shape());
  Tensor cls(t.labels.shape());
  for (double& v : pix.values()) v = rng.uniform(0.05, 0.95);
  for (double& v : cls.values()) v = rng.uniform(0.05, 0.95);
  LossConfig cfg;
  cfg.lambda_cls = 0.7;
  cfg.lambda_seg = 1.3;
  LossGradients g;
  joint_loss(pix, cls, t, cfg, g);
  const double h = 1e-7;
  auto check = [&](Tensor& target, const Tensor& grad) {
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double saved = target[i];
      target[i] = saved + h;
      const double up = joint_loss(pix, cls, t, cfg).total();
      target[i] = saved - h;
      const double down = joint_loss(pix, cls, t, cfg).total();
      target[i] = saved;
      const double numeric = (up - down) / (2 * h);
      CHECK(std::abs(grad[i] - numeric) <= 1e-6 * std::max(1.0, std::abs(numeric)));
    }
  };
  check(pix, g.pixel);
  check(cls, g.cls);

  // Logit gradients are weight * reduction * (sigmoid(z) - y).
  Tensor zp(pix.shape());
  for (std::size_t i = 0; i < pix.size(); ++i) zp[i] = logit(pix[i]);
  Tensor zc(cls.shape());
  for (std::size_t i = 0; i < cls.size(); ++i) zc[i] = logit(cls[i]);
  LossGradients gz;
  joint_loss_from_logits(zp, zc, t, cfg, &gz);
  for (std::size_t i = 0; i < pix.size(); ++i) {
    CHECK(gz.pixel[i] == doctest::Approx(1.3 / 16 * (pix[i] - t.masks[i])).epsilon(1e-10));
  }
  for (std::size_t i = 0; i < cls.size(); ++i) {
    CHECK(gz.cls[i] == doctest::Approx(0.7 * (cls[i] - t.labels[i])).epsilon(1e-10));
  }
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  cfg.lambda_cls = 0;
  cfg.lambda_seg = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.lambda_seg = -1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  CHECK(parse_pixel_reduction("sum") == PixelReduction::kSum);
  CHECK_THROWS_AS(parse_pixel_reduction("max"), ValidationError);
}

TEST_CASE("threshold") {
  Tensor p(1, 1, 1, 4);
  p[0] = 0.7;
  p[1] = 0.5;
  p[2] = 0.49;
  p[3] = 0.0;
  const Tensor m = threshold(p, 0.5);
  CHECK(m[0] == 1.0);
  CHECK(m[1] == 1.0);
  CHECK(m[2] == 0.0);
  CHECK(m[3] == 0.0);
  CHECK_THROWS_AS(threshold(p, 1.5), ValidationError);
  CHECK_THROWS_AS(threshold(p, -0.1), ValidationError);
}
