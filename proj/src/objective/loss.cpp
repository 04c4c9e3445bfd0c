#include "tlunet/objective/loss.hpp"

#include <algorithm>
#include <cmath>

#include "tlunet/error.hpp"

namespace tlunet::objective {

namespace {

void check_shapes(const Tensor& pixel, const Tensor& cls, const Targets& truth) {
  if (pixel.shape() != truth.masks.shape()) {
    throw ValidationError("pixel prediction " + pixel.shape().str() + " vs mask " +
                          truth.masks.shape().str());
  }
  if (cls.shape() != truth.labels.shape()) {
    throw ValidationError("class prediction " + cls.shape().str() + " vs labels " +
                          truth.labels.shape().str());
  }
  if (pixel.n() != cls.n() || pixel.c() != cls.c() || pixel.n() < 1) {
    throw ValidationError("batch/class counts of the two heads disagree");
  }
}

double pixel_scale(const Tensor& pixel, const LossConfig& cfg) {
  const double s = cfg.pixel_reduction == PixelReduction::kMean
                       ? 1.0 / static_cast<double>(pixel.shape().plane())
                       : 1.0;
  return cfg.lambda_seg * s;
}

double clamp_prob(double p) {
  if (!std::isfinite(p)) throw NumericError("non-finite probability");
  return std::clamp(p, kClampEps, 1.0 - kClampEps);
}

// softplus(z) - y z, stable for large |z|
double bce_logit(double z, double y) {
  if (!std::isfinite(z)) throw NumericError("non-finite logit");
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda_cls >= 0) || !(lambda_seg >= 0)) throw ValidationError("loss weights must be >= 0");
  if (lambda_cls == 0 && lambda_seg == 0) throw ValidationError("both loss weights are zero");
}

std::string to_string(PixelReduction r) { return r == PixelReduction::kSum ? "sum" : "mean"; }

PixelReduction parse_pixel_reduction(const std::string& text) {
  if (text == "sum") return PixelReduction::kSum;
  if (text == "mean") return PixelReduction::kMean;
  throw ValidationError("unknown pixel reduction '" + text + "' (expected sum or mean)");
}

double bce(double p, double y) {
  if (!std::isfinite(y)) throw NumericError("non-finite target");
  const double q = clamp_prob(p);
  return -(y * std::log(q) + (1.0 - y) * std::log1p(-q));
}

double bce_grad(double p, double y) {
  if (!std::isfinite(y)) throw NumericError("non-finite target");
  const double q = clamp_prob(p);
  return (q - y) / (q * (1.0 - q));
}

LossTerms joint_loss(const Tensor& pixel_probs, const Tensor& class_probs, const Targets& truth,
                     const LossConfig& cfg) {
  cfg.validate();
  check_shapes(pixel_probs, class_probs, truth);
  LossTerms terms;
  for (std::size_t i = 0; i < class_probs.size(); ++i) {
    terms.classification += bce(class_probs[i], truth.labels[i]);
  }
  for (std::size_t i = 0; i < pixel_probs.size(); ++i) {
    terms.segmentation += bce(pixel_probs[i], truth.masks[i]);
  }
  terms.classification *= cfg.lambda_cls;
  terms.segmentation *= pixel_scale(pixel_probs, cfg);
  return terms;
}

LossTerms joint_loss(const Tensor& pixel_probs, const Tensor& class_probs, const Targets& truth,
                     const LossConfig& cfg, LossGradients& grads) {
  LossTerms terms = joint_loss(pixel_probs, class_probs, truth, cfg);
  const double seg_scale = pixel_scale(pixel_probs, cfg);
  grads.pixel = Tensor(pixel_probs.shape());
  grads.cls = Tensor(class_probs.shape());
  for (std::size_t i = 0; i < class_probs.size(); ++i) {
    grads.cls[i] = cfg.lambda_cls * bce_grad(class_probs[i], truth.labels[i]);
  }
  for (std::size_t i = 0; i < pixel_probs.size(); ++i) {
    grads.pixel[i] = seg_scale * bce_grad(pixel_probs[i], truth.masks[i]);
  }
  return terms;
}

LossTerms joint_loss_from_logits(const Tensor& pixel_logits, const Tensor& class_logits,
                                 const Targets& truth, const LossConfig& cfg,
                                 LossGradients* grads) {
  cfg.validate();
  check_shapes(pixel_logits, class_logits, truth);
  const double seg_scale = pixel_scale(pixel_logits, cfg);
  LossTerms terms;
  for (std::size_t i = 0; i < class_logits.size(); ++i) {
    terms.classification += bce_logit(class_logits[i], truth.labels[i]);
  }
  for (std::size_t i = 0; i < pixel_logits.size(); ++i) {
    terms.segmentation += bce_logit(pixel_logits[i], truth.masks[i]);
  }
  terms.classification *= cfg.lambda_cls;
  terms.segmentation *= seg_scale;
  if (grads != nullptr) {
    grads->pixel = Tensor(pixel_logits.shape());
    grads->cls = Tensor(class_logits.shape());
    for (std::size_t i = 0; i < class_logits.size(); ++i) {
      grads->cls[i] = cfg.lambda_cls * (sigmoid(class_logits[i]) - truth.labels[i]);
    }
    for (std::size_t i = 0; i < pixel_logits.size(); ++i) {
      grads->pixel[i] = seg_scale * (sigmoid(pixel_logits[i]) - truth.masks[i]);
    }
  }
  return terms;
}

Tensor threshold(const Tensor& probs, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("threshold must lie in [0, 1]");
  Tensor out(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= t ? 1.0 : 0.0;
  return out;
}

}  // namespace tlunet::objective
