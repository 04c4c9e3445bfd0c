#pragma once

#include <span>
#include <string>

#include "tlunet/tensor.hpp"

namespace tlunet::objective {

/// Probabilities are clamped to [kClampEps, 1 - kClampEps] before logs.
inline constexpr double kClampEps = 1e-7;

enum class PixelReduction { kSum, kMean };

struct LossConfig {
  double lambda_cls = 1.0;
  double lambda_seg = 1.0;
  /// kMean divides each image/class pixel sum by H·W; kSum is the literal
  /// double sum over pixels.
  PixelReduction pixel_reduction = PixelReduction::kMean;

  void validate() const;
};

std::string to_string(PixelReduction r);
PixelReduction parse_pixel_reduction(const std::string& text);

/// -[y ln p + (1 - y) ln(1 - p)] with p clamped.
double bce(double p, double y);
/// d bce / d p = (p - y) / (p (1 - p)), evaluated at the clamped p.
double bce_grad(double p, double y);

/// Targets: pixel masks B×N×H×W and image labels B×N×1×1, entries in {0,1}.
struct Targets {
  Tensor masks;
  Tensor labels;
};

struct LossTerms {
  double classification = 0;  // lambda_cls · Σ_k Σ_m BCE(ŷ, y)
  double segmentation = 0;    // lambda_seg · Σ_k Σ_m Σ_ij BCE(ẑ, z) (reduced)
  double total() const { return classification + segmentation; }
};

/// Joint loss over probabilities (summed over the batch).
LossTerms joint_loss(const Tensor& pixel_probs, const Tensor& class_probs, const Targets& truth,
                     const LossConfig& cfg);

struct LossGradients {
  Tensor pixel;
  Tensor cls;
};

/// Same loss with gradients with respect to the probabilities.
LossTerms joint_loss(const Tensor& pixel_probs, const Tensor& class_probs, const Targets& truth,
                     const LossConfig& cfg, LossGradients& grads);

/// Joint loss evaluated from logits in the stable form
/// softplus(z) - y·z, with gradients sigmoid(z) - y (times weights and the
/// reduction factor). Used for training.
LossTerms joint_loss_from_logits(const Tensor& pixel_logits, const Tensor& class_logits,
                                 const Targets& truth, const LossConfig& cfg,
                                 LossGradients* grads = nullptr);

/// mask = 1 where prob >= t.
Tensor threshold(const Tensor& probs, double t = 0.5);

}  // namespace tlunet::objective
