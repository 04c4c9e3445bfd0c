#pragma once

#include <memory>
#include <vector>

#include "tlunet/model/config.hpp"
#include "tlunet/model/encoder.hpp"
#include "tlunet/nn/conv.hpp"
#include "tlunet/nn/layers.hpp"

namespace tlunet::model {

/// Decoder stage: 2× nearest upsampling, concatenation with the encoder
/// skip feature of matching resolution (absent at full resolution), then
/// two 3×3 conv + BN + ReLU.
class DecoderBlock {
 public:
  DecoderBlock(const std::string& name, int in_channels, int skip_channels, int out_channels);

  Tensor forward(const Tensor& x, const Tensor* skip);
  /// Returns (d input, d skip); d skip is empty when there was no skip.
  std::pair<Tensor, Tensor> backward(const Tensor& grad_out);

  void collect(std::vector<nn::Parameter*>& out);
  void set_training(bool on);

 private:
  int in_channels_;
  int skip_channels_;
  nn::Upsample2x upsample_;
  nn::Sequential body_;
};

enum class ParamScope { kEncoder, kDecoder, kAll };

/// Sigmoid outputs. pixel_probs is B×N×H×W, class_probs is B×N×1×1.
struct Prediction {
  Tensor pixel_probs;
  Tensor class_probs;
};

struct ForwardResult {
  FeaturePyramid pyramid;
  Tensor pixel_logits;  // B×N×H×W
  Tensor class_logits;  // B×N×1×1
};

/// U-Net with a swappable encoder, a sigmoid segmentation head and a
/// pooled-bottleneck linear classification head sharing one encoder pass.
class UNet {
 public:
  /// Builds and randomly initializes from `config.seed`. Pretrained
  /// weights are applied separately with load_pretrained().
  explicit UNet(ModelConfig config);

  const ModelConfig& config() const noexcept { return config_; }

  /// `batch` is B×3×H×W, normalized, with H and W from the config.
  ForwardResult forward(const Tensor& batch);
  /// Back-propagates logit gradients from the last training-mode forward.
  void backward(const Tensor& grad_pixel_logits, const Tensor& grad_class_logits);

  /// Spatial mean of the bottleneck followed by one affine map.
  Tensor classify(const Tensor& bottleneck);

  void set_training(bool on);
  bool training() const noexcept { return training_; }
  void zero_grad();

  /// All tensors in scope, including batch-norm running statistics.
  /// kDecoder covers everything outside the encoder (decoder and both heads).
  std::vector<nn::Parameter*> parameters(ParamScope scope = ParamScope::kAll);
  nn::Parameter* find(const std::string& name);

  Encoder& encoder() noexcept { return *encoder_; }

 private:
  ModelConfig config_;
  bool training_ = true;
  std::unique_ptr<Encoder> encoder_;
  std::vector<std::unique_ptr<DecoderBlock>> decoder_;
  nn::Conv2d seg_head_;
  nn::GlobalAvgPool pool_;
  nn::Linear classifier_;
};

/// Builds the model described by `config` (random initialization).
std::unique_ptr<UNet> build_model(const ModelConfig& config);

Prediction to_prediction(const ForwardResult& result);

/// Exact number of trainable scalars in scope.
std::size_t count_parameters(UNet& model, ParamScope scope);

double sigmoid(double x);

}  // namespace tlunet::model
