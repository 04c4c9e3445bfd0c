#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tlunet/model/config.hpp"
#include "tlunet/nn/layer.hpp"

namespace tlunet::model {

/// Multi-scale encoder features; entry s (0-based) has spatial size
/// (H / 2^(s+1), W / 2^(s+1)). The last entry is the bottleneck.
struct FeaturePyramid {
  std::vector<Tensor> features;
  const Tensor& bottleneck() const { return features.back(); }
};

/// A chain of downsampling stages. Parameter names follow the torchvision
/// layout of the corresponding network, prefixed with "encoder.".
class Encoder {
 public:
  Encoder(EncoderFamily family, std::vector<std::unique_ptr<nn::Sequential>> stages,
          std::vector<int> channels);

  FeaturePyramid forward(const Tensor& x);
  /// `grads[s]` is dLoss/d(feature s); an empty tensor means zero.
  Tensor backward(std::vector<Tensor> grads);

  void collect(std::vector<nn::Parameter*>& out);
  void set_training(bool on);

  EncoderFamily family() const noexcept { return family_; }
  int stages() const noexcept { return static_cast<int>(stages_.size()); }
  /// Output channels per stage.
  const std::vector<int>& channels() const noexcept { return channels_; }

 private:
  EncoderFamily family_;
  std::vector<std::unique_ptr<nn::Sequential>> stages_;
  std::vector<int> channels_;
  std::vector<Shape> output_shapes_;
};

/// ResNet-18 layout: stem (7×7/2 conv, BN, ReLU), then 3×3/2 max-pool with
/// layer1, then layer2..layer4; two basic blocks per layer.
std::unique_ptr<Encoder> make_resnet18_encoder(int stages, int width);

/// DenseNet-121 layout: stem, then dense blocks of (6, 12, 24, 16) layers
/// (bottleneck 4× growth), transitions halving channels and resolution,
/// final batch norm + ReLU at stage five.
std::unique_ptr<Encoder> make_densenet121_encoder(int stages, int width);

std::unique_ptr<Encoder> make_encoder(const ModelConfig& config);

}  // namespace tlunet::model
