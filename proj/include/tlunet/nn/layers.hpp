#pragma once

#include <vector>

#include "tlunet/nn/layer.hpp"

namespace tlunet::nn {

/// Batch normalization over (N, H, W) per channel. Running statistics use
/// the unbiased batch variance and momentum 0.1; eval mode normalizes with
/// them.
class BatchNorm2d : public Layer {
 public:
  BatchNorm2d(const std::string& name, int channels, double eps = 1e-5, double momentum = 0.1);

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Parameter*>& out) override;

  Parameter& scale() noexcept { return weight_; }
  Parameter& shift() noexcept { return bias_; }

 private:
  int channels_;
  double eps_;
  double momentum_;
  Parameter weight_;
  Parameter bias_;
  Parameter running_mean_;
  Parameter running_var_;
  Tensor normalized_;
  std::vector<double> inv_std_;
};

class ReLU : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor output_;
};

class MaxPool2d : public Layer {
 public:
  MaxPool2d(int kernel, int stride, int padding) : k_(kernel), stride_(stride), pad_(padding) {}
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  int k_, stride_, pad_;
  Shape input_shape_;
  std::vector<std::uint32_t> argmax_;
};

/// Non-overlapping average pooling with a square window.
class AvgPool2d : public Layer {
 public:
  explicit AvgPool2d(int kernel) : k_(kernel) {}
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  int k_;
  Shape input_shape_;
};

/// Nearest-neighbour 2× upsampling.
class Upsample2x : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
};

/// Spatial mean: N×C×H×W -> N×C×1×1.
class GlobalAvgPool : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape input_shape_;
};

/// Affine map on N×in×1×1 -> N×out×1×1.
class Linear : public Layer {
 public:
  Linear(const std::string& name, int in_features, int out_features);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Parameter*>& out) override;

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }

 private:
  int in_, out_;
  Parameter weight_;
  Parameter bias_;
  Tensor input_;
};

}  // namespace tlunet::nn
