#include "tlunet/model/encoder.hpp"

#include "tlunet/error.hpp"
#include "tlunet/nn/conv.hpp"
#include "tlunet/nn/layers.hpp"

namespace tlunet::model {

namespace {

using nn::BatchNorm2d;
using nn::Conv2d;
using nn::ReLU;

/// Two 3×3 conv + BN layers with an additive identity (or projected) skip.
class BasicBlock : public nn::Layer {
 public:
  BasicBlock(const std::string& name, int in, int out, int stride)
      : conv1_(name + ".conv1", in, out, 3, stride, 1),
        bn1_(name + ".bn1", out),
        conv2_(name + ".conv2", out, out, 3, 1, 1),
        bn2_(name + ".bn2", out) {
    if (stride != 1 || in != out) {
      down_conv_ = std::make_unique<Conv2d>(name + ".downsample.0", in, out, 1, stride, 0);
      down_bn_ = std::make_unique<BatchNorm2d>(name + ".downsample.1", out);
    }
  }

  Tensor forward(const Tensor& x) override {
    Tensor h = relu1_.forward(bn1_.forward(conv1_.forward(x)));
    h = bn2_.forward(conv2_.forward(h));
    if (down_conv_) {
      h += down_bn_->forward(down_conv_->forward(x));
    } else {
      h += x;
    }
    return relu2_.forward(h);
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor g = relu2_.backward(grad_out);
    Tensor skip = down_conv_ ? down_conv_->backward(down_bn_->backward(g)) : g;
    Tensor main = conv1_.backward(bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(g)))));
    main += skip;
    return main;
  }

  void collect(std::vector<nn::Parameter*>& out) override {
    conv1_.collect(out);
    bn1_.collect(out);
    conv2_.collect(out);
    bn2_.collect(out);
    if (down_conv_) {
      down_conv_->collect(out);
      down_bn_->collect(out);
    }
  }

  void set_training(bool on) override {
    training_ = on;
    for (nn::Layer* l : std::initializer_list<nn::Layer*>{&conv1_, &bn1_, &relu1_, &conv2_, &bn2_, &relu2_}) {
      l->set_training(on);
    }
    if (down_conv_) {
      down_conv_->set_training(on);
      down_bn_->set_training(on);
    }
  }

 private:
  Conv2d conv1_;
  BatchNorm2d bn1_;
  ReLU relu1_;
  Conv2d conv2_;
  BatchNorm2d bn2_;
  ReLU relu2_;
  std::unique_ptr<Conv2d> down_conv_;
  std::unique_ptr<BatchNorm2d> down_bn_;
};

/// BN-ReLU-1×1 conv to 4·growth, BN-ReLU-3×3 conv to growth.
class DenseLayer : public nn::Layer {
 public:
  DenseLayer(const std::string& name, int in, int growth)
      : norm1_(name + ".norm1", in),
        conv1_(name + ".conv1", in, 4 * growth, 1),
        norm2_(name + ".norm2", 4 * growth),
        conv2_(name + ".conv2", 4 * growth, growth, 3, 1, 1) {}

  Tensor forward(const Tensor& x) override {
    Tensor h = conv1_.forward(relu1_.forward(norm1_.forward(x)));
    return conv2_.forward(relu2_.forward(norm2_.forward(h)));
  }

  Tensor backward(const Tensor& g) override {
    Tensor h = norm2_.backward(relu2_.backward(conv2_.backward(g)));
    return norm1_.backward(relu1_.backward(conv1_.backward(h)));
  }

  void collect(std::vector<nn::Parameter*>& out) override {
    norm1_.collect(out);
    conv1_.collect(out);
    norm2_.collect(out);
    conv2_.collect(out);
  }

  void set_training(bool on) override {
    training_ = on;
    for (nn::Layer* l : std::initializer_list<nn::Layer*>{&norm1_, &relu1_, &conv1_, &norm2_, &relu2_, &conv2_}) {
      l->set_training(on);
    }
  }

 private:
  BatchNorm2d norm1_;
  ReLU relu1_;
  Conv2d conv1_;
  BatchNorm2d norm2_;
  ReLU relu2_;
  Conv2d conv2_;
};

/// Each layer sees the concatenation of the block input and all earlier
/// layer outputs; the block output is the full concatenation.
class DenseBlock : public nn::Layer {
 public:
  DenseBlock(const std::string& name, int layers, int in, int growth) : in_(in), growth_(growth) {
    for (int i = 0; i < layers; ++i) {
      layers_.push_back(std::make_unique<DenseLayer>(
          name + ".denselayer" + std::to_string(i + 1), in + i * growth, growth));
    }
  }

  int out_channels() const { return in_ + static_cast<int>(layers_.size()) * growth_; }

  Tensor forward(const Tensor& x) override {
    Tensor acc = x;
    for (auto& layer : layers_) {
      Tensor fresh = layer->forward(acc);
      const Tensor* parts[] = {&acc, &fresh};
      acc = concat_channels(parts);
    }
    return acc;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const int begin = in_ + static_cast<int>(i) * growth_;
      Tensor fresh = slice_channels(g, begin, begin + growth_);
      Tensor gin = layers_[i]->backward(fresh);
      add_into_channels(g, gin, 0);
    }
    return slice_channels(g, 0, in_);
  }

  void collect(std::vector<nn::Parameter*>& out) override {
    for (auto& l : layers_) l->collect(out);
  }

  void set_training(bool on) override {
    training_ = on;
    for (auto& l : layers_) l->set_training(on);
  }

 private:
  int in_;
  int growth_;
  std::vector<std::unique_ptr<DenseLayer>> layers_;
};

void add_transition(nn::Sequential& seq, const std::string& name, int in, int out) {
  seq.emplace<BatchNorm2d>(name + ".norm", in);
  seq.emplace<ReLU>();
  seq.emplace<Conv2d>(name + ".conv", in, out, 1);
  seq.emplace<nn::AvgPool2d>(2);
}

}  // namespace

Encoder::Encoder(EncoderFamily family, std::vector<std::unique_ptr<nn::Sequential>> stages,
                 std::vector<int> channels)
    : family_(family), stages_(std::move(stages)), channels_(std::move(channels)) {}

FeaturePyramid Encoder::forward(const Tensor& x) {
  FeaturePyramid pyramid;
  output_shapes_.clear();
  const Tensor* current = &x;
  for (auto& stage : stages_) {
    pyramid.features.push_back(stage->forward(*current));
    current = &pyramid.features.back();
    output_shapes_.push_back(current->shape());
  }
  return pyramid;
}

Tensor Encoder::backward(std::vector<Tensor> grads) {
  if (grads.size() != stages_.size()) {
    throw ValidationError("encoder backward expects one gradient per stage");
  }
  Tensor carried;
  for (std::size_t s = stages_.size(); s-- > 0;) {
    Tensor g = grads[s].empty() ? Tensor(output_shapes_[s]) : std::move(grads[s]);
    if (!carried.empty()) g += carried;
    carried = stages_[s]->backward(g);
  }
  return carried;
}

void Encoder::collect(std::vector<nn::Parameter*>& out) {
  for (auto& s : stages_) s->collect(out);
}

void Encoder::set_training(bool on) {
  for (auto& s : stages_) s->set_training(on);
}

std::unique_ptr<Encoder> make_resnet18_encoder(int stages, int width) {
  const std::string p = "encoder.";
  std::vector<std::unique_ptr<nn::Sequential>> seqs;
  std::vector<int> channels;

  auto stem = std::make_unique<nn::Sequential>();
  stem->emplace<Conv2d>(p + "conv1", 3, width, 7, 2, 3);
  stem->emplace<BatchNorm2d>(p + "bn1", width);
  stem->emplace<ReLU>();
  seqs.push_back(std::move(stem));
  channels.push_back(width);

  int in = width;
  for (int layer = 1; layer <= 4 && static_cast<int>(seqs.size()) < stages; ++layer) {
    auto seq = std::make_unique<nn::Sequential>();
    const int out = width << (layer - 1);
    const int stride = layer == 1 ? 1 : 2;
    if (layer == 1) seq->emplace<nn::MaxPool2d>(3, 2, 1);
    const std::string name = p + "layer" + std::to_string(layer);
    seq->emplace<BasicBlock>(name + ".0", in, out, stride);
    seq->emplace<BasicBlock>(name + ".1", out, out, 1);
    seqs.push_back(std::move(seq));
    channels.push_back(out);
    in = out;
  }
  return std::make_unique<Encoder>(EncoderFamily::kResNet, std::move(seqs), std::move(channels));
}

std::unique_ptr<Encoder> make_densenet121_encoder(int stages, int width) {
  const std::string p = "encoder.features.";
  constexpr int kBlockLayers[] = {6, 12, 24, 16};
  const int growth = width / 2;
  std::vector<std::unique_ptr<nn::Sequential>> seqs;
  std::vector<int> channels;

  auto stem = std::make_unique<nn::Sequential>();
  stem->emplace<Conv2d>(p + "conv0", 3, width, 7, 2, 3);
  stem->emplace<BatchNorm2d>(p + "norm0", width);
  stem->emplace<ReLU>();
  seqs.push_back(std::move(stem));
  channels.push_back(width);

  int ch = width;
  for (int block = 1; block <= 4 && static_cast<int>(seqs.size()) < stages; ++block) {
    auto seq = std::make_unique<nn::Sequential>();
    if (block == 1) {
      seq->emplace<nn::MaxPool2d>(3, 2, 1);
    } else {
      add_transition(*seq, p + "transition" + std::to_string(block - 1), ch, ch / 2);
      ch /= 2;
    }
    auto& dense = seq->emplace<DenseBlock>(p + "denseblock" + std::to_string(block),
                                           kBlockLayers[block - 1], ch, growth);
    ch = dense.out_channels();
    if (block == 4) {
      seq->emplace<BatchNorm2d>(p + "norm5", ch);
      seq->emplace<ReLU>();
    }
    seqs.push_back(std::move(seq));
    channels.push_back(ch);
  }
  return std::make_unique<Encoder>(EncoderFamily::kDenseNet, std::move(seqs), std::move(channels));
}

std::unique_ptr<Encoder> make_encoder(const ModelConfig& config) {
  switch (config.encoder) {
    case EncoderFamily::kResNet:
      return make_resnet18_encoder(config.stages, config.encoder_width);
    case EncoderFamily::kDenseNet:
      return make_densenet121_encoder(config.stages, config.encoder_width);
  }
  throw ValidationError("unknown encoder family");
}

}  // namespace tlunet::model
