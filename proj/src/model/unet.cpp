#include "tlunet/model/unet.hpp"

#include <cmath>

#include "tlunet/error.hpp"

namespace tlunet::model {

DecoderBlock::DecoderBlock(const std::string& name, int in_channels, int skip_channels,
                           int out_channels)
    : in_channels_(in_channels), skip_channels_(skip_channels) {
  body_.emplace<nn::Conv2d>(name + ".conv1", in_channels + skip_channels, out_channels, 3, 1, 1);
  body_.emplace<nn::BatchNorm2d>(name + ".bn1", out_channels);
  body_.emplace<nn::ReLU>();
  body_.emplace<nn::Conv2d>(name + ".conv2", out_channels, out_channels, 3, 1, 1);
  body_.emplace<nn::BatchNorm2d>(name + ".bn2", out_channels);
  body_.emplace<nn::ReLU>();
}

Tensor DecoderBlock::forward(const Tensor& x, const Tensor* skip) {
  Tensor up = upsample_.forward(x);
  if ((skip != nullptr) != (skip_channels_ > 0)) {
    throw ValidationError("decoder block skip connection mismatch");
  }
  if (skip != nullptr) {
    const Tensor* parts[] = {&up, skip};
    return body_.forward(concat_channels(parts));
  }
  return body_.forward(up);
}

std::pair<Tensor, Tensor> DecoderBlock::backward(const Tensor& grad_out) {
  Tensor g = body_.backward(grad_out);
  if (skip_channels_ == 0) return {upsample_.backward(g), Tensor()};
  Tensor g_up = slice_channels(g, 0, in_channels_);
  Tensor g_skip = slice_channels(g, in_channels_, in_channels_ + skip_channels_);
  return {upsample_.backward(g_up), std::move(g_skip)};
}

void DecoderBlock::collect(std::vector<nn::Parameter*>& out) { body_.collect(out); }

void DecoderBlock::set_training(bool on) {
  upsample_.set_training(on);
  body_.set_training(on);
}

namespace {

ModelConfig checked(ModelConfig config) {
  config.validate();
  return config;
}

}  // namespace

UNet::UNet(ModelConfig config)
    : config_(checked(std::move(config))),
      encoder_(make_encoder(config_)),
      seg_head_("segmentation_head", config_.resolved_decoder_channels().back(),
                config_.num_classes, 3, 1, 1, true),
      classifier_("classification_head", encoder_->channels().back(), config_.num_classes) {
  const auto dec = config_.resolved_decoder_channels();
  const auto& enc = encoder_->channels();
  const int stages = config_.stages;
  int in = enc.back();
  for (int i = 0; i < stages; ++i) {
    // block i consumes skip feature stages-2-i; the last block has none
    const int skip = (i < stages - 1) ? enc[stages - 2 - i] : 0;
    decoder_.push_back(std::make_unique<DecoderBlock>("decoder.blocks." + std::to_string(i), in,
                                                      skip, dec[i]));
    in = dec[i];
  }
  Rng rng(config_.seed);
  for (nn::Parameter* p : parameters(ParamScope::kAll)) nn::initialize(*p, rng);
}

ForwardResult UNet::forward(const Tensor& batch) {
  if (batch.c() != 3 || batch.h() != config_.height || batch.w() != config_.width ||
      batch.n() < 1) {
    throw ValidationError("input batch " + batch.shape().str() + " does not match Bx3x" +
                          std::to_string(config_.height) + "x" + std::to_string(config_.width));
  }
  ForwardResult out;
  out.pyramid = encoder_->forward(batch);
  const auto& feats = out.pyramid.features;
  const int stages = config_.stages;
  Tensor x;
  const Tensor* current = &feats.back();
  for (int i = 0; i < stages; ++i) {
    const Tensor* skip = (i < stages - 1) ? &feats[stages - 2 - i] : nullptr;
    x = decoder_[i]->forward(*current, skip);
    current = &x;
  }
  out.pixel_logits = seg_head_.forward(x);
  out.class_logits = classify(feats.back());
  return out;
}

Tensor UNet::classify(const Tensor& bottleneck) {
  return classifier_.forward(pool_.forward(bottleneck));
}

void UNet::backward(const Tensor& grad_pixel_logits, const Tensor& grad_class_logits) {
  const int stages = config_.stages;
  std::vector<Tensor> feature_grads(stages);
  Tensor g = seg_head_.backward(grad_pixel_logits);
  for (int i = stages - 1; i >= 0; --i) {
    auto [g_in, g_skip] = decoder_[i]->backward(g);
    if (i < stages - 1) feature_grads[stages - 2 - i] = std::move(g_skip);
    g = std::move(g_in);
  }
  g += pool_.backward(classifier_.backward(grad_class_logits));
  feature_grads[stages - 1] = std::move(g);
  encoder_->backward(std::move(feature_grads));
}

void UNet::set_training(bool on) {
  training_ = on;
  encoder_->set_training(on);
  for (auto& d : decoder_) d->set_training(on);
  seg_head_.set_training(on);
  pool_.set_training(on);
  classifier_.set_training(on);
}

void UNet::zero_grad() {
  for (nn::Parameter* p : parameters(ParamScope::kAll)) p->grad.zero();
}

std::vector<nn::Parameter*> UNet::parameters(ParamScope scope) {
  std::vector<nn::Parameter*> out;
  if (scope != ParamScope::kDecoder) encoder_->collect(out);
  if (scope != ParamScope::kEncoder) {
    for (auto& d : decoder_) d->collect(out);
    seg_head_.collect(out);
    classifier_.collect(out);
  }
  return out;
}

nn::Parameter* UNet::find(const std::string& name) {
  for (nn::Parameter* p : parameters(ParamScope::kAll)) {
    if (p->name == name) return p;
  }
  return nullptr;
}

std::unique_ptr<UNet> build_model(const ModelConfig& config) {
  return std::make_unique<UNet>(config);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Prediction to_prediction(const ForwardResult& result) {
  Prediction p{Tensor(result.pixel_logits.shape()), Tensor(result.class_logits.shape())};
  for (std::size_t i = 0; i < p.pixel_probs.size(); ++i) p.pixel_probs[i] = sigmoid(result.pixel_logits[i]);
  for (std::size_t i = 0; i < p.class_probs.size(); ++i) p.class_probs[i] = sigmoid(result.class_logits[i]);
  return p;
}

std::size_t count_parameters(UNet& model, ParamScope scope) {
  std::size_t total = 0;
  for (const nn::Parameter* p : model.parameters(scope)) {
    if (p->trainable()) total += p->numel();
  }
  return total;
}

}  // namespace tlunet::model
