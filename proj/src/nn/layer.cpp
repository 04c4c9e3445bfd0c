#include "tlunet/nn/layer.hpp"

#include <cmath>

#include "tlunet/error.hpp"

namespace tlunet::nn {

Parameter make_parameter(std::string name, std::vector<std::int64_t> dims, ParamKind kind,
                         Shape layout) {
  Parameter p;
  p.name = std::move(name);
  p.dims = std::move(dims);
  p.kind = kind;
  p.value = Tensor(layout);
  p.grad = Tensor(layout);
  return p;
}

void initialize(Parameter& p, Rng& rng) {
  switch (p.kind) {
    case ParamKind::kConvWeight:
    case ParamKind::kLinearWeight: {
      const double fan_in = static_cast<double>(p.value.c()) * p.value.h() * p.value.w();
      const double bound = std::sqrt(6.0 / fan_in);
      for (double& v : p.value.values()) v = rng.uniform(-bound, bound);
      break;
    }
    case ParamKind::kBias:
    case ParamKind::kNormShift:
    case ParamKind::kRunningMean:
      p.value.fill(0.0);
      break;
    case ParamKind::kNormScale:
    case ParamKind::kRunningVar:
      p.value.fill(1.0);
      break;
  }
  p.grad.zero();
}

void Layer::require_cache(bool ok, const char* layer) const {
  if (!ok) {
    throw ValidationError(std::string(layer) +
                          ": backward() needs a preceding training-mode forward()");
  }
}

Tensor Sequential::forward(const Tensor& x) {
  if (layers_.empty()) return x;
  Tensor h = layers_.front()->forward(x);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  if (layers_.empty()) return grad_out;
  Tensor g = layers_.back()->backward(grad_out);
  for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

void Sequential::collect(std::vector<Parameter*>& out) {
  for (auto& l : layers_) l->collect(out);
}

void Sequential::set_training(bool on) {
  training_ = on;
  for (auto& l : layers_) l->set_training(on);
}

}  // namespace tlunet::nn
