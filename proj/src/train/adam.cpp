#include "tlunet/train/adam.hpp"

#include <cmath>

#include "tlunet/error.hpp"

namespace tlunet::train {

void adam_step(std::span<nn::Parameter* const> params, AdamState& state, const AdamConfig& cfg) {
  std::vector<nn::Parameter*> trainable;
  for (nn::Parameter* p : params) {
    if (p->trainable()) trainable.push_back(p);
  }
  for (const nn::Parameter* p : trainable) {
    for (double g : p->grad.values()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + p->name);
    }
  }
  if (state.m.empty()) {
    for (const nn::Parameter* p : trainable) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  if (state.m.size() != trainable.size()) {
    throw ValidationError("optimizer state does not match the parameter list");
  }

  ++state.step;
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < trainable.size(); ++t) {
    nn::Parameter& p = *trainable[t];
    Tensor& m = state.m[t];
    Tensor& v = state.v[t];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.value[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace tlunet::train
