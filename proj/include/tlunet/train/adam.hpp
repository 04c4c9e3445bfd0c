#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tlunet/nn/layer.hpp"

namespace tlunet::train {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.99;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// First/second moment estimates, one pair per trainable tensor.
struct AdamState {
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam update of every trainable tensor from its
/// accumulated gradient. A non-finite gradient aborts the step before any
/// tensor or the state changes (NumericError).
void adam_step(std::span<nn::Parameter* const> params, AdamState& state, const AdamConfig& cfg);

}  // namespace tlunet::train
