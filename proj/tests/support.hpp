#pragma once

#include <cmath>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <string>
#include <vector>

#include "tlunet/data/dataset.hpp"
#include "tlunet/data/synthetic.hpp"
#include "tlunet/model/unet.hpp"
#include "tlunet/objective/loss.hpp"
#include "tlunet/rng.hpp"
#include "tlunet/tensor.hpp"

namespace tlunet::testing {

/// Fresh scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("tlunet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(shape);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Max over entries of |a - n| / max(|a|, |n|, floor).
inline double max_rel_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                            double floor = 1e-6) {
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

struct GradientCheck {
  double max_relative_error = 0;
  std::size_t checked = 0;
};

/// Joint-loss gradient of every trainable scalar (training mode) against
/// central differences with step h.
inline GradientCheck model_gradient_check(model::UNet& net, const Tensor& input,
                                          const objective::Targets& targets,
                                          const objective::LossConfig& cfg, double h = 1e-6) {
  net.set_training(true);
  net.zero_grad();
  auto out = net.forward(input);
  objective::LossGradients grads;
  objective::joint_loss_from_logits(out.pixel_logits, out.class_logits, targets, cfg, &grads);
  net.backward(grads.pixel, grads.cls);

  auto loss_at = [&]() {
    auto o = net.forward(input);
    return objective::joint_loss_from_logits(o.pixel_logits, o.class_logits, targets, cfg).total();
  };
  std::vector<double> analytic;
  std::vector<double> numeric;
  for (nn::Parameter* p : net.parameters()) {
    if (!p->trainable()) continue;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss_at();
      p->value[i] = saved - h;
      const double down = loss_at();
      p->value[i] = saved;
      analytic.push_back(p->grad[i]);
      numeric.push_back((up - down) / (2 * h));
    }
  }
  return {max_rel_error(analytic, numeric, 1e-6), analytic.size()};
}

/// Random normalized inputs plus random (but label-consistent) targets.
inline std::pair<Tensor, objective::Targets> random_problem(const model::ModelConfig& cfg, int batch,
                                                            Rng& rng) {
  Tensor x = random_tensor({batch, 3, cfg.height, cfg.width}, rng);
  objective::Targets t{Tensor(batch, cfg.num_classes, cfg.height, cfg.width),
                       Tensor(batch, cfg.num_classes, 1, 1)};
  for (int n = 0; n < batch; ++n) {
    for (int m = 0; m < cfg.num_classes; ++m) {
      const bool present = rng.coin(0.5);
      bool any = false;
      double* plane = t.masks.plane(n, m);
      for (std::size_t i = 0; i < t.masks.shape().plane(); ++i) {
        plane[i] = present && rng.coin(0.3) ? 1.0 : 0.0;
        any = any || plane[i] != 0;
      }
      t.labels.at(n, m, 0, 0) = any ? 1.0 : 0.0;
    }
  }
  return {std::move(x), std::move(t)};
}

/// Tiny model used by gradient and behaviour tests: stages=2, 8x8 input.
inline model::ModelConfig tiny_config(model::EncoderFamily family, int size = 8) {
  model::ModelConfig cfg;
  cfg.encoder = family;
  cfg.stages = 2;
  cfg.height = size;
  cfg.width = size;
  cfg.encoder_width = 4;
  cfg.decoder_channels = {8, 4};
  cfg.seed = 3;
  return cfg;
}

/// Small synthetic dataset held in memory.
inline data::Dataset synthetic_dataset(int count, int size, std::uint64_t seed) {
  data::SyntheticSpec spec;
  spec.count = count;
  spec.height = size;
  spec.width = size;
  spec.seed = seed;
  return data::Dataset(4, data::generate_synthetic_records(spec));
}

}  // namespace tlunet::testing
