#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tlunet/rng.hpp"
#include "tlunet/tensor.hpp"

namespace tlunet::nn {

/// Role of a tensor, which drives random initialization.
enum class ParamKind {
  kConvWeight,
  kLinearWeight,
  kBias,
  kNormScale,
  kNormShift,
  kRunningMean,
  kRunningVar,
};

/// Named tensor owned by a layer. `dims` is the logical shape written to
/// weight archives (e.g. {C} for batch-norm vectors); `value` holds the
/// same elements in whatever 4-d layout the layer computes with.
struct Parameter {
  std::string name;
  std::vector<std::int64_t> dims;
  ParamKind kind = ParamKind::kBias;
  Tensor value;
  Tensor grad;

  /// Running statistics are state, not trainable scalars.
  bool trainable() const noexcept {
    return kind != ParamKind::kRunningMean && kind != ParamKind::kRunningVar;
  }
  std::size_t numel() const noexcept { return value.size(); }
};

Parameter make_parameter(std::string name, std::vector<std::int64_t> dims, ParamKind kind,
                         Shape layout);

/// Fan-in scaled uniform (bound sqrt(6 / fan_in)) for weights, zeros for
/// biases and shifts, ones for scales, identity running statistics.
void initialize(Parameter& p, Rng& rng);

/// A differentiable stage. forward() caches what backward() needs when the
/// layer is in training mode; backward() must follow the matching forward()
/// and accumulates into parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void collect(std::vector<Parameter*>& out) { (void)out; }
  virtual void set_training(bool on) { training_ = on; }
  bool training() const noexcept { return training_; }

 protected:
  void require_cache(bool ok, const char* layer) const;
  bool training_ = true;
};

using LayerPtr = std::unique_ptr<Layer>;

class Sequential : public Layer {
 public:
  Sequential() = default;
  Sequential& add(LayerPtr layer) {
    layers_.push_back(std::move(layer));
    return *this;
  }
  template <typename T, typename... Args>
  T& emplace(Args&&... args) {
    auto layer = std::make_unique<T>(std::forward<Args>(args)...);
    T& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }
  bool empty() const noexcept { return layers_.empty(); }

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Parameter*>& out) override;
  void set_training(bool on) override;

 private:
  std::vector<LayerPtr> layers_;
};

}  // namespace tlunet::nn
