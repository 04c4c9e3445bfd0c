#include "tlunet/nn/layers.hpp"

#include <cmath>
#include <limits>

#include "tlunet/error.hpp"

namespace tlunet::nn {

BatchNorm2d::BatchNorm2d(const std::string& name, int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum) {
  const Shape layout{1, channels, 1, 1};
  weight_ = make_parameter(name + ".weight", {channels}, ParamKind::kNormScale, layout);
  bias_ = make_parameter(name + ".bias", {channels}, ParamKind::kNormShift, layout);
  running_mean_ = make_parameter(name + ".running_mean", {channels}, ParamKind::kRunningMean, layout);
  running_var_ = make_parameter(name + ".running_var", {channels}, ParamKind::kRunningVar, layout);
  weight_.value.fill(1.0);
  running_var_.value.fill(1.0);
}

void BatchNorm2d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

Tensor BatchNorm2d::forward(const Tensor& x) {
  if (x.c() != channels_) {
    throw ValidationError(weight_.name + ": channel mismatch " + x.shape().str());
  }
  Tensor y(x.shape());
  const std::size_t plane = x.shape().plane();
  const std::size_t count = plane * x.n();
  if (!training_) {
    for (int c = 0; c < channels_; ++c) {
      const double inv = 1.0 / std::sqrt(running_var_.value[c] + eps_);
      const double scale = weight_.value[c] * inv;
      const double shift = bias_.value[c] - running_mean_.value[c] * scale;
      for (int n = 0; n < x.n(); ++n) {
        const double* src = x.plane(n, c);
        double* dst = y.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * scale + shift;
      }
    }
    normalized_ = Tensor();
    return y;
  }

  normalized_ = Tensor(x.shape());
  inv_std_.assign(channels_, 0.0);
  for (int c = 0; c < channels_; ++c) {
    double sum = 0;
    for (int n = 0; n < x.n(); ++n) {
      const double* src = x.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) sum += src[i];
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0;
    for (int n = 0; n < x.n(); ++n) {
      const double* src = x.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) sq += (src[i] - mean) * (src[i] - mean);
    }
    const double var = sq / static_cast<double>(count);
    const double inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv;
    for (int n = 0; n < x.n(); ++n) {
      const double* src = x.plane(n, c);
      double* xhat = normalized_.plane(n, c);
      double* dst = y.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) {
        xhat[i] = (src[i] - mean) * inv;
        dst[i] = xhat[i] * weight_.value[c] + bias_.value[c];
      }
    }
    const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
    running_mean_.value[c] = (1 - momentum_) * running_mean_.value[c] + momentum_ * mean;
    running_var_.value[c] = (1 - momentum_) * running_var_.value[c] + momentum_ * unbiased;
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  require_cache(!normalized_.empty(), "BatchNorm2d");
  Tensor dx(grad_out.shape());
  const std::size_t plane = grad_out.shape().plane();
  const double count = static_cast<double>(plane * grad_out.n());
  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0;
    double sum_gx = 0;
    for (int n = 0; n < grad_out.n(); ++n) {
      const double* g = grad_out.plane(n, c);
      const double* xhat = normalized_.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xhat[i];
      }
    }
    bias_.grad[c] += sum_g;
    weight_.grad[c] += sum_gx;
    const double k = weight_.value[c] * inv_std_[c] / count;
    for (int n = 0; n < grad_out.n(); ++n) {
      const double* g = grad_out.plane(n, c);
      const double* xhat = normalized_.plane(n, c);
      double* d = dx.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) d[i] = k * (count * g[i] - sum_g - xhat[i] * sum_gx);
    }
  }
  return dx;
}

Tensor ReLU::forward(const Tensor& x) {
  Tensor y(x.shape());
  const double* src = x.data();
  double* dst = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = src[i] > 0 ? src[i] : 0.0;
  output_ = training_ ? y : Tensor();
  return y;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  require_cache(!output_.empty(), "ReLU");
  Tensor dx(grad_out.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = output_[i] > 0 ? grad_out[i] : 0.0;
  return dx;
}

Tensor MaxPool2d::forward(const Tensor& x) {
  const int out_h = (x.h() + 2 * pad_ - k_) / stride_ + 1;
  const int out_w = (x.w() + 2 * pad_ - k_) / stride_ + 1;
  Tensor y(x.n(), x.c(), out_h, out_w);
  if (training_) argmax_.assign(y.size(), 0);
  input_shape_ = x.shape();
  std::size_t out_index = 0;
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox, ++out_index) {
          double best = -std::numeric_limits<double>::infinity();
          std::uint32_t best_at = 0;
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= x.h()) continue;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= x.w()) continue;
              const double v = src[iy * x.w() + ix];
              if (v > best) {
                best = v;
                best_at = static_cast<std::uint32_t>(iy * x.w() + ix);
              }
            }
          }
          y[out_index] = best;
          if (training_) argmax_[out_index] = best_at;
        }
      }
    }
  }
  if (!training_) argmax_.clear();
  return y;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
  require_cache(argmax_.size() == grad_out.size() && !argmax_.empty(), "MaxPool2d");
  Tensor dx(input_shape_);
  const std::size_t per = grad_out.shape().plane();
  for (int n = 0; n < grad_out.n(); ++n) {
    for (int c = 0; c < grad_out.c(); ++c) {
      double* d = dx.plane(n, c);
      const std::size_t base = grad_out.offset(n, c, 0, 0);
      for (std::size_t i = 0; i < per; ++i) d[argmax_[base + i]] += grad_out[base + i];
    }
  }
  return dx;
}

Tensor AvgPool2d::forward(const Tensor& x) {
  const int out_h = x.h() / k_;
  const int out_w = x.w() / k_;
  input_shape_ = x.shape();
  Tensor y(x.n(), x.c(), out_h, out_w);
  const double inv = 1.0 / (k_ * k_);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
          double s = 0;
          for (int ky = 0; ky < k_; ++ky) {
            for (int kx = 0; kx < k_; ++kx) s += x.at(n, c, oy * k_ + ky, ox * k_ + kx);
          }
          y.at(n, c, oy, ox) = s * inv;
        }
      }
    }
  }
  return y;
}

Tensor AvgPool2d::backward(const Tensor& grad_out) {
  Tensor dx(input_shape_);
  const double inv = 1.0 / (k_ * k_);
  for (int n = 0; n < grad_out.n(); ++n) {
    for (int c = 0; c < grad_out.c(); ++c) {
      for (int oy = 0; oy < grad_out.h(); ++oy) {
        for (int ox = 0; ox < grad_out.w(); ++ox) {
          const double g = grad_out.at(n, c, oy, ox) * inv;
          for (int ky = 0; ky < k_; ++ky) {
            for (int kx = 0; kx < k_; ++kx) dx.at(n, c, oy * k_ + ky, ox * k_ + kx) += g;
          }
        }
      }
    }
  }
  return dx;
}

Tensor Upsample2x::forward(const Tensor& x) {
  Tensor y(x.n(), x.c(), x.h() * 2, x.w() * 2);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double* dst = y.plane(n, c);
      const int ow = x.w() * 2;
      for (int iy = 0; iy < x.h(); ++iy) {
        double* row = dst + static_cast<std::size_t>(2 * iy) * ow;
        for (int ix = 0; ix < x.w(); ++ix) {
          const double v = src[iy * x.w() + ix];
          row[2 * ix] = v;
          row[2 * ix + 1] = v;
        }
        std::copy(row, row + ow, row + ow);
      }
    }
  }
  return y;
}

Tensor Upsample2x::backward(const Tensor& grad_out) {
  Tensor dx(grad_out.n(), grad_out.c(), grad_out.h() / 2, grad_out.w() / 2);
  for (int n = 0; n < dx.n(); ++n) {
    for (int c = 0; c < dx.c(); ++c) {
      for (int iy = 0; iy < dx.h(); ++iy) {
        for (int ix = 0; ix < dx.w(); ++ix) {
          dx.at(n, c, iy, ix) = grad_out.at(n, c, 2 * iy, 2 * ix) +
                                grad_out.at(n, c, 2 * iy, 2 * ix + 1) +
                                grad_out.at(n, c, 2 * iy + 1, 2 * ix) +
                                grad_out.at(n, c, 2 * iy + 1, 2 * ix + 1);
        }
      }
    }
  }
  return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
  input_shape_ = x.shape();
  Tensor y(x.n(), x.c(), 1, 1);
  const std::size_t plane = x.shape().plane();
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double s = 0;
      for (std::size_t i = 0; i < plane; ++i) s += src[i];
      y.at(n, c, 0, 0) = s / static_cast<double>(plane);
    }
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  Tensor dx(input_shape_);
  const std::size_t plane = input_shape_.plane();
  for (int n = 0; n < dx.n(); ++n) {
    for (int c = 0; c < dx.c(); ++c) {
      const double g = grad_out.at(n, c, 0, 0) / static_cast<double>(plane);
      double* d = dx.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) d[i] = g;
    }
  }
  return dx;
}

Linear::Linear(const std::string& name, int in_features, int out_features)
    : in_(in_features), out_(out_features) {
  weight_ = make_parameter(name + ".weight", {out_, in_}, ParamKind::kLinearWeight,
                           Shape{out_, in_, 1, 1});
  bias_ = make_parameter(name + ".bias", {out_}, ParamKind::kBias, Shape{1, out_, 1, 1});
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

Tensor Linear::forward(const Tensor& x) {
  if (x.c() != in_ || x.h() != 1 || x.w() != 1) {
    throw ValidationError(weight_.name + ": expected N×" + std::to_string(in_) + "×1×1, got " +
                          x.shape().str());
  }
  Tensor y(x.n(), out_, 1, 1);
  for (int n = 0; n < x.n(); ++n) {
    for (int o = 0; o < out_; ++o) {
      double s = bias_.value[o];
      for (int i = 0; i < in_; ++i) s += weight_.value[static_cast<std::size_t>(o) * in_ + i] * x.at(n, i, 0, 0);
      y.at(n, o, 0, 0) = s;
    }
  }
  input_ = training_ ? x : Tensor();
  return y;
}

Tensor Linear::backward(const Tensor& grad_out) {
  require_cache(!input_.empty(), "Linear");
  Tensor dx(input_.shape());
  for (int n = 0; n < grad_out.n(); ++n) {
    for (int o = 0; o < out_; ++o) {
      const double g = grad_out.at(n, o, 0, 0);
      bias_.grad[o] += g;
      for (int i = 0; i < in_; ++i) {
        weight_.grad[static_cast<std::size_t>(o) * in_ + i] += g * input_.at(n, i, 0, 0);
        dx.at(n, i, 0, 0) += g * weight_.value[static_cast<std::size_t>(o) * in_ + i];
      }
    }
  }
  return dx;
}

}  // namespace tlunet::nn
