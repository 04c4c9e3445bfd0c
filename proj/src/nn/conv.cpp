#include "tlunet/nn/conv.hpp"

#include <algorithm>
#include <cstring>

#include <Eigen/Core>

#include "tlunet/error.hpp"

namespace tlunet::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Upper bound on column-buffer elements (32 MiB of doubles).
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

}  // namespace

Conv2d::Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
               int padding, bool bias)
    : in_(in_channels),
      out_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(padding),
      has_bias_(bias) {
  if (in_ < 1 || out_ < 1 || k_ < 1 || stride_ < 1 || pad_ < 0) {
    throw ConstructionError("invalid convolution geometry for " + name);
  }
  weight_ = make_parameter(name + ".weight", {out_, in_, k_, k_}, ParamKind::kConvWeight,
                           Shape{out_, in_, k_, k_});
  if (has_bias_) {
    bias_ = make_parameter(name + ".bias", {out_}, ParamKind::kBias, Shape{1, out_, 1, 1});
  }
}

void Conv2d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

std::vector<Conv2d::Tile> Conv2d::plan_tiles(int batch, int out_h, int out_w) const {
  const std::size_t k_rows = static_cast<std::size_t>(in_) * k_ * k_;
  const std::size_t per_image = k_rows * out_h * out_w;
  std::vector<Tile> tiles;
  if (per_image <= kColumnBudget) {
    const int group = static_cast<int>(std::clamp<std::size_t>(kColumnBudget / per_image, 1, batch));
    for (int n = 0; n < batch; n += group) tiles.push_back({n, std::min(batch, n + group), 0, out_h});
  } else {
    const int rows = static_cast<int>(std::max<std::size_t>(1, kColumnBudget / (k_rows * out_w)));
    for (int n = 0; n < batch; ++n) {
      for (int r = 0; r < out_h; r += rows) tiles.push_back({n, n + 1, r, std::min(out_h, r + rows)});
    }
  }
  return tiles;
}

void Conv2d::im2col(const Tensor& x, const Tile& tile, int out_w, double* col) const {
  const int in_h = x.h();
  const int in_w = x.w();
  const int rows = tile.row1 - tile.row0;
  const std::size_t cols = static_cast<std::size_t>(tile.n1 - tile.n0) * rows * out_w;
  for (int ci = 0; ci < in_; ++ci) {
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        double* dst = col + static_cast<std::size_t>((ci * k_ + ky) * k_ + kx) * cols;
        // valid ox satisfy 0 <= ox*stride - pad + kx < in_w
        int ox_lo = 0;
        while (ox_lo < out_w && ox_lo * stride_ - pad_ + kx < 0) ++ox_lo;
        int ox_hi = out_w;
        while (ox_hi > ox_lo && (ox_hi - 1) * stride_ - pad_ + kx >= in_w) --ox_hi;
        for (int n = tile.n0; n < tile.n1; ++n) {
          const double* src = x.plane(n, ci);
          for (int oy = tile.row0; oy < tile.row1; ++oy, dst += out_w) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= in_h) {
              std::fill(dst, dst + out_w, 0.0);
              continue;
            }
            const double* row = src + static_cast<std::size_t>(iy) * in_w;
            std::fill(dst, dst + ox_lo, 0.0);
            if (stride_ == 1) {
              std::memcpy(dst + ox_lo, row + ox_lo - pad_ + kx,
                          static_cast<std::size_t>(ox_hi - ox_lo) * sizeof(double));
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) dst[ox] = row[ox * stride_ - pad_ + kx];
            }
            std::fill(dst + ox_hi, dst + out_w, 0.0);
          }
        }
      }
    }
  }
}

void Conv2d::col2im(const double* col, const Tile& tile, int out_w, Tensor& dx) const {
  const int in_h = dx.h();
  const int in_w = dx.w();
  const int rows = tile.row1 - tile.row0;
  const std::size_t cols = static_cast<std::size_t>(tile.n1 - tile.n0) * rows * out_w;
  for (int ci = 0; ci < in_; ++ci) {
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        const double* src = col + static_cast<std::size_t>((ci * k_ + ky) * k_ + kx) * cols;
        int ox_lo = 0;
        while (ox_lo < out_w && ox_lo * stride_ - pad_ + kx < 0) ++ox_lo;
        int ox_hi = out_w;
        while (ox_hi > ox_lo && (ox_hi - 1) * stride_ - pad_ + kx >= in_w) --ox_hi;
        for (int n = tile.n0; n < tile.n1; ++n) {
          double* dst = dx.plane(n, ci);
          for (int oy = tile.row0; oy < tile.row1; ++oy, src += out_w) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= in_h) continue;
            double* row = dst + static_cast<std::size_t>(iy) * in_w;
            for (int ox = ox_lo; ox < ox_hi; ++ox) row[ox * stride_ - pad_ + kx] += src[ox];
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.c() != in_) {
    throw ValidationError(weight_.name + ": expected " + std::to_string(in_) +
                          " input channels, got " + x.shape().str());
  }
  const int out_h = output_size(x.h());
  const int out_w = output_size(x.w());
  if (out_h < 1 || out_w < 1) throw ValidationError(weight_.name + ": input too small");
  Tensor y(x.n(), out_, out_h, out_w);
  const std::size_t k_rows = static_cast<std::size_t>(in_) * k_ * k_;
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  ConstMapMat w(weight_.value.data(), out_, static_cast<Eigen::Index>(k_rows));

  const bool pointwise = k_ == 1 && stride_ == 1 && pad_ == 0;
  if (pointwise) {
    for (int n = 0; n < x.n(); ++n) {
      ConstMapMat in(x.plane(n, 0), in_, static_cast<Eigen::Index>(plane));
      MapMat out(y.plane(n, 0), out_, static_cast<Eigen::Index>(plane));
      out.noalias() = w * in;
    }
  } else {
    for (const Tile& tile : plan_tiles(x.n(), out_h, out_w)) {
      const int rows = tile.row1 - tile.row0;
      const std::size_t cols = static_cast<std::size_t>(tile.n1 - tile.n0) * rows * out_w;
      col_.resize(k_rows * cols);
      buf_.resize(static_cast<std::size_t>(out_) * cols);
      im2col(x, tile, out_w, col_.data());
      MapMat result(buf_.data(), out_, static_cast<Eigen::Index>(cols));
      result.noalias() = w * ConstMapMat(col_.data(), static_cast<Eigen::Index>(k_rows),
                                         static_cast<Eigen::Index>(cols));
      const std::size_t seg = static_cast<std::size_t>(rows) * out_w;
      for (int co = 0; co < out_; ++co) {
        const double* src = buf_.data() + co * cols;
        for (int n = tile.n0; n < tile.n1; ++n, src += seg) {
          std::memcpy(y.plane(n, co) + static_cast<std::size_t>(tile.row0) * out_w, src,
                      seg * sizeof(double));
        }
      }
    }
  }
  if (has_bias_) {
    for (int n = 0; n < y.n(); ++n) {
      for (int co = 0; co < out_; ++co) {
        double* p = y.plane(n, co);
        const double b = bias_.value[co];
        for (std::size_t i = 0; i < plane; ++i) p[i] += b;
      }
    }
  }
  if (training_) {
    input_ = x;
  } else {
    input_ = Tensor();
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  require_cache(!input_.empty(), "Conv2d");
  const Tensor& x = input_;
  const int out_h = grad_out.h();
  const int out_w = grad_out.w();
  const std::size_t k_rows = static_cast<std::size_t>(in_) * k_ * k_;
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  Tensor dx(x.shape());
  ConstMapMat w(weight_.value.data(), out_, static_cast<Eigen::Index>(k_rows));
  MapMat dw(weight_.grad.data(), out_, static_cast<Eigen::Index>(k_rows));

  if (has_bias_) {
    for (int n = 0; n < grad_out.n(); ++n) {
      for (int co = 0; co < out_; ++co) {
        const double* g = grad_out.plane(n, co);
        double s = 0;
        for (std::size_t i = 0; i < plane; ++i) s += g[i];
        bias_.grad[co] += s;
      }
    }
  }

  const bool pointwise = k_ == 1 && stride_ == 1 && pad_ == 0;
  if (pointwise) {
    for (int n = 0; n < x.n(); ++n) {
      ConstMapMat in(x.plane(n, 0), in_, static_cast<Eigen::Index>(plane));
      ConstMapMat g(grad_out.plane(n, 0), out_, static_cast<Eigen::Index>(plane));
      MapMat din(dx.plane(n, 0), in_, static_cast<Eigen::Index>(plane));
      dw.noalias() += g * in.transpose();
      din.noalias() = w.transpose() * g;
    }
    return dx;
  }

  for (const Tile& tile : plan_tiles(x.n(), out_h, out_w)) {
    const int rows = tile.row1 - tile.row0;
    const std::size_t cols = static_cast<std::size_t>(tile.n1 - tile.n0) * rows * out_w;
    col_.resize(k_rows * cols);
    buf_.resize(static_cast<std::size_t>(out_) * cols);
    im2col(x, tile, out_w, col_.data());
    const std::size_t seg = static_cast<std::size_t>(rows) * out_w;
    for (int co = 0; co < out_; ++co) {
      double* dst = buf_.data() + co * cols;
      for (int n = tile.n0; n < tile.n1; ++n, dst += seg) {
        std::memcpy(dst, grad_out.plane(n, co) + static_cast<std::size_t>(tile.row0) * out_w,
                    seg * sizeof(double));
      }
    }
    ConstMapMat g(buf_.data(), out_, static_cast<Eigen::Index>(cols));
    MapMat col(col_.data(), static_cast<Eigen::Index>(k_rows), static_cast<Eigen::Index>(cols));
    dw.noalias() += g * col.transpose();
    col.noalias() = w.transpose() * g;
    col2im(col_.data(), tile, out_w, dx);
  }
  return dx;
}

}  // namespace tlunet::nn
