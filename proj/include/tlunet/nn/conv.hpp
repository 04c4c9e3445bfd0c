#pragma once

#include "tlunet/nn/layer.hpp"

namespace tlunet::nn {

/// 2-d convolution (square kernel, symmetric zero padding), lowered to
/// GEMM over bounded column tiles so memory stays flat at 256×1600.
class Conv2d : public Layer {
 public:
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride = 1,
         int padding = 0, bool bias = false);

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Parameter*>& out) override;

  int in_channels() const noexcept { return in_; }
  int out_channels() const noexcept { return out_; }
  int output_size(int input) const noexcept { return (input + 2 * pad_ - k_) / stride_ + 1; }

  Parameter& weight() noexcept { return weight_; }
  Parameter* bias() noexcept { return has_bias_ ? &bias_ : nullptr; }

 private:
  struct Tile {
    int n0, n1;      // images [n0, n1)
    int row0, row1;  // output rows [row0, row1) of each image
  };
  std::vector<Tile> plan_tiles(int batch, int out_h, int out_w) const;
  void im2col(const Tensor& x, const Tile& tile, int out_w, double* col) const;
  void col2im(const double* col, const Tile& tile, int out_w, Tensor& dx) const;

  int in_, out_, k_, stride_, pad_;
  bool has_bias_;
  Parameter weight_;
  Parameter bias_;
  Tensor input_;
  std::vector<double> col_;
  std::vector<double> buf_;
};

}  // namespace tlunet::nn
