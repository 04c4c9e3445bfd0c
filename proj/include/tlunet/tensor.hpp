#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tlunet {

/// Dense 4-d array in NCHW order. Lower-rank data uses trailing unit dims
/// (a B×N matrix is stored as B×N×1×1).
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
  std::string str() const;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(int n, int c, int h, int w, double fill = 0.0) : Tensor(Shape{n, c, h, w}, fill) {}

  const Shape& shape() const noexcept { return shape_; }
  int n() const noexcept { return shape_.n; }
  int c() const noexcept { return shape_.c; }
  int h() const noexcept { return shape_.h; }
  int w() const noexcept { return shape_.w; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::size_t offset(int n, int c, int h, int w) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  double& at(int n, int c, int h, int w) noexcept { return data_[offset(n, c, h, w)]; }
  double at(int n, int c, int h, int w) const noexcept { return data_[offset(n, c, h, w)]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Pointer to the H×W plane of (n, c).
  double* plane(int n, int c) noexcept { return data_.data() + offset(n, c, 0, 0); }
  const double* plane(int n, int c) const noexcept { return data_.data() + offset(n, c, 0, 0); }

  void fill(double v);
  void zero() { fill(0.0); }
  Tensor& operator+=(const Tensor& other);

  /// Copies images [begin, end) along the batch axis.
  Tensor slice_batch(int begin, int end) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Channel-wise concatenation of tensors sharing N, H, W.
Tensor concat_channels(std::span<const Tensor* const> parts);
/// Copies channels [begin, end) of `t`.
Tensor slice_channels(const Tensor& t, int begin, int end);
/// Adds `src` into channels [begin, begin + src.c()) of `dst`.
void add_into_channels(Tensor& dst, const Tensor& src, int begin);

}  // namespace tlunet
