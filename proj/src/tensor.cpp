#include "tlunet/tensor.hpp"

#include <algorithm>
#include <cstring>

#include "tlunet/error.hpp"

namespace tlunet {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
         std::to_string(w);
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0) {
    throw ValidationError("negative tensor dimension " + shape.str());
  }
  data_.assign(shape.numel(), fill);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw ValidationError("tensor add shape mismatch: " + shape_.str() + " vs " +
                          other.shape_.str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor Tensor::slice_batch(int begin, int end) const {
  Tensor out(end - begin, shape_.c, shape_.h, shape_.w);
  const std::size_t per = static_cast<std::size_t>(shape_.c) * shape_.plane();
  std::copy_n(data_.data() + per * begin, per * (end - begin), out.data());
  return out;
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw ValidationError("concat of zero tensors");
  const Shape& first = parts.front()->shape();
  int channels = 0;
  for (const Tensor* p : parts) {
    const Shape& s = p->shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ValidationError("concat shape mismatch: " + first.str() + " vs " + s.str());
    }
    channels += s.c;
  }
  Tensor out(first.n, channels, first.h, first.w);
  const std::size_t plane = first.plane();
  for (int n = 0; n < first.n; ++n) {
    double* dst = out.plane(n, 0);
    for (const Tensor* p : parts) {
      const std::size_t count = plane * p->c();
      std::memcpy(dst, p->plane(n, 0), count * sizeof(double));
      dst += count;
    }
  }
  return out;
}

Tensor slice_channels(const Tensor& t, int begin, int end) {
  Tensor out(t.n(), end - begin, t.h(), t.w());
  const std::size_t count = t.shape().plane() * (end - begin);
  for (int n = 0; n < t.n(); ++n) {
    std::memcpy(out.plane(n, 0), t.plane(n, begin), count * sizeof(double));
  }
  return out;
}

void add_into_channels(Tensor& dst, const Tensor& src, int begin) {
  const std::size_t count = src.shape().plane() * src.c();
  for (int n = 0; n < src.n(); ++n) {
    double* d = dst.plane(n, begin);
    const double* s = src.plane(n, 0);
    for (std::size_t i = 0; i < count; ++i) d[i] += s[i];
  }
}

}  // namespace tlunet
