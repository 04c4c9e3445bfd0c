#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tlunet::data {

/// 8-bit, 3-channel image stored planar (channel, row, column).
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // 3 * height * width

  Image() = default;
  Image(int h, int w, std::uint8_t fill = 0);

  static constexpr int kChannels = 3;
  std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::uint8_t& at(int channel, int row, int col) noexcept {
    return pixels[channel * plane() + static_cast<std::size_t>(row) * width + col];
  }
  std::uint8_t at(int channel, int row, int col) const noexcept {
    return pixels[channel * plane() + static_cast<std::size_t>(row) * width + col];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

/// N binary masks sharing one H×W grid, stored plane by plane (row-major).
class MaskSet {
 public:
  MaskSet() = default;
  MaskSet(int classes, int height, int width);

  int classes() const noexcept { return classes_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(height_) * width_; }

  std::span<std::uint8_t> mask(int m) noexcept {
    return {data_.data() + m * plane(), plane()};
  }
  std::span<const std::uint8_t> mask(int m) const noexcept {
    return {data_.data() + m * plane(), plane()};
  }
  std::uint8_t& at(int m, int row, int col) noexcept {
    return data_[m * plane() + static_cast<std::size_t>(row) * width_ + col];
  }
  std::uint8_t at(int m, int row, int col) const noexcept {
    return data_[m * plane() + static_cast<std::size_t>(row) * width_ + col];
  }
  std::span<const std::uint8_t> raw() const noexcept { return data_; }

  bool empty(int m) const;
  /// labels[m] = 1 iff mask m has at least one set pixel.
  std::vector<std::uint8_t> labels() const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;

 private:
  int classes_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

struct ImageRecord {
  std::string image_id;
  Image pixels;
  MaskSet masks;
  std::vector<std::uint8_t> labels;
};

}  // namespace tlunet::data
