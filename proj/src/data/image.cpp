#include "tlunet/data/image.hpp"

#include <algorithm>

namespace tlunet::data {

Image::Image(int h, int w, std::uint8_t fill)
    : height(h), width(w), pixels(static_cast<std::size_t>(kChannels) * h * w, fill) {}

MaskSet::MaskSet(int classes, int height, int width)
    : classes_(classes),
      height_(height),
      width_(width),
      data_(static_cast<std::size_t>(classes) * height * width, 0) {}

bool MaskSet::empty(int m) const {
  auto view = mask(m);
  return std::none_of(view.begin(), view.end(), [](std::uint8_t v) { return v != 0; });
}

std::vector<std::uint8_t> MaskSet::labels() const {
  std::vector<std::uint8_t> out(classes_);
  for (int m = 0; m < classes_; ++m) out[m] = empty(m) ? 0 : 1;
  return out;
}

}  // namespace tlunet::data
