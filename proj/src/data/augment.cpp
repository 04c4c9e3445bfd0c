#include "tlunet/data/augment.hpp"

#include <algorithm>

#include "tlunet/error.hpp"

namespace tlunet::data {

namespace {

template <typename T>
void flip_plane(T* plane, int height, int width, FlipDecision flips) {
  if (flips.horizontal) {
    for (int r = 0; r < height; ++r) std::reverse(plane + r * width, plane + (r + 1) * width);
  }
  if (flips.vertical) {
    for (int r = 0; r < height / 2; ++r) {
      std::swap_ranges(plane + r * width, plane + (r + 1) * width,
                       plane + (height - 1 - r) * width);
    }
  }
}

}  // namespace

void apply_flips(Image& image, MaskSet& masks, FlipDecision flips) {
  if (image.height != masks.height() || image.width != masks.width()) {
    throw ValidationError("image and masks differ in shape");
  }
  for (int c = 0; c < Image::kChannels; ++c) {
    flip_plane(image.pixels.data() + c * image.plane(), image.height, image.width, flips);
  }
  for (int m = 0; m < masks.classes(); ++m) {
    flip_plane(masks.mask(m).data(), masks.height(), masks.width(), flips);
  }
}

AugmentedPair augment_pair(const Image& image, const MaskSet& masks, Rng& rng) {
  if (image.height != masks.height() || image.width != masks.width()) {
    throw ValidationError("image and masks differ in shape");
  }
  AugmentedPair out{image, masks, {}};
  out.flips.horizontal = rng.coin(0.5);
  out.flips.vertical = rng.coin(0.5);
  apply_flips(out.image, out.masks, out.flips);
  return out;
}

}  // namespace tlunet::data
