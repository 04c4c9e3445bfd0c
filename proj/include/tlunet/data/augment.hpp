#pragma once

#include "tlunet/data/image.hpp"
#include "tlunet/rng.hpp"

namespace tlunet::data {

struct FlipDecision {
  bool horizontal = false;  // (r, c) -> (r, W-1-c)
  bool vertical = false;    // (r, c) -> (H-1-r, c)
};

/// Applies the flips in place, identically to the image and every mask.
void apply_flips(Image& image, MaskSet& masks, FlipDecision flips);

struct AugmentedPair {
  Image image;
  MaskSet masks;
  FlipDecision flips;
};

/// Draws each flip independently with probability 0.5 (horizontal first).
AugmentedPair augment_pair(const Image& image, const MaskSet& masks, Rng& rng);

}  // namespace tlunet::data
