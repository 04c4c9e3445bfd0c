#pragma once

#include <filesystem>

#include "tlunet/data/image.hpp"

namespace tlunet::report {

/// Upscales the image to at least 512 pixels wide (integer factor), draws
/// ground-truth contours (2 px, class color) and predicted contours (1 px,
/// lighter class color), and puts per-class DICE in a title band above.
/// With empty masks the image area is the plain upscaled input.
data::Image overlay_masks(const data::Image& image, const data::MaskSet& truth,
                          const data::MaskSet& predicted);

/// Height of the title band in the rendered image.
inline constexpr int kTitleBand = 28;
/// Integer factor overlay_masks() upscales by for a given width.
int overlay_scale(int width);

void write_overlay(const std::filesystem::path& path, const data::Image& image,
                   const data::MaskSet& truth, const data::MaskSet& predicted);

}  // namespace tlunet::report
