#pragma once

#include <array>
#include <filesystem>
#include <span>

#include "tlunet/data/image.hpp"
#include "tlunet/tensor.hpp"

namespace tlunet::data {

/// Per-channel intensity statistics (0..255 units).
struct NormStats {
  std::array<double, 3> mean{};
  std::array<double, 3> std{};
  friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// Per-channel mean and population standard deviation over every pixel of
/// the given (training) images. A zero-variance channel is degenerate.
NormStats compute_norm_stats(std::span<const Image* const> images);

/// Writes (pixel - mean) / std of `image` into batch slot `index` of a
/// B×3×H×W tensor.
void normalize_into(const Image& image, const NormStats& stats, Tensor& batch, int index);

void write_norm_stats(const std::filesystem::path& path, const NormStats& stats);
NormStats read_norm_stats(const std::filesystem::path& path);

}  // namespace tlunet::data
