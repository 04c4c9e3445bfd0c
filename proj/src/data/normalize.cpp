#include "tlunet/data/normalize.hpp"

#include <cmath>
#include <sstream>

#include "tlunet/error.hpp"
#include "tlunet/io.hpp"

namespace tlunet::data {

NormStats compute_norm_stats(std::span<const Image* const> images) {
  if (images.empty()) throw ValidationError("normalization needs at least one training image");
  NormStats stats;
  for (int c = 0; c < Image::kChannels; ++c) {
    long double sum = 0;
    std::size_t count = 0;
    for (const Image* img : images) {
      const std::uint8_t* p = img->pixels.data() + c * img->plane();
      for (std::size_t i = 0; i < img->plane(); ++i) sum += p[i];
      count += img->plane();
    }
    if (count == 0) throw ValidationError("normalization over zero pixels");
    const long double mean = sum / static_cast<long double>(count);
    long double sq = 0;
    for (const Image* img : images) {
      const std::uint8_t* p = img->pixels.data() + c * img->plane();
      for (std::size_t i = 0; i < img->plane(); ++i) {
        const long double d = p[i] - mean;
        sq += d * d;
      }
    }
    const double stddev = static_cast<double>(std::sqrt(sq / static_cast<long double>(count)));
    if (!(stddev > 0.0)) {
      throw DegenerateDataError("channel " + std::to_string(c) + " has zero variance");
    }
    stats.mean[c] = static_cast<double>(mean);
    stats.std[c] = stddev;
  }
  return stats;
}

void normalize_into(const Image& image, const NormStats& stats, Tensor& batch, int index) {
  if (batch.c() != Image::kChannels || batch.h() != image.height || batch.w() != image.width) {
    throw ValidationError("image " + std::to_string(image.height) + "x" +
                          std::to_string(image.width) + " does not fit batch " +
                          batch.shape().str());
  }
  for (int c = 0; c < Image::kChannels; ++c) {
    const std::uint8_t* src = image.pixels.data() + c * image.plane();
    double* dst = batch.plane(index, c);
    const double inv = 1.0 / stats.std[c];
    for (std::size_t i = 0; i < image.plane(); ++i) dst[i] = (src[i] - stats.mean[c]) * inv;
  }
}

void write_norm_stats(const std::filesystem::path& path, const NormStats& stats) {
  std::string text;
  for (int c = 0; c < 3; ++c) {
    text += "mean_" + std::to_string(c) + " = " + format_real(stats.mean[c], 9) + "\n";
  }
  for (int c = 0; c < 3; ++c) {
    text += "std_" + std::to_string(c) + " = " + format_real(stats.std[c], 9) + "\n";
  }
  write_text_file(path, text);
}

NormStats read_norm_stats(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  NormStats stats;
  int seen = 0;
  std::string key, eq;
  double value = 0;
  while (in >> key >> eq >> value) {
    if (eq != "=" || key.size() < 5) throw ValidationError("bad norm stats line in " + path.string());
    const int c = key.back() - '0';
    if (c < 0 || c > 2) throw ValidationError("bad channel in norm stats key " + key);
    if (key.starts_with("mean_")) {
      stats.mean[c] = value;
    } else if (key.starts_with("std_")) {
      if (!(value > 0)) throw DegenerateDataError("non-positive std in " + path.string());
      stats.std[c] = value;
    } else {
      throw ValidationError("unknown norm stats key " + key);
    }
    ++seen;
  }
  if (seen != 6) throw ValidationError("incomplete norm stats in " + path.string());
  return stats;
}

}  // namespace tlunet::data
