#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "tlunet/metrics/metrics.hpp"

namespace tlunet::report {

inline constexpr int kHistogramBins = 20;
inline constexpr double kHistogramLow = -1.0;
inline constexpr double kHistogramHigh = 1.0;

struct ImageDelta {
  std::string image_id;
  double dice_a = 0;  // mean over classes
  double dice_b = 0;
  double delta = 0;   // a - b
};

struct Comparison {
  std::vector<ImageDelta> images;  // sorted by image id
  std::array<std::size_t, kHistogramBins> histogram{};
  double improved_fraction = 0;  // count(delta > 0) / count
  double mean_delta = 0;
  double mean_abs_delta = 0;
  double mean_dice_a = 0;
  double mean_dice_b = 0;
  double relative_delta = 0;  // (mean_dice_a - mean_dice_b) / mean_dice_b
};

/// Bin of `delta` among 20 uniform bins over [-1, 1]; 1 falls in the last.
int histogram_bin(double delta);

/// Per-image mean-DICE differences a - b. Both reports must cover the same
/// image ids, otherwise a validation error is raised.
Comparison compare(const metrics::MetricReport& a, const metrics::MetricReport& b);

std::string format_deltas_csv(const Comparison& c);
std::string format_histogram_csv(const Comparison& c);
std::string format_comparison_json(const Comparison& c, const std::string& label_a,
                                   const std::string& label_b);
/// deltas.csv, histogram.csv, comparison.json.
void write_comparison(const std::filesystem::path& dir, const Comparison& c,
                      const std::string& label_a, const std::string& label_b);

}  // namespace tlunet::report
