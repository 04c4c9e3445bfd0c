#include "tlunet/report/compare.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "json.hpp"
#include "tlunet/error.hpp"
#include "tlunet/io.hpp"

namespace tlunet::report {

int histogram_bin(double delta) {
  if (!std::isfinite(delta) || delta < kHistogramLow || delta > kHistogramHigh) {
    throw ValidationError("DICE difference outside [-1, 1]: " + format_real(delta));
  }
  const double width = (kHistogramHigh - kHistogramLow) / kHistogramBins;
  const int bin = static_cast<int>(std::floor((delta - kHistogramLow) / width + 1e-9));
  return std::clamp(bin, 0, kHistogramBins - 1);
}

Comparison compare(const metrics::MetricReport& a, const metrics::MetricReport& b) {
  std::map<std::string, double> dice_b;
  for (const auto& img : b.images) dice_b[img.image_id] = img.mean_dice();
  std::map<std::string, double> dice_a;
  for (const auto& img : a.images) dice_a[img.image_id] = img.mean_dice();
  if (dice_a.size() != a.images.size() || dice_b.size() != b.images.size()) {
    throw ValidationError("report lists an image twice");
  }
  if (dice_a.size() != dice_b.size() ||
      !std::equal(dice_a.begin(), dice_a.end(), dice_b.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw ValidationError("reports were evaluated on different test images");
  }
  if (dice_a.empty()) throw ValidationError("cannot compare empty reports");

  Comparison c;
  std::size_t improved = 0;
  for (const auto& [id, da] : dice_a) {
    const double db = dice_b.at(id);
    const double d = da - db;
    c.images.push_back({id, da, db, d});
    c.histogram[histogram_bin(d)] += 1;
    improved += d > 0 ? 1 : 0;
    c.mean_delta += d;
    c.mean_abs_delta += std::abs(d);
    c.mean_dice_a += da;
    c.mean_dice_b += db;
  }
  const auto n = static_cast<double>(c.images.size());
  c.improved_fraction = static_cast<double>(improved) / n;
  c.mean_delta /= n;
  c.mean_abs_delta /= n;
  c.mean_dice_a /= n;
  c.mean_dice_b /= n;
  c.relative_delta = c.mean_dice_b > 0 ? (c.mean_dice_a - c.mean_dice_b) / c.mean_dice_b
                                       : std::numeric_limits<double>::quiet_NaN();
  return c;
}

std::string format_deltas_csv(const Comparison& c) {
  std::string out = "image_id,dice_a,dice_b,delta\n";
  for (const auto& d : c.images) {
    out += fmt::format("{},{},{},{}\n", d.image_id, format_real(d.dice_a, 8), format_real(d.dice_b, 8),
                       format_real(d.delta, 8));
  }
  return out;
}

std::string format_histogram_csv(const Comparison& c) {
  const double width = (kHistogramHigh - kHistogramLow) / kHistogramBins;
  std::string out = "bin_low,bin_high,count\n";
  for (int i = 0; i < kHistogramBins; ++i) {
    out += fmt::format("{},{},{}\n", format_real(kHistogramLow + i * width, 2),
                       format_real(kHistogramLow + (i + 1) * width, 2), c.histogram[i]);
  }
  return out;
}

std::string format_comparison_json(const Comparison& c, const std::string& label_a, const std::string& label_b) {
  nlohmann::ordered_json j;
  j["a"] = label_a;
  j["b"] = label_b;
  j["images"] = c.images.size();
  j["improved_fraction"] = format_real(c.improved_fraction, 8);
  j["mean_delta"] = format_real(c.mean_delta, 8);
  j["mean_abs_delta"] = format_real(c.mean_abs_delta, 8);
  j["mean_dice_a"] = format_real(c.mean_dice_a, 8);
  j["mean_dice_b"] = format_real(c.mean_dice_b, 8);
  j["relative_delta"] = format_real(c.relative_delta, 8);
  return j.dump(2) + "\n";
}

void write_comparison(const std::filesystem::path& dir, const Comparison& c, const std::string& label_a,
                      const std::string& label_b) {
  write_text_file(dir / "deltas.csv", format_deltas_csv(c));
  write_text_file(dir / "histogram.csv", format_histogram_csv(c));
  write_text_file(dir / "comparison.json", format_comparison_json(c, label_a, label_b));
}

}  // namespace tlunet::report
