#include "tlunet/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tlunet/io.hpp"
#include "tlunet/rng.hpp"

namespace tlunet::data {

namespace {

constexpr int kClasses = 4;

struct Canvas {
  int height;
  int width;
  std::vector<double> intensity;
  MaskSet masks;

  Canvas(int h, int w) : height(h), width(w), intensity(static_cast<std::size_t>(h) * w), masks(kClasses, h, w) {}

  bool inside(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }

  // Later defects own their pixels exclusively.
  void paint(int cls, int r, int c, double value) {
    if (!inside(r, c)) return;
    intensity[static_cast<std::size_t>(r) * width + c] = value;
    for (int m = 0; m < kClasses; ++m) masks.at(m, r, c) = (m == cls) ? 1 : 0;
  }
};

void draw_background(Canvas& cv, Rng& rng) {
  const double base = rng.uniform(105.0, 145.0);
  const double streak_amp = rng.uniform(3.0, 8.0);
  const double streak_freq = rng.uniform(0.15, 0.45);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int r = 0; r < cv.height; ++r) {
    const double streak = streak_amp * std::sin(streak_freq * r + phase);
    for (int c = 0; c < cv.width; ++c) {
      cv.intensity[static_cast<std::size_t>(r) * cv.width + c] = base + streak + 4.0 * rng.normal();
    }
  }
}

double local_base(const Canvas& cv, int r, int c) {
  return cv.intensity[static_cast<std::size_t>(r) * cv.width + c];
}

void draw_rectangle(Canvas& cv, Rng& rng) {
  const int h = rng.range(std::max(3, cv.height / 8), std::max(4, cv.height / 3));
  const int w = rng.range(std::max(3, cv.width / 6), std::max(4, cv.width * 3 / 8));
  const int r0 = rng.range(0, cv.height - h);
  const int c0 = rng.range(0, cv.width - w);
  const double shade = rng.uniform(45.0, 65.0);
  for (int r = r0; r < r0 + h; ++r) {
    for (int c = c0; c < c0 + w; ++c) cv.paint(0, r, c, local_base(cv, r, c) - shade);
  }
}

void draw_line(Canvas& cv, Rng& rng) {
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double length = rng.uniform(0.4, 0.8) * std::min(cv.height, cv.width);
  const double cr = rng.uniform(0.25, 0.75) * cv.height;
  const double cc = rng.uniform(0.25, 0.75) * cv.width;
  const double dr = std::sin(angle);
  const double dc = std::cos(angle);
  const double shade = rng.uniform(55.0, 75.0);
  const int steps = static_cast<int>(length * 2);
  for (int s = 0; s <= steps; ++s) {
    const double t = -length / 2 + length * s / steps;
    const int r = static_cast<int>(std::lround(cr + t * dr));
    const int c = static_cast<int>(std::lround(cc + t * dc));
    for (int k = 0; k < 2; ++k) {
      // two-pixel width across the dominant direction
      const int rr = std::abs(dc) >= std::abs(dr) ? r + k : r;
      const int c2 = std::abs(dc) >= std::abs(dr) ? c : c + k;
      if (cv.inside(rr, c2) && cv.masks.at(1, rr, c2) == 0) {
        cv.paint(1, rr, c2, local_base(cv, rr, c2) + shade);
      }
    }
  }
}

void draw_blob(Canvas& cv, Rng& rng) {
  const double ry = rng.uniform(0.07, 0.14) * cv.height;
  const double rx = rng.uniform(0.07, 0.14) * cv.width;
  const double cr = rng.uniform(ry, cv.height - ry);
  const double cc = rng.uniform(rx, cv.width - rx);
  const double wobble_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double shade = rng.uniform(45.0, 60.0);
  for (int r = 0; r < cv.height; ++r) {
    for (int c = 0; c < cv.width; ++c) {
      const double y = (r - cr) / ry;
      const double x = (c - cc) / rx;
      const double theta = std::atan2(y, x);
      const double radius = 1.0 + 0.15 * std::sin(3.0 * theta + wobble_phase);
      if (x * x + y * y <= radius * radius) cv.paint(2, r, c, local_base(cv, r, c) + shade);
    }
  }
}

void draw_speckle(Canvas& cv, Rng& rng) {
  const int region_h = std::max(6, cv.height * 3 / 8);
  const int region_w = std::max(6, cv.width * 3 / 8);
  const int r0 = rng.range(0, cv.height - region_h);
  const int c0 = rng.range(0, cv.width - region_w);
  const int dots = rng.range(8, 14);
  const double shade = rng.uniform(60.0, 80.0);
  for (int d = 0; d < dots; ++d) {
    const int r = r0 + rng.range(0, region_h - 2);
    const int c = c0 + rng.range(0, region_w - 2);
    for (int dr = 0; dr < 2; ++dr) {
      for (int dc = 0; dc < 2; ++dc) cv.paint(3, r + dr, c + dc, local_base(cv, r + dr, c + dc) - shade);
    }
  }
}

}  // namespace

std::vector<ImageRecord> generate_synthetic_records(const SyntheticSpec& spec) {
  std::vector<ImageRecord> records;
  records.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(i)));
    Canvas canvas(spec.height, spec.width);
    draw_background(canvas, rng);
    std::array<bool, kClasses> present{};
    for (int m = 0; m < kClasses; ++m) present[m] = rng.coin(spec.defect_probability) && spec.kinds[m];
    if (present[0]) draw_rectangle(canvas, rng);
    if (present[2]) draw_blob(canvas, rng);
    if (present[3]) draw_speckle(canvas, rng);
    if (present[1]) draw_line(canvas, rng);

    ImageRecord rec;
    rec.image_id = fmt::format("syn_{:05d}.png", i);
    rec.pixels = Image(spec.height, spec.width);
    for (std::size_t p = 0; p < canvas.intensity.size(); ++p) {
      const auto v = static_cast<std::uint8_t>(std::clamp(std::lround(canvas.intensity[p]), 0L, 255L));
      for (int c = 0; c < Image::kChannels; ++c) rec.pixels.pixels[c * rec.pixels.plane() + p] = v;
    }
    rec.masks = std::move(canvas.masks);
    rec.labels = rec.masks.labels();
    records.push_back(std::move(rec));
  }
  return records;
}

void write_corpus(const std::filesystem::path& dir, const std::vector<ImageRecord>& records) {
  std::vector<Annotation> rows;
  for (const auto& rec : records) {
    save_image(dir / "images" / rec.image_id, rec.pixels);
    for (int m = 0; m < rec.masks.classes(); ++m) {
      RleString rle = rle_encode(rec.masks.mask(m), rec.masks.height(), rec.masks.width());
      if (!rle.empty()) rows.push_back({rec.image_id, m + 1, std::move(rle)});
    }
  }
  write_text_file(dir / "train.csv", format_annotations(rows));
}

}  // namespace tlunet::data
