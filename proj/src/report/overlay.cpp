#include "tlunet/report/overlay.hpp"

#include <array>

#include <fmt/format.h>
#include <opencv2/imgproc.hpp>

#include "tlunet/data/dataset.hpp"
#include "tlunet/error.hpp"
#include "tlunet/metrics/metrics.hpp"

namespace tlunet::report {

namespace {

// RGB
constexpr std::array<std::array<int, 3>, 4> kClassColors{{
    {230, 25, 75},
    {60, 180, 75},
    {0, 130, 200},
    {255, 225, 25},
}};

cv::Scalar bgr(const std::array<int, 3>& rgb, bool light) {
  auto ch = [&](int v) { return light ? (v + 255) / 2 : v; };
  return cv::Scalar(ch(rgb[2]), ch(rgb[1]), ch(rgb[0]));
}

cv::Mat mask_mat(const data::MaskSet& masks, int m, int scale) {
  cv::Mat small(masks.height(), masks.width(), CV_8U);
  const auto src = masks.mask(m);
  std::copy(src.begin(), src.end(), small.data);
  cv::Mat big;
  cv::resize(small, big, cv::Size(), scale, scale, cv::INTER_NEAREST);
  return big;
}

void draw_outline(cv::Mat& roi, const cv::Mat& mask, const cv::Scalar& color, int thickness) {
  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(mask.clone(), contours, cv::RETR_LIST, cv::CHAIN_APPROX_NONE);
  cv::drawContours(roi, contours, -1, color, thickness);
}

}  // namespace

int overlay_scale(int width) { return width >= 512 ? 1 : (511 + width) / width; }

data::Image overlay_masks(const data::Image& image, const data::MaskSet& truth, const data::MaskSet& predicted) {
  if (truth.height() != image.height || truth.width() != image.width || !(truth.height() == predicted.height() &&
      truth.width() == predicted.width() && truth.classes() == predicted.classes())) {
    throw ValidationError("overlay: image and mask shapes differ");
  }
  const int scale = overlay_scale(image.width);
  const int h = image.height * scale;
  const int w = image.width * scale;

  cv::Mat src(image.height, image.width, CV_8UC3);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      src.at<cv::Vec3b>(r, c) = {image.at(2, r, c), image.at(1, r, c), image.at(0, r, c)};
    }
  }
  cv::Mat canvas(kTitleBand + h, w, CV_8UC3, cv::Scalar(32, 32, 32));
  cv::Mat roi = canvas(cv::Rect(0, kTitleBand, w, h));
  cv::resize(src, roi, cv::Size(w, h), 0, 0, cv::INTER_NEAREST);

  std::string title = "DICE";
  for (int m = 0; m < truth.classes(); ++m) {
    const auto& color = kClassColors[m % kClassColors.size()];
    if (!truth.empty(m)) draw_outline(roi, mask_mat(truth, m, scale), bgr(color, false), 2);
    if (!predicted.empty(m)) draw_outline(roi, mask_mat(predicted, m, scale), bgr(color, true), 1);
    title += fmt::format("  {}:{:.3f}", m + 1, metrics::dice(truth.mask(m), predicted.mask(m)));
  }
  cv::putText(canvas, title, cv::Point(6, kTitleBand - 9), cv::FONT_HERSHEY_SIMPLEX, 0.5,
              cv::Scalar(255, 255, 255), 1, cv::LINE_8);

  data::Image out(canvas.rows, canvas.cols);
  for (int r = 0; r < canvas.rows; ++r) {
    for (int c = 0; c < canvas.cols; ++c) {
      const auto& px = canvas.at<cv::Vec3b>(r, c);
      out.at(0, r, c) = px[2];
      out.at(1, r, c) = px[1];
      out.at(2, r, c) = px[0];
    }
  }
  return out;
}

void write_overlay(const std::filesystem::path& path, const data::Image& image, const data::MaskSet& truth,
                   const data::MaskSet& predicted) {
  data::save_image(path, overlay_masks(image, truth, predicted));
}

}  // namespace tlunet::report
