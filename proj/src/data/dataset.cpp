#include "tlunet/data/dataset.hpp"

#include <algorithm>
#include <set>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tlunet/error.hpp"
#include "tlunet/io.hpp"

namespace tlunet::data {

Dataset::Dataset(int classes, std::vector<ImageRecord> records)
    : classes_(classes), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].image_id, i).second) {
      throw ValidationError("duplicate image id " + records_[i].image_id);
    }
  }
}

const ImageRecord& Dataset::get(const std::string& image_id) const {
  auto it = index_.find(image_id);
  if (it == index_.end()) throw ValidationError("unknown image id " + image_id);
  return records_[it->second];
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.image_id);
  return out;
}

Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot read image " + path.string());
  if (bgr.depth() != CV_8U) throw IoError("image is not 8-bit: " + path.string());
  Image img(bgr.rows, bgr.cols);
  for (int r = 0; r < bgr.rows; ++r) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c) {
      img.at(0, r, c) = row[c][2];
      img.at(1, r, c) = row[c][1];
      img.at(2, r, c) = row[c][0];
    }
  }
  return img;
}

void save_image(const std::filesystem::path& path, const Image& image) {
  const bool gray = std::equal(image.pixels.begin(), image.pixels.begin() + image.plane(),
                               image.pixels.begin() + image.plane()) &&
                    std::equal(image.pixels.begin(), image.pixels.begin() + image.plane(),
                               image.pixels.begin() + 2 * image.plane());
  cv::Mat out;
  if (gray) {
    out = cv::Mat(image.height, image.width, CV_8UC1);
    std::copy_n(image.pixels.data(), image.plane(), out.data);
  } else {
    out = cv::Mat(image.height, image.width, CV_8UC3);
    for (int r = 0; r < image.height; ++r) {
      cv::Vec3b* row = out.ptr<cv::Vec3b>(r);
      for (int c = 0; c < image.width; ++c) {
        row[c] = {image.at(2, r, c), image.at(1, r, c), image.at(0, r, c)};
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), out)) throw IoError("cannot write image " + path.string());
}

ImageRecord make_record(std::string image_id, Image pixels,
                        const std::vector<const Annotation*>& annotations, int classes) {
  ImageRecord rec;
  rec.image_id = std::move(image_id);
  rec.masks = MaskSet(classes, pixels.height, pixels.width);
  for (const Annotation* a : annotations) {
    if (a->class_id < 1 || a->class_id > classes) {
      throw ValidationError("class " + std::to_string(a->class_id) + " out of range");
    }
    const auto decoded = rle_decode(a->rle, pixels.height, pixels.width);
    auto dst = rec.masks.mask(a->class_id - 1);
    for (std::size_t i = 0; i < decoded.size(); ++i) dst[i] |= decoded[i];
  }
  rec.labels = rec.masks.labels();
  rec.pixels = std::move(pixels);
  return rec;
}

Dataset load_dataset(const std::filesystem::path& annotations_csv,
                     const std::filesystem::path& image_dir, int classes) {
  const auto annotations = parse_annotations(read_text_file(annotations_csv), classes);
  if (!std::filesystem::is_directory(image_dir)) {
    throw IoError("image directory not found: " + image_dir.string());
  }
  static const std::set<std::string> kExtensions = {".png", ".jpg", ".jpeg", ".bmp", ".tif",
                                                    ".tiff"};
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(image_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (kExtensions.contains(ext)) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, std::vector<const Annotation*>> by_image;
  for (const auto& a : annotations) by_image[a.image_id].push_back(&a);
  for (const auto& [id, rows] : by_image) {
    if (!std::filesystem::exists(image_dir / id)) {
      throw IoError("annotated image missing from " + image_dir.string() + ": " + id);
    }
  }

  std::vector<ImageRecord> records;
  records.reserve(files.size());
  for (const auto& file : files) {
    std::string id = file.filename().string();
    auto it = by_image.find(id);
    static const std::vector<const Annotation*> kNone;
    records.push_back(make_record(id, load_image(file), it == by_image.end() ? kNone : it->second,
                                  classes));
  }
  return Dataset(classes, std::move(records));
}

}  // namespace tlunet::data
