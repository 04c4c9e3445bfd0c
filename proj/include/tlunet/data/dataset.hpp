#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tlunet/data/annotations.hpp"
#include "tlunet/data/image.hpp"

namespace tlunet::data {

/// In-memory collection of annotated images keyed by image id.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int classes, std::vector<ImageRecord> records);

  int classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<ImageRecord>& records() const noexcept { return records_; }
  const ImageRecord& get(const std::string& image_id) const;
  bool contains(const std::string& image_id) const { return index_.contains(image_id); }
  std::vector<std::string> ids() const;

 private:
  int classes_ = 0;
  std::vector<ImageRecord> records_;
  std::map<std::string, std::size_t> index_;
};

/// Loads an 8-bit grayscale or color file as a 3-channel RGB image.
Image load_image(const std::filesystem::path& path);
/// Writes a PNG (grayscale when all channels agree).
void save_image(const std::filesystem::path& path, const Image& image);

/// Builds a record from decoded annotations; labels follow mask emptiness.
ImageRecord make_record(std::string image_id, Image pixels,
                        const std::vector<const Annotation*>& annotations, int classes);

/// Every image file in `image_dir` becomes a record; images without rows in
/// the CSV get all-zero masks. Rows naming a missing image are an IO error.
Dataset load_dataset(const std::filesystem::path& annotations_csv,
                     const std::filesystem::path& image_dir, int classes = 4);

}  // namespace tlunet::data
