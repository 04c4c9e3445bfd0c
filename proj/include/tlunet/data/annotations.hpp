#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tlunet/data/rle.hpp"

namespace tlunet::data {

struct Annotation {
  std::string image_id;
  int class_id = 0;  // 1-based
  RleString rle;
};

/// Parses an `ImageId,ClassId,EncodedPixels` CSV. Rows with an empty
/// encoding carry no defect and produce no entry.
std::vector<Annotation> parse_annotations(std::string_view csv_text, int num_classes = 4);

/// Serializes entries in the same layout (header included).
std::string format_annotations(const std::vector<Annotation>& entries);

}  // namespace tlunet::data
