#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tlunet::data {

struct SplitFractions {
  double train = 0.75;
  double val = 0.125;
  double test = 0.125;
  friend bool operator==(const SplitFractions&, const SplitFractions&) = default;
};

/// Image-level partition of a dataset, by image id.
struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  SplitFractions fractions;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

/// Seeded shuffle of the ids (sorted first, so the result depends only on
/// the id set and the seed). val and test get floor(fraction * n) entries,
/// train takes the remainder.
DatasetSplit build_splits(std::span<const std::string> image_ids, std::uint64_t seed,
                          SplitFractions fractions = {});

/// Keeps floor(fraction * |train|) training ids chosen by seeded sampling,
/// in their original order. val/test are untouched.
DatasetSplit subsample_training(const DatasetSplit& split, double fraction);

/// Manifest text: sections headed TRAIN / VAL / TEST, one id per line.
std::string format_split_manifest(const DatasetSplit& split);
DatasetSplit parse_split_manifest(std::string_view text);

void write_split_manifest(const std::filesystem::path& path, const DatasetSplit& split);
DatasetSplit read_split_manifest(const std::filesystem::path& path);

}  // namespace tlunet::data
