#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "tlunet/data/dataset.hpp"

namespace tlunet::data {

/// Steel-like synthetic corpus: streaked, noisy gray background with four
/// defect types (1 filled dark rectangle, 2 thin bright line, 3 bright
/// blob, 4 dark speckle cluster). Each type appears independently with
/// `defect_probability`.
struct SyntheticSpec {
  int count = 200;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 1;
  double defect_probability = 0.4;
  /// Which of the four defect types may appear.
  std::array<bool, 4> kinds{true, true, true, true};
};

std::vector<ImageRecord> generate_synthetic_records(const SyntheticSpec& spec);

/// Writes `<dir>/images/<id>.png` and `<dir>/train.csv`.
void write_corpus(const std::filesystem::path& dir, const std::vector<ImageRecord>& records);

}  // namespace tlunet::data
