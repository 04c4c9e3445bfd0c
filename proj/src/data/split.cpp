#include "tlunet/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tlunet/error.hpp"
#include "tlunet/io.hpp"
#include "tlunet/rng.hpp"

namespace tlunet::data {

DatasetSplit build_splits(std::span<const std::string> image_ids, std::uint64_t seed,
                          SplitFractions fractions) {
  if (image_ids.empty()) throw ValidationError("cannot split an empty record list");
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0 ||
      std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9) {
    throw ValidationError("split fractions must be non-negative and sum to 1");
  }
  std::vector<std::string> ids(image_ids.begin(), image_ids.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ValidationError("duplicate image id in split input");
  }
  Rng rng(seed);
  rng.shuffle(ids);

  const auto n = static_cast<double>(ids.size());
  const auto n_val = static_cast<std::size_t>(std::floor(fractions.val * n + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(fractions.test * n + 1e-9));
  const std::size_t n_train = ids.size() - n_val - n_test;

  DatasetSplit split;
  split.seed = seed;
  split.fractions = fractions;
  split.train.assign(ids.begin(), ids.begin() + n_train);
  split.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  split.test.assign(ids.begin() + n_train + n_val, ids.end());
  return split;
}

DatasetSplit subsample_training(const DatasetSplit& split, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("training fraction must lie in (0, 1]");
  }
  const auto keep = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(split.train.size()) + 1e-9));
  if (keep == 0) throw ValidationError("training fraction leaves no training records");
  if (keep == split.train.size()) return split;

  std::vector<std::size_t> order(split.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(split.seed, 0x5ab5a3b1e));
  rng.shuffle(order);
  order.resize(keep);
  std::sort(order.begin(), order.end());

  DatasetSplit out = split;
  out.train.clear();
  for (std::size_t i : order) out.train.push_back(split.train[i]);
  return out;
}

std::string format_split_manifest(const DatasetSplit& split) {
  std::string out;
  auto section = [&out](const char* name, const std::vector<std::string>& ids) {
    out += name;
    out += '\n';
    for (const auto& id : ids) {
      out += id;
      out += '\n';
    }
  };
  section("TRAIN", split.train);
  section("VAL", split.val);
  section("TEST", split.test);
  return out;
}

DatasetSplit parse_split_manifest(std::string_view text) {
  DatasetSplit split;
  std::vector<std::string>* current = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "TRAIN") {
      current = &split.train;
    } else if (line == "VAL") {
      current = &split.val;
    } else if (line == "TEST") {
      current = &split.test;
    } else if (current == nullptr) {
      throw ParseError(line_no, "image id before any TRAIN/VAL/TEST section");
    } else {
      current->push_back(std::move(line));
    }
  }
  return split;
}

void write_split_manifest(const std::filesystem::path& path, const DatasetSplit& split) {
  write_text_file(path, format_split_manifest(split));
}

DatasetSplit read_split_manifest(const std::filesystem::path& path) {
  return parse_split_manifest(read_text_file(path));
}

}  // namespace tlunet::data
