#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tlunet::data {

struct Run {
  std::int64_t start = 0;   // 1-indexed, column-major pixel index
  std::int64_t length = 0;
  friend bool operator==(const Run&, const Run&) = default;
};

/// Run-length encoded mask: space-separated (start, length) pairs over the
/// column-major, 1-indexed pixel order (index p is row (p-1) mod H,
/// column (p-1) / H).
class RleString {
 public:
  RleString() = default;

  /// Validates token syntax: even count, positive integers, strictly
  /// increasing starts, non-overlapping runs.
  static RleString parse(std::string_view text);
  static RleString from_runs(std::vector<Run> runs);

  const std::vector<Run>& runs() const noexcept { return runs_; }
  bool empty() const noexcept { return runs_.empty(); }
  std::int64_t pixel_count() const noexcept;
  /// Minimal number of maximal runs (no two runs touch).
  bool canonical() const noexcept;
  std::string str() const;

  friend bool operator==(const RleString&, const RleString&) = default;

 private:
  std::vector<Run> runs_;
};

/// Decodes to a row-major height×width binary mask.
std::vector<std::uint8_t> rle_decode(const RleString& rle, int height, int width);
/// Encodes a row-major binary mask into canonical form.
RleString rle_encode(std::span<const std::uint8_t> mask, int height, int width);

}  // namespace tlunet::data
