#include "tlunet/data/rle.hpp"

#include <charconv>

#include "tlunet/error.hpp"

namespace tlunet::data {

namespace {

void check_order(const std::vector<Run>& runs) {
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].start < 1 || runs[i].length < 1) {
      throw DecodeError("RLE tokens must be positive integers");
    }
    if (i > 0) {
      const Run& prev = runs[i - 1];
      if (runs[i].start <= prev.start) throw DecodeError("RLE starts must strictly increase");
      if (runs[i].start < prev.start + prev.length) {
        throw DecodeError("overlapping RLE runs at start " + std::to_string(runs[i].start));
      }
    }
  }
}

}  // namespace

RleString RleString::parse(std::string_view text) {
  std::vector<std::int64_t> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + j, value);
    if (ec != std::errc{} || ptr != text.data() + j) {
      throw DecodeError("invalid RLE token '" + std::string(text.substr(i, j - i)) + "'");
    }
    tokens.push_back(value);
    i = j;
  }
  if (tokens.size() % 2 != 0) throw DecodeError("RLE has an odd number of tokens");
  std::vector<Run> runs;
  runs.reserve(tokens.size() / 2);
  for (std::size_t k = 0; k < tokens.size(); k += 2) runs.push_back({tokens[k], tokens[k + 1]});
  return from_runs(std::move(runs));
}

RleString RleString::from_runs(std::vector<Run> runs) {
  check_order(runs);
  RleString out;
  out.runs_ = std::move(runs);
  return out;
}

std::int64_t RleString::pixel_count() const noexcept {
  std::int64_t total = 0;
  for (const Run& r : runs_) total += r.length;
  return total;
}

bool RleString::canonical() const noexcept {
  for (std::size_t i = 1; i < runs_.size(); ++i) {
    if (runs_[i].start == runs_[i - 1].start + runs_[i - 1].length) return false;
  }
  return true;
}

std::string RleString::str() const {
  std::string out;
  for (const Run& r : runs_) {
    if (!out.empty()) out += ' ';
    out += std::to_string(r.start);
    out += ' ';
    out += std::to_string(r.length);
  }
  return out;
}

std::vector<std::uint8_t> rle_decode(const RleString& rle, int height, int width) {
  if (height <= 0 || width <= 0) throw ValidationError("mask dimensions must be positive");
  const std::int64_t area = static_cast<std::int64_t>(height) * width;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(area), 0);
  for (const Run& r : rle.runs()) {
    if (r.start + r.length - 1 > area) {
      throw DecodeError("RLE run " + std::to_string(r.start) + "+" + std::to_string(r.length) +
                        " overruns image area " + std::to_string(area));
    }
    for (std::int64_t p = r.start - 1; p < r.start - 1 + r.length; ++p) {
      const std::int64_t row = p % height;
      const std::int64_t col = p / height;
      mask[static_cast<std::size_t>(row * width + col)] = 1;
    }
  }
  return mask;
}

RleString rle_encode(std::span<const std::uint8_t> mask, int height, int width) {
  const std::int64_t area = static_cast<std::int64_t>(height) * width;
  if (height <= 0 || width <= 0 || static_cast<std::int64_t>(mask.size()) != area) {
    throw ValidationError("mask size does not match " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
  std::vector<Run> runs;
  std::int64_t run_start = -1;
  for (std::int64_t p = 0; p < area; ++p) {
    const std::uint8_t v = mask[static_cast<std::size_t>((p % height) * width + p / height)];
    if (v > 1) throw ValidationError("mask is not binary (value " + std::to_string(v) + ")");
    if (v == 1 && run_start < 0) run_start = p;
    if (v == 0 && run_start >= 0) {
      runs.push_back({run_start + 1, p - run_start});
      run_start = -1;
    }
  }
  if (run_start >= 0) runs.push_back({run_start + 1, area - run_start});
  return RleString::from_runs(std::move(runs));
}

}  // namespace tlunet::data
