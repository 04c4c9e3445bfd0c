#include "tlunet/data/annotations.hpp"

#include <charconv>
#include <set>
#include <utility>

#include "tlunet/error.hpp"

namespace tlunet::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(begin)));
      return fields;
    }
    fields.push_back(trim(line.substr(begin, comma - begin)));
    begin = comma + 1;
  }
}

}  // namespace

std::vector<Annotation> parse_annotations(std::string_view csv_text, int num_classes) {
  if (csv_text.starts_with("\xEF\xBB\xBF")) csv_text.remove_prefix(3);

  std::vector<Annotation> out;
  std::set<std::pair<std::string, int>> seen;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= csv_text.size()) {
    std::size_t eol = csv_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv_text.size();
    std::string_view line = trim(csv_text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "ImageId" || fields[1] != "ClassId" ||
          fields[2] != "EncodedPixels") {
        throw ParseError(line_no, "expected header 'ImageId,ClassId,EncodedPixels'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty ImageId");

    int class_id = 0;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), class_id);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size()) {
      throw ParseError(line_no, "ClassId '" + std::string(fields[1]) + "' is not an integer");
    }
    if (class_id < 1 || class_id > num_classes) {
      throw ValidationError("line " + std::to_string(line_no) + ": ClassId " +
                            std::to_string(class_id) + " outside 1.." +
                            std::to_string(num_classes));
    }

    RleString rle;
    try {
      rle = RleString::parse(fields[2]);
    } catch (const DecodeError& e) {
      throw ParseError(line_no, e.what());
    }
    if (rle.empty()) continue;

    std::string image_id(fields[0]);
    if (!seen.emplace(image_id, class_id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate entry for " +
                            image_id + " class " + std::to_string(class_id));
    }
    out.push_back({std::move(image_id), class_id, std::move(rle)});
  }
  if (!header_seen) throw ParseError(1, "missing header row");
  return out;
}

std::string format_annotations(const std::vector<Annotation>& entries) {
  std::string out = "ImageId,ClassId,EncodedPixels\n";
  for (const auto& e : entries) {
    out += e.image_id;
    out += ',';
    out += std::to_string(e.class_id);
    out += ',';
    out += e.rle.str();
    out += '\n';
  }
  return out;
}

}  // namespace tlunet::data
