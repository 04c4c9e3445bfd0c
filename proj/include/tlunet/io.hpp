#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tlunet {

/// Whole-file helpers; failures raise IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Fixed-point formatting used by every CSV/JSON writer, so reruns are
/// byte-identical.
std::string format_real(double value, int digits = 6);

}  // namespace tlunet
