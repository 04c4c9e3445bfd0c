#include "tlunet/kv.hpp"

#include <charconv>

#include "tlunet/error.hpp"
#include "tlunet/io.hpp"

namespace tlunet {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("config key '" + key + "': '" + text + "' is not a valid number");
  }
  return value;
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key = trim(std::string_view(trimmed).substr(0, eq));
    std::string value = trim(std::string_view(trimmed).substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (kv.entries_.contains(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
    kv.entries_.emplace(std::move(key), std::move(value));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

void KeyValues::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

std::optional<std::string> KeyValues::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  used_[key] = true;
  return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::string KeyValues::require_string(const std::string& key) const {
  auto v = get(key);
  if (!v || v->empty()) throw ValidationError("missing required config key '" + key + "'");
  return *v;
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  auto v = get(key);
  return v ? parse_number<int>(key, *v) : fallback;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

double KeyValues::get_real(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

std::vector<int> KeyValues::get_int_list(const std::string& key,
                                         const std::vector<int>& fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::vector<int> out;
  std::size_t begin = 0;
  while (begin <= v->size()) {
    std::size_t comma = v->find(',', begin);
    if (comma == std::string::npos) comma = v->size();
    const std::string item = trim(std::string_view(*v).substr(begin, comma - begin));
    if (!item.empty()) out.push_back(parse_number<int>(key, item));
    begin = comma + 1;
  }
  return out;
}

std::vector<std::string> KeyValues::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (!used_.contains(k)) out.push_back(k);
  }
  return out;
}

std::string KeyValues::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace tlunet
