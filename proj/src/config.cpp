#include "coterm/config.hpp"

#include "coterm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coterm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile file;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    file.values_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void KeyValueFile::require_known(std::initializer_list<std::string_view> known) const {
  for (const auto& [key, value] : values_) {
    bool found = false;
    for (auto k : known) found = found || k == key;
    if (!found) throw ConfigError("unknown configuration key '" + key + "'");
  }
}

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_or(std::string_view key, std::string fallback) const {
  auto value = get(key);
  return value ? *value : std::move(fallback);
}

std::optional<std::int64_t> KeyValueFile::get_int(std::string_view key) const {
  auto value = get(key);
  if (!value) return std::nullopt;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), out);
  if (ec != std::errc{} || ptr != value->data() + value->size()) {
    throw ConfigError("'" + std::string(key) + "' must be an integer, got '" + *value + "'");
  }
  return out;
}

std::optional<double> KeyValueFile::get_double(std::string_view key) const {
  auto value = get(key);
  if (!value) return std::nullopt;
  try {
    std::size_t used = 0;
    const double out = std::stod(*value, &used);
    if (used == value->size() && std::isfinite(out)) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + std::string(key) + "' must be a number, got '" + *value + "'");
}

std::optional<bool> KeyValueFile::get_bool(std::string_view key) const {
  auto value = get(key);
  if (!value) return std::nullopt;
  if (*value == "true" || *value == "1" || *value == "yes" || *value == "on") return true;
  if (*value == "false" || *value == "0" || *value == "no" || *value == "off") return false;
  throw ConfigError("'" + std::string(key) + "' must be true or false, got '" + *value + "'");
}

std::optional<std::chrono::milliseconds> KeyValueFile::get_duration(std::string_view key) const {
  auto value = get(key);
  if (!value) return std::nullopt;
  std::string_view text = *value;
  std::int64_t scale = 1;
  if (text.ends_with("ms")) {
    text.remove_suffix(2);
  } else if (text.ends_with("s")) {
    text.remove_suffix(1);
    scale = 1000;
  }
  text = trim(text);
  std::int64_t amount = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), amount);
  if (ec != std::errc{} || ptr != text.data() + text.size() || amount < 0) {
    throw ConfigError("'" + std::string(key) + "' must be a duration such as 500ms or 2s, got '" + *value + "'");
  }
  return std::chrono::milliseconds(amount * scale);
}

}  // namespace coterm
