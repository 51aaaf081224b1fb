#include "coterm/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <array>

namespace coterm {

namespace {

// 0 = separator, 1 = token byte, 2 = uppercase ASCII letter
constexpr std::array<std::uint8_t, 128> kAsciiClass = [] {
  std::array<std::uint8_t, 128> table{};
  for (int c = '0'; c <= '9'; ++c) table[c] = 1;
  for (int c = 'a'; c <= 'z'; ++c) table[c] = 1;
  for (int c = 'A'; c <= 'Z'; ++c) table[c] = 2;
  return table;
}();

bool is_token_char(UChar32 c) noexcept { return u_isalpha(c) || u_isdigit(c); }

}  // namespace

const char* to_string(CaseMode mode) noexcept {
  return mode == CaseMode::sensitive ? "sensitive" : "insensitive";
}

std::optional<CaseMode> parse_case_mode(std::string_view text) noexcept {
  if (text == "sensitive") return CaseMode::sensitive;
  if (text == "insensitive") return CaseMode::insensitive;
  return std::nullopt;
}

void tokenize_into(std::string_view text, CaseMode mode, TokenBuffer& out) {
  out.clear();
  const bool fold = mode == CaseMode::insensitive;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());

  bool in_token = false;
  std::uint32_t token_start = 0;
  auto close_token = [&] {
    if (in_token) {
      out.spans_.emplace_back(token_start,
                              static_cast<std::uint32_t>(out.chars_.size()) - token_start);
      in_token = false;
    }
  };

  std::int32_t i = 0;
  while (i < length) {
    const std::uint8_t b = bytes[i];
    if (b < 0x80) {
      const std::uint8_t cls = kAsciiClass[b];
      ++i;
      if (cls == 0) {
        close_token();
        continue;
      }
      if (!in_token) {
        in_token = true;
        token_start = static_cast<std::uint32_t>(out.chars_.size());
      }
      out.chars_.push_back(static_cast<char>(fold && cls == 2 ? b + ('a' - 'A') : b));
      continue;
    }

    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0 || !is_token_char(c)) {
      close_token();
      continue;
    }
    if (fold) c = u_foldCase(c, U_FOLD_CASE_DEFAULT);
    if (!in_token) {
      in_token = true;
      token_start = static_cast<std::uint32_t>(out.chars_.size());
    }
    std::array<std::uint8_t, U8_MAX_LENGTH> encoded{};
    std::int32_t n = 0;
    U8_APPEND_UNSAFE(encoded.data(), n, c);
    out.chars_.append(reinterpret_cast<const char*>(encoded.data()), static_cast<std::size_t>(n));
  }
  close_token();
}

std::vector<std::string> tokenize(std::string_view text, CaseMode mode) {
  TokenBuffer buffer;
  tokenize_into(text, mode, buffer);
  std::vector<std::string> tokens;
  tokens.reserve(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) tokens.emplace_back(buffer.at(i));
  return tokens;
}

std::string normalize_term(std::string_view term, CaseMode mode) {
  TokenBuffer buffer;
  tokenize_into(term, mode, buffer);
  std::string joined;
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (i > 0) joined.push_back(' ');
    joined.append(buffer.at(i));
  }
  return joined;
}

std::optional<std::size_t> find_invalid_utf8(std::string_view text) noexcept {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    if (bytes[i] < 0x80) {
      ++i;
      continue;
    }
    const std::int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) return static_cast<std::size_t>(start);
  }
  return std::nullopt;
}

}  // namespace coterm
