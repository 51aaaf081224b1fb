#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coterm {

enum class CaseMode { sensitive, insensitive };

const char* to_string(CaseMode mode) noexcept;
std::optional<CaseMode> parse_case_mode(std::string_view text) noexcept;

/// Tokens of one text, stored contiguously. Views returned by `at()` stay
/// valid until the next `clear()` or `tokenize_into()`.
class TokenBuffer {
 public:
  void clear() noexcept {
    chars_.clear();
    spans_.clear();
  }

  std::size_t size() const noexcept { return spans_.size(); }
  bool empty() const noexcept { return spans_.empty(); }

  std::string_view at(std::size_t i) const noexcept {
    return {chars_.data() + spans_[i].first, spans_[i].second};
  }

 private:
  friend void tokenize_into(std::string_view, CaseMode, TokenBuffer&);

  std::string chars_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> spans_;
};

/// Splits `text` into maximal runs of Unicode letters (category L) and
/// decimal digits (Nd). Everything else separates tokens; malformed UTF-8
/// bytes are treated as separators. Insensitive mode applies simple case
/// folding to every code point.
void tokenize_into(std::string_view text, CaseMode mode, TokenBuffer& out);

std::vector<std::string> tokenize(std::string_view text, CaseMode mode);

/// Tokens joined by single spaces. Empty when the term has no tokens.
std::string normalize_term(std::string_view term, CaseMode mode);

/// Byte offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> find_invalid_utf8(std::string_view text) noexcept;

}  // namespace coterm
