#pragma once

#include "coterm/text.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace coterm {

/// One line of a paired-term list, spelled as the user wrote it.
struct PairInput {
  std::size_t line_no = 0;
  std::string a;
  std::string b;
};

/// Parses `term_a<TAB>term_b` lines. Blank lines are skipped; any other line
/// without exactly one tab is a FormatError, as is a list with no pairs.
std::vector<PairInput> parse_pair_list(std::string_view bytes);
std::vector<PairInput> load_pair_list(const std::filesystem::path& path);

/// A pair of normalized terms.
struct PairedTerm {
  std::string a;
  std::string b;

  /// Normalizes both terms. Throws EmptyTerm if either has no tokens.
  static PairedTerm make(std::string_view a, std::string_view b, CaseMode mode);

  /// Both terms in lexicographic order, joined by a tab. Symmetric in (a, b).
  std::string canonical_key() const;

  /// Same pair with the terms in canonical order.
  PairedTerm canonical() const;

  bool is_canonical() const noexcept { return a <= b; }

  friend bool operator==(const PairedTerm&, const PairedTerm&) = default;
};

}  // namespace coterm
