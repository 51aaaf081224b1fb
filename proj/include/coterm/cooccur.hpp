#pragma once

#include "coterm/index.hpp"
#include "coterm/pairs.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coterm {

/// Shared-document keys are kept only when there are at most this many.
inline constexpr std::size_t kDefaultCoKeysLimit = 10'000;

struct CooccurrenceResult {
  PairedTerm pair;
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;
  std::uint64_t n_ab = 0;
  std::uint64_t tf_a = 0;
  std::uint64_t tf_b = 0;
  std::uint64_t n_docs = 0;
  double significance = 0.0;
  std::optional<std::vector<std::string>> co_keys;

  /// The same result with the two sides exchanged.
  CooccurrenceResult swapped() const;

  /// The result with its pair in canonical order.
  CooccurrenceResult canonical() const { return pair.is_canonical() ? *this : swapped(); }

  friend bool operator==(const CooccurrenceResult&, const CooccurrenceResult&) = default;
};

/// Result of one input line. Exactly one of `result` and `error` is set.
struct PairOutcome {
  PairInput input;
  std::optional<CooccurrenceResult> result;
  std::optional<std::string> error;
};

enum class Column { first, second };

/// Pairs grouped by the column whose terms repeat more often.
struct PairGroups {
  struct Group {
    std::string term;
    std::vector<std::string> partners;
    std::vector<std::size_t> pair_indices;  // positions in the input list
  };

  Column group_column = Column::first;
  std::vector<Group> groups;  // in order of first appearance
};

/// Duplication score of a column is |pairs| minus its distinct terms; the
/// higher score wins and ties go to the first column. `force` overrides the
/// choice.
PairGroups group_pairs(std::span<const PairedTerm> pairs, std::optional<Column> force = std::nullopt);

/// Linear merge of two ascending duplicate-free ranges.
template <typename T>
std::vector<T> intersect_sorted(std::span<const T> a, std::span<const T> b) {
  std::vector<T> out;
  out.reserve(std::min(a.size(), b.size()));
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      out.push_back(a[i]);
      ++i;
      ++j;
    }
  }
  return out;
}

std::vector<std::string> intersect_postings(std::span<const std::string> a, std::span<const std::string> b);

/// n_ab / (n_a + n_b - n_ab), or 0 when both counts are zero. Throws
/// InvalidCounts if n_ab exceeds min(n_a, n_b).
double jaccard(std::uint64_t n_a, std::uint64_t n_b, std::uint64_t n_ab);

struct LocalRunOptions {
  unsigned workers = 1;
  std::size_t co_keys_limit = kDefaultCoKeysLimit;
  std::optional<Column> force_column;
};

/// Runs every pair against the index: materializes all distinct terms in one
/// pass, groups the pairs, intersects postings per group. One outcome per
/// input, in input order; pairs with an empty term get an error outcome.
std::vector<PairOutcome> run_job_local(InvertedIndex& index, std::span<const PairInput> pairs,
                                       const LocalRunOptions& options = {});

/// Baseline without an index: every pair rescans the whole corpus.
std::vector<PairOutcome> run_job_naive(const Corpus& corpus, CaseMode mode, std::span<const PairInput> pairs,
                                       unsigned workers = 1);

/// `term_a<TAB>term_b<TAB>n_a<TAB>n_b<TAB>n_ab<TAB>tf_a<TAB>tf_b<TAB>n_docs<TAB>jaccard`
/// using the input spelling; error outcomes print `error:<message>` after the
/// two terms.
std::string format_result_row(const PairOutcome& outcome);

}  // namespace coterm
