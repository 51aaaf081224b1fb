#pragma once

#include "coterm/corpus.hpp"
#include "coterm/pairs.hpp"
#include "coterm/text.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coterm {

/// Counts and document keys for one normalized term.
struct PostingEntry {
  std::string term;
  std::uint64_t doc_freq = 0;
  std::uint64_t term_freq = 0;
  std::vector<std::string> doc_keys;  // ascending, duplicate-free

  friend bool operator==(const PostingEntry&, const PostingEntry&) = default;
};

/// Compact posting: documents are identified by the rank of their key in
/// the corpus' ascending key order, so sorted ranks are sorted keys.
struct Posting {
  std::uint64_t term_freq = 0;
  std::vector<std::uint32_t> doc_ranks;
};

/// Every distinct term appearing in either column of `pairs`.
///
/// Each column is deduplicated, the two are merged, and the merge is
/// deduplicated again. Output is sorted.
std::vector<std::string> unique_terms(std::span<const PairedTerm> pairs);

/// Term to posting map over one corpus, filled lazily: postings exist only
/// for terms that have been requested. A multi-token term matches wherever
/// its tokens appear contiguously; overlapping matches each count toward
/// term_freq.
///
/// Thread-safe. The corpus must outlive the index.
class InvertedIndex {
 public:
  InvertedIndex(const Corpus& corpus, CaseMode mode);

  InvertedIndex(const InvertedIndex&) = delete;
  InvertedIndex& operator=(const InvertedIndex&) = delete;

  const ResourceId& resource_id() const noexcept { return corpus_.resource_id(); }
  CaseMode case_mode() const noexcept { return mode_; }
  std::size_t n_docs() const noexcept { return corpus_.n_docs(); }
  const Corpus& corpus() const noexcept { return corpus_; }

  /// Builds postings for every normalized term not yet present with a single
  /// corpus pass split into `workers` contiguous shards.
  void materialize(std::span<const std::string> normalized_terms, unsigned workers = 1);

  /// Posting of an already-normalized term, materialized on demand.
  std::shared_ptr<const Posting> posting(const std::string& normalized_term);

  /// Normalizes `term` and returns its counts and keys. Throws EmptyTerm.
  PostingEntry term_stats(std::string_view term);

  std::string_view key_at_rank(std::uint32_t rank) const;

  std::size_t materialized_count() const;
  std::vector<std::string> materialized_terms() const;

  /// Writes `term<TAB>term_freq<TAB>key,key,...` lines after a `#` header
  /// naming the resource id and case mode. Commas and percent signs inside
  /// keys are percent-encoded.
  void save_cache(const std::filesystem::path& path) const;

  /// Loads postings written by save_cache. Throws FormatError if the file
  /// belongs to another resource or case mode or names unknown keys.
  void load_cache(const std::filesystem::path& path);

 private:
  void ensure_ranks();

  const Corpus& corpus_;
  CaseMode mode_;

  std::once_flag ranks_once_;
  std::vector<std::uint32_t> rank_of_doc_;
  std::vector<std::uint32_t> doc_of_rank_;

  std::mutex build_mutex_;
  mutable std::shared_mutex entries_mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Posting>> entries_;
};

}  // namespace coterm
