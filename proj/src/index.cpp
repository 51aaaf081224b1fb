#include "coterm/index.hpp"

#include "coterm/error.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace coterm {

namespace {

std::vector<std::string_view> split_spaces(std::string_view term) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= term.size()) {
    auto end = term.find(' ', pos);
    if (end == std::string_view::npos) end = term.size();
    parts.push_back(term.substr(pos, end - pos));
    pos = end + 1;
  }
  return parts;
}

// Matches a fixed set of token sequences against token streams.
class TermMatcher {
 public:
  explicit TermMatcher(std::span<const std::string> terms) {
    sequences_.reserve(terms.size());
    for (std::uint32_t t = 0; t < terms.size(); ++t) {
      sequences_.push_back(split_spaces(terms[t]));
      by_first_token_[sequences_.back().front()].push_back(t);
    }
  }

  std::size_t size() const noexcept { return sequences_.size(); }

  template <typename OnMatch>
  void scan(const TokenBuffer& tokens, OnMatch&& on_match) const {
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
      auto it = by_first_token_.find(tokens.at(pos));
      if (it == by_first_token_.end()) continue;
      for (std::uint32_t t : it->second) {
        const auto& seq = sequences_[t];
        if (pos + seq.size() > tokens.size()) continue;
        bool match = true;
        for (std::size_t k = 1; k < seq.size() && match; ++k) match = tokens.at(pos + k) == seq[k];
        if (match) on_match(t);
      }
    }
  }

 private:
  std::vector<std::vector<std::string_view>> sequences_;
  std::unordered_map<std::string_view, std::vector<std::uint32_t>> by_first_token_;
};

struct ShardResult {
  std::vector<std::uint64_t> term_freq;
  std::vector<std::vector<std::uint32_t>> docs;
};

ShardResult scan_shard(std::span<const Record> records, std::size_t first_doc, CaseMode mode,
                       const TermMatcher& matcher) {
  ShardResult out;
  out.term_freq.assign(matcher.size(), 0);
  out.docs.resize(matcher.size());
  std::vector<std::uint32_t> last_doc(matcher.size(), UINT32_MAX);
  TokenBuffer tokens;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto doc = static_cast<std::uint32_t>(first_doc + i);
    tokenize_into(records[i].text, mode, tokens);
    matcher.scan(tokens, [&](std::uint32_t t) {
      ++out.term_freq[t];
      if (last_doc[t] != doc) {
        last_doc[t] = doc;
        out.docs[t].push_back(doc);
      }
    });
  }
  return out;
}

std::string escape_key(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == ',') {
      out += "%2C";
    } else if (c == '%') {
      out += "%25";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape_key(std::string_view key, std::size_t line_no) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i] != '%') {
      out.push_back(key[i]);
      continue;
    }
    const auto code = key.substr(i + 1, 2);
    if (code == "2C") {
      out.push_back(',');
    } else if (code == "25") {
      out.push_back('%');
    } else {
      throw FormatError(line_no, "bad escape in document key");
    }
    i += 2;
  }
  return out;
}

}  // namespace

std::vector<std::string> unique_terms(std::span<const PairedTerm> pairs) {
  std::vector<std::string> first;
  std::vector<std::string> second;
  first.reserve(pairs.size());
  second.reserve(pairs.size());
  for (const auto& pair : pairs) {
    first.push_back(pair.a);
    second.push_back(pair.b);
  }
  auto dedup = [](std::vector<std::string>& column) {
    std::sort(column.begin(), column.end());
    column.erase(std::unique(column.begin(), column.end()), column.end());
  };
  dedup(first);
  dedup(second);
  std::vector<std::string> merged;
  merged.reserve(first.size() + second.size());
  std::merge(first.begin(), first.end(), second.begin(), second.end(), std::back_inserter(merged));
  dedup(merged);
  return merged;
}

InvertedIndex::InvertedIndex(const Corpus& corpus, CaseMode mode) : corpus_(corpus), mode_(mode) {}

void InvertedIndex::ensure_ranks() {
  std::call_once(ranks_once_, [this] {
    const auto records = corpus_.records();
    doc_of_rank_.resize(records.size());
    std::iota(doc_of_rank_.begin(), doc_of_rank_.end(), 0U);
    std::sort(doc_of_rank_.begin(), doc_of_rank_.end(),
              [&](std::uint32_t x, std::uint32_t y) { return records[x].key < records[y].key; });
    rank_of_doc_.resize(records.size());
    for (std::uint32_t r = 0; r < doc_of_rank_.size(); ++r) rank_of_doc_[doc_of_rank_[r]] = r;
  });
}

void InvertedIndex::materialize(std::span<const std::string> normalized_terms, unsigned workers) {
  std::lock_guard build_lock(build_mutex_);

  std::vector<std::string> missing;
  {
    std::shared_lock read_lock(entries_mutex_);
    for (const auto& term : normalized_terms) {
      if (term.empty()) throw EmptyTerm(term);
      if (!entries_.contains(term)) missing.push_back(term);
    }
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (missing.empty()) return;

  ensure_ranks();
  const TermMatcher matcher(missing);
  const auto records = corpus_.records();
  const std::size_t shard_count =
      std::max<std::size_t>(1, std::min<std::size_t>(workers, records.size()));

  std::vector<ShardResult> shards(shard_count);
  auto shard_span = [&](std::size_t s) {
    const std::size_t begin = records.size() * s / shard_count;
    const std::size_t end = records.size() * (s + 1) / shard_count;
    return std::pair{begin, end};
  };
  if (shard_count == 1) {
    shards[0] = scan_shard(records, 0, mode_, matcher);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(shard_count);
    for (std::size_t s = 0; s < shard_count; ++s) {
      threads.emplace_back([&, s] {
        const auto [begin, end] = shard_span(s);
        shards[s] = scan_shard(records.subspan(begin, end - begin), begin, mode_, matcher);
      });
    }
  }

  std::vector<std::pair<std::string, std::shared_ptr<const Posting>>> built;
  built.reserve(missing.size());
  for (std::size_t t = 0; t < missing.size(); ++t) {
    auto posting = std::make_shared<Posting>();
    std::size_t total = 0;
    for (const auto& shard : shards) total += shard.docs[t].size();
    posting->doc_ranks.reserve(total);
    for (const auto& shard : shards) {
      posting->term_freq += shard.term_freq[t];
      for (std::uint32_t doc : shard.docs[t]) posting->doc_ranks.push_back(rank_of_doc_[doc]);
    }
    std::sort(posting->doc_ranks.begin(), posting->doc_ranks.end());
    built.emplace_back(missing[t], std::move(posting));
  }

  std::unique_lock write_lock(entries_mutex_);
  for (auto& [term, posting] : built) entries_.emplace(std::move(term), std::move(posting));
}

std::shared_ptr<const Posting> InvertedIndex::posting(const std::string& normalized_term) {
  {
    std::shared_lock read_lock(entries_mutex_);
    if (auto it = entries_.find(normalized_term); it != entries_.end()) return it->second;
  }
  materialize(std::span(&normalized_term, 1));
  std::shared_lock read_lock(entries_mutex_);
  return entries_.at(normalized_term);
}

PostingEntry InvertedIndex::term_stats(std::string_view term) {
  std::string normalized = normalize_term(term, mode_);
  if (normalized.empty()) throw EmptyTerm(std::string(term));
  const auto found = posting(normalized);
  PostingEntry entry;
  entry.term = std::move(normalized);
  entry.term_freq = found->term_freq;
  entry.doc_freq = found->doc_ranks.size();
  entry.doc_keys.reserve(found->doc_ranks.size());
  for (std::uint32_t rank : found->doc_ranks) entry.doc_keys.emplace_back(key_at_rank(rank));
  return entry;
}

std::string_view InvertedIndex::key_at_rank(std::uint32_t rank) const {
  return corpus_.records()[doc_of_rank_.at(rank)].key;
}

std::size_t InvertedIndex::materialized_count() const {
  std::shared_lock read_lock(entries_mutex_);
  return entries_.size();
}

std::vector<std::string> InvertedIndex::materialized_terms() const {
  std::shared_lock read_lock(entries_mutex_);
  std::vector<std::string> terms;
  terms.reserve(entries_.size());
  for (const auto& [term, posting] : entries_) terms.push_back(term);
  std::sort(terms.begin(), terms.end());
  return terms;
}

void InvertedIndex::save_cache(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write index cache " + path.string());
  out << "#coterm-index\tresource_id=" << resource_id().hex() << "\tcase_mode=" << to_string(mode_)
      << "\tn_docs=" << n_docs() << '\n';
  for (const auto& term : materialized_terms()) {
    std::shared_ptr<const Posting> posting;
    {
      std::shared_lock read_lock(entries_mutex_);
      posting = entries_.at(term);
    }
    out << term << '\t' << posting->term_freq << '\t';
    for (std::size_t i = 0; i < posting->doc_ranks.size(); ++i) {
      if (i > 0) out << ',';
      out << escape_key(key_at_rank(posting->doc_ranks[i]));
    }
    out << '\n';
  }
  if (!out) throw IoError("write error on " + path.string());
}

void InvertedIndex::load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index cache " + path.string());

  std::string line;
  if (!std::getline(in, line) || !line.starts_with("#coterm-index\t")) {
    throw FormatError(1, "not an index cache file");
  }
  const std::string expected_id = "resource_id=" + resource_id().hex();
  const std::string expected_mode = "case_mode=" + std::string(to_string(mode_));
  if (line.find(expected_id) == std::string::npos) {
    throw FormatError(1, "index cache belongs to a different resource");
  }
  if (line.find(expected_mode) == std::string::npos) {
    throw FormatError(1, "index cache was built with a different case mode");
  }

  ensure_ranks();
  const auto records = corpus_.records();
  auto rank_of_key = [&](const std::string& key, std::size_t line_no) {
    auto it = std::lower_bound(doc_of_rank_.begin(), doc_of_rank_.end(), key,
                               [&](std::uint32_t doc, const std::string& k) { return records[doc].key < k; });
    if (it == doc_of_rank_.end() || records[*it].key != key) {
      throw FormatError(line_no, "unknown document key '" + key + "'");
    }
    return static_cast<std::uint32_t>(it - doc_of_rank_.begin());
  };

  std::vector<std::pair<std::string, std::shared_ptr<const Posting>>> loaded;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto first_tab = line.find('\t');
    const auto second_tab = first_tab == std::string::npos ? first_tab : line.find('\t', first_tab + 1);
    if (second_tab == std::string::npos) throw FormatError(line_no, "expected term, term_freq, keys");

    auto posting = std::make_shared<Posting>();
    std::string term = line.substr(0, first_tab);
    if (term.empty() || normalize_term(term, mode_) != term) {
      throw FormatError(line_no, "term is not normalized");
    }
    try {
      posting->term_freq = std::stoull(line.substr(first_tab + 1, second_tab - first_tab - 1));
    } catch (const std::exception&) {
      throw FormatError(line_no, "bad term frequency");
    }
    std::string_view keys = std::string_view(line).substr(second_tab + 1);
    std::size_t pos = 0;
    while (!keys.empty() && pos <= keys.size()) {
      auto end = keys.find(',', pos);
      if (end == std::string_view::npos) end = keys.size();
      posting->doc_ranks.push_back(rank_of_key(unescape_key(keys.substr(pos, end - pos), line_no), line_no));
      pos = end + 1;
    }
    std::sort(posting->doc_ranks.begin(), posting->doc_ranks.end());
    if (std::adjacent_find(posting->doc_ranks.begin(), posting->doc_ranks.end()) != posting->doc_ranks.end()) {
      throw FormatError(line_no, "duplicate document key");
    }
    if (posting->term_freq < posting->doc_ranks.size()) {
      throw FormatError(line_no, "term frequency below document frequency");
    }
    loaded.emplace_back(std::move(term), std::move(posting));
  }

  std::lock_guard build_lock(build_mutex_);
  std::unique_lock write_lock(entries_mutex_);
  for (auto& [term, posting] : loaded) entries_.insert_or_assign(std::move(term), std::move(posting));
}

}  // namespace coterm
