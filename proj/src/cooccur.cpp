#include "coterm/cooccur.hpp"

#include "coterm/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace coterm {

namespace {

struct NormalizedInputs {
  std::vector<PairedTerm> pairs;      // valid pairs only
  std::vector<std::size_t> input_of;  // pairs[i] came from inputs[input_of[i]]
  std::vector<PairOutcome> outcomes;  // one per input; errors filled in
};

NormalizedInputs normalize_inputs(std::span<const PairInput> inputs, CaseMode mode) {
  NormalizedInputs n;
  n.outcomes.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    n.outcomes.push_back(PairOutcome{inputs[i], std::nullopt, std::nullopt});
    try {
      n.pairs.push_back(PairedTerm::make(inputs[i].a, inputs[i].b, mode));
      n.input_of.push_back(i);
    } catch (const EmptyTerm& e) {
      n.outcomes.back().error = e.what();
    }
  }
  return n;
}

std::size_t distinct_count(std::span<const PairedTerm> pairs, Column column) {
  std::unordered_set<std::string_view> seen;
  for (const auto& p : pairs) seen.insert(column == Column::first ? p.a : p.b);
  return seen.size();
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(std::max(1U, workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

}  // namespace

CooccurrenceResult CooccurrenceResult::swapped() const {
  CooccurrenceResult r = *this;
  std::swap(r.pair.a, r.pair.b);
  std::swap(r.n_a, r.n_b);
  std::swap(r.tf_a, r.tf_b);
  return r;
}

PairGroups group_pairs(std::span<const PairedTerm> pairs, std::optional<Column> force) {
  PairGroups out;
  if (force) {
    out.group_column = *force;
  } else {
    const std::size_t first_score = pairs.size() - distinct_count(pairs, Column::first);
    const std::size_t second_score = pairs.size() - distinct_count(pairs, Column::second);
    out.group_column = second_score > first_score ? Column::second : Column::first;
  }

  std::unordered_map<std::string_view, std::size_t> slot;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool by_first = out.group_column == Column::first;
    const std::string& key = by_first ? pairs[i].a : pairs[i].b;
    const std::string& partner = by_first ? pairs[i].b : pairs[i].a;
    auto [it, inserted] = slot.try_emplace(key, out.groups.size());
    if (inserted) out.groups.push_back(PairGroups::Group{key, {}, {}});
    auto& group = out.groups[it->second];
    group.partners.push_back(partner);
    group.pair_indices.push_back(i);
  }
  return out;
}

std::vector<std::string> intersect_postings(std::span<const std::string> a, std::span<const std::string> b) {
  return intersect_sorted(a, b);
}

double jaccard(std::uint64_t n_a, std::uint64_t n_b, std::uint64_t n_ab) {
  if (n_ab > std::min(n_a, n_b)) {
    throw InvalidCounts("shared count " + std::to_string(n_ab) + " exceeds min(" + std::to_string(n_a) +
                        ", " + std::to_string(n_b) + ")");
  }
  const std::uint64_t denominator = n_a + n_b - n_ab;
  if (denominator == 0) return 0.0;
  return static_cast<double>(n_ab) / static_cast<double>(denominator);
}

std::vector<PairOutcome> run_job_local(InvertedIndex& index, std::span<const PairInput> pairs,
                                       const LocalRunOptions& options) {
  auto inputs = normalize_inputs(pairs, index.case_mode());
  if (inputs.pairs.empty()) return std::move(inputs.outcomes);

  const auto terms = unique_terms(inputs.pairs);
  index.materialize(terms, options.workers);

  const auto plan = group_pairs(inputs.pairs, options.force_column);
  const std::uint64_t n_docs = index.n_docs();

  parallel_for(plan.groups.size(), options.workers, [&](std::size_t g) {
    const auto& group = plan.groups[g];
    const auto group_posting = index.posting(group.term);
    for (std::size_t k = 0; k < group.partners.size(); ++k) {
      const auto partner_posting = index.posting(group.partners[k]);
      const auto shared = intersect_sorted<std::uint32_t>(group_posting->doc_ranks, partner_posting->doc_ranks);

      const std::size_t pair_index = group.pair_indices[k];
      const bool group_is_a = plan.group_column == Column::first;
      const auto& a = group_is_a ? *group_posting : *partner_posting;
      const auto& b = group_is_a ? *partner_posting : *group_posting;

      CooccurrenceResult r;
      r.pair = inputs.pairs[pair_index];
      r.n_a = a.doc_ranks.size();
      r.n_b = b.doc_ranks.size();
      r.n_ab = shared.size();
      r.tf_a = a.term_freq;
      r.tf_b = b.term_freq;
      r.n_docs = n_docs;
      r.significance = jaccard(r.n_a, r.n_b, r.n_ab);
      if (shared.size() <= options.co_keys_limit) {
        std::vector<std::string> keys;
        keys.reserve(shared.size());
        for (std::uint32_t rank : shared) keys.emplace_back(index.key_at_rank(rank));
        r.co_keys = std::move(keys);
      }
      // Each pair index belongs to exactly one group, so slots never race.
      inputs.outcomes[inputs.input_of[pair_index]].result = std::move(r);
    }
  });
  return std::move(inputs.outcomes);
}

std::vector<PairOutcome> run_job_naive(const Corpus& corpus, CaseMode mode, std::span<const PairInput> pairs,
                                       unsigned workers) {
  auto inputs = normalize_inputs(pairs, mode);
  const auto records = corpus.records();

  parallel_for(inputs.pairs.size(), workers, [&](std::size_t p) {
    const auto& pair = inputs.pairs[p];
    const std::vector<std::string> a_tokens = tokenize(pair.a, mode);
    const std::vector<std::string> b_tokens = tokenize(pair.b, mode);
    auto occurrences = [](const TokenBuffer& doc, const std::vector<std::string>& term) {
      std::uint64_t count = 0;
      for (std::size_t pos = 0; pos + term.size() <= doc.size(); ++pos) {
        bool match = true;
        for (std::size_t k = 0; k < term.size() && match; ++k) match = doc.at(pos + k) == term[k];
        count += match ? 1 : 0;
      }
      return count;
    };

    CooccurrenceResult r;
    r.pair = pair;
    r.n_docs = records.size();
    std::vector<std::string_view> shared;
    TokenBuffer doc;
    for (const auto& record : records) {
      tokenize_into(record.text, mode, doc);
      const auto in_a = occurrences(doc, a_tokens);
      const auto in_b = occurrences(doc, b_tokens);
      r.tf_a += in_a;
      r.tf_b += in_b;
      r.n_a += in_a > 0 ? 1 : 0;
      r.n_b += in_b > 0 ? 1 : 0;
      if (in_a > 0 && in_b > 0) shared.push_back(record.key);
    }
    r.n_ab = shared.size();
    r.significance = jaccard(r.n_a, r.n_b, r.n_ab);
    if (shared.size() <= kDefaultCoKeysLimit) {
      std::sort(shared.begin(), shared.end());
      r.co_keys = std::vector<std::string>(shared.begin(), shared.end());
    }
    inputs.outcomes[inputs.input_of[p]].result = std::move(r);
  });
  return std::move(inputs.outcomes);
}

std::string format_result_row(const PairOutcome& outcome) {
  std::string row = outcome.input.a + '\t' + outcome.input.b + '\t';
  if (!outcome.result) return row + "error:" + outcome.error.value_or("unknown");
  const auto& r = *outcome.result;
  char significance[32];
  std::snprintf(significance, sizeof significance, "%.6f", r.significance);
  row += std::to_string(r.n_a) + '\t' + std::to_string(r.n_b) + '\t' + std::to_string(r.n_ab) + '\t' +
         std::to_string(r.tf_a) + '\t' + std::to_string(r.tf_b) + '\t' + std::to_string(r.n_docs) + '\t' +
         significance;
  return row;
}

}  // namespace coterm
