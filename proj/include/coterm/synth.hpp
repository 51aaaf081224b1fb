#pragma once

#include "coterm/pairs.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace coterm {

struct SynthOptions {
  std::size_t n_docs = 1000;
  std::size_t vocab_size = 500;
  std::uint64_t seed = 0;
  std::size_t min_tokens = 8;
  std::size_t max_tokens = 40;
  double zipf_exponent = 1.0;
};

/// `n` distinct lowercase pseudo-words. Word i is the same for every n > i.
std::vector<std::string> synth_vocabulary(std::size_t n);

/// Resource file bytes: documents `d1`, `d2`, ... whose words are drawn from
/// a Zipf distribution over the vocabulary, grouped into capitalized
/// sentences. Same options give byte-identical output.
///
/// Throws ScenarioInvalid when n_docs or vocab_size is 0.
std::string generate_corpus(const SynthOptions& options);

/// `n_pairs` distinct pairs of distinct vocabulary words, each side drawn
/// from the same Zipf distribution as the corpus.
std::vector<PairInput> generate_pairs(const SynthOptions& options, std::size_t n_pairs);

/// `a<TAB>b` lines.
std::string format_pair_list(const std::vector<PairInput>& pairs);

}  // namespace coterm
