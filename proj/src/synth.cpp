#include "coterm/synth.hpp"

#include "coterm/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace coterm {

namespace {

constexpr const char* kSyllables[] = {"ba", "ko", "ri", "te", "mu", "sa", "lin", "dor", "pe",  "qua", "vi",
                                      "zen", "tho", "ga", "fe", "nu", "lo",  "ci",  "wy", "hex", "ja", "mor"};
constexpr std::size_t kSyllableCount = std::size(kSyllables);

// Draws from a fixed Zipf distribution over ranks [0, n).
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
      cdf_[r] = total;
    }
    for (auto& c : cdf_) c /= total;
  }

  std::size_t operator()(std::mt19937_64& rng) const {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::size_t uniform_between(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  const std::uint64_t span = hi - lo + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return lo + static_cast<std::size_t>(x % span);
}

void check(const SynthOptions& o) {
  if (o.n_docs == 0) throw ScenarioInvalid("n_docs must be at least 1");
  if (o.vocab_size == 0) throw ScenarioInvalid("vocab_size must be at least 1");
  if (o.min_tokens == 0 || o.min_tokens > o.max_tokens) throw ScenarioInvalid("bad document length range");
  if (!(o.zipf_exponent >= 0.0)) throw ScenarioInvalid("zipf_exponent must be non-negative");
}

}  // namespace

std::vector<std::string> synth_vocabulary(std::size_t n) {
  std::vector<std::string> words;
  words.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Bijective base-k numeral of i + k, so every word has two or more
    // syllables and no two indices share a spelling.
    std::size_t v = i + kSyllableCount + 1;
    std::vector<const char*> parts;
    while (v > 0) {
      --v;
      parts.push_back(kSyllables[v % kSyllableCount]);
      v /= kSyllableCount;
    }
    std::string word;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) word += *it;
    words.push_back(std::move(word));
  }
  return words;
}

std::string generate_corpus(const SynthOptions& options) {
  check(options);
  const auto vocab = synth_vocabulary(options.vocab_size);
  const ZipfSampler zipf(options.vocab_size, options.zipf_exponent);
  std::mt19937_64 rng(options.seed);

  std::string out;
  out.reserve(options.n_docs * (options.max_tokens + options.min_tokens) * 4);
  for (std::size_t d = 1; d <= options.n_docs; ++d) {
    out += 'd';
    out += std::to_string(d);
    out += '\t';
    const std::size_t n_tokens = uniform_between(rng, options.min_tokens, options.max_tokens);
    std::size_t sentence_left = 0;
    for (std::size_t t = 0; t < n_tokens; ++t) {
      const bool starts_sentence = sentence_left == 0;
      if (starts_sentence) sentence_left = uniform_between(rng, 4, 12);
      if (t > 0) out += ' ';
      std::string word = vocab[zipf(rng)];
      if (starts_sentence) word[0] = static_cast<char>(word[0] - 'a' + 'A');
      out += word;
      --sentence_left;
      if (sentence_left == 0 || t + 1 == n_tokens) {
        out += '.';
        sentence_left = 0;
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<PairInput> generate_pairs(const SynthOptions& options, std::size_t n_pairs) {
  check(options);
  const std::size_t v = options.vocab_size;
  if (v < 2 || n_pairs > v * (v - 1) / 2) throw ScenarioInvalid("vocabulary too small for the requested pairs");
  const auto vocab = synth_vocabulary(v);
  const ZipfSampler zipf(v, options.zipf_exponent);
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<PairInput> pairs;
  pairs.reserve(n_pairs);
  std::size_t attempts = 0;
  while (pairs.size() < n_pairs) {
    std::size_t a = 0;
    std::size_t b = 0;
    if (++attempts < 64 * n_pairs + 1024) {
      a = zipf(rng);
      b = zipf(rng);
    } else {
      // The head of the distribution is exhausted; fall back to uniform draws.
      a = uniform_between(rng, 0, v - 1);
      b = uniform_between(rng, 0, v - 1);
    }
    if (a == b || !seen.emplace(std::min(a, b), std::max(a, b)).second) continue;
    pairs.push_back(PairInput{pairs.size() + 1, vocab[a], vocab[b]});
  }
  return pairs;
}

std::string format_pair_list(const std::vector<PairInput>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += p.a + '\t' + p.b + '\n';
  return out;
}

}  // namespace coterm
