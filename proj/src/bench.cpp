#include "coterm/bench.hpp"

#include "coterm/error.hpp"
#include "coterm/index.hpp"
#include "coterm/pairs.hpp"
#include "coterm/synth.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <sstream>

namespace coterm {

namespace {

std::vector<unsigned> parse_worker_counts(const std::string& text) {
  std::vector<unsigned> counts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long n = std::stol(item, &used);
      if (n < 1 || item.find_first_not_of(" ", used) != std::string::npos) throw ConfigError("");
      counts.push_back(static_cast<unsigned>(n));
    } catch (const std::exception&) {
      throw ConfigError("worker_counts must be a comma-separated list of positive integers, got '" + text + "'");
    }
  }
  if (counts.empty()) throw ConfigError("worker_counts is empty");
  return counts;
}

// Compares everything a result row reports.
std::optional<std::string> first_difference(const std::vector<PairOutcome>& expected,
                                            const std::vector<PairOutcome>& actual) {
  if (expected.size() != actual.size()) return "row count differs";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (format_result_row(expected[i]) != format_result_row(actual[i])) {
      return "row " + std::to_string(i + 1) + ": '" + format_result_row(expected[i]) + "' vs '" +
             format_result_row(actual[i]) + "'";
    }
    const auto& a = expected[i].result;
    const auto& b = actual[i].result;
    if (a && b && a->co_keys != b->co_keys) return "row " + std::to_string(i + 1) + ": shared keys differ";
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(BenchMode mode) noexcept {
  return mode == BenchMode::indexed ? "indexed" : "naive_scan";
}

BenchConfig BenchConfig::from(const KeyValueFile& file) {
  file.require_known({"resource_path", "pair_list_path", "granularity", "n_docs", "vocab_size", "n_pairs", "seed",
                      "label", "case_mode", "worker_counts", "modes", "repeats"});
  BenchConfig c;
  c.resource_path = file.get_or("resource_path", "");
  c.pair_list_path = file.get_or("pair_list_path", "");
  if (c.resource_path.empty() != c.pair_list_path.empty()) {
    throw ConfigError("resource_path and pair_list_path must be given together");
  }
  if (auto g = file.get("granularity")) {
    auto parsed = parse_granularity(*g);
    if (!parsed) throw ConfigError("granularity must be abstract or sentence, got '" + *g + "'");
    c.granularity = *parsed;
  }
  auto positive = [&](const char* key, std::size_t fallback) {
    auto v = file.get_int(key);
    if (v && *v < 1) throw ConfigError(std::string(key) + " must be positive");
    return v ? static_cast<std::size_t>(*v) : fallback;
  };
  c.n_docs = positive("n_docs", c.n_docs);
  c.vocab_size = positive("vocab_size", c.vocab_size);
  c.n_pairs = positive("n_pairs", c.n_pairs);
  if (auto seed = file.get_int("seed")) c.seed = static_cast<std::uint64_t>(*seed);
  c.settings.label = file.get_or("label", c.settings.label);
  if (auto m = file.get("case_mode")) {
    auto parsed = parse_case_mode(*m);
    if (!parsed) throw ConfigError("case_mode must be sensitive or insensitive, got '" + *m + "'");
    c.settings.case_mode = *parsed;
  }
  if (auto w = file.get("worker_counts")) c.settings.worker_counts = parse_worker_counts(*w);
  if (auto m = file.get("modes")) {
    c.settings.modes.clear();
    std::stringstream in(*m);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item == "indexed") {
        c.settings.modes.push_back(BenchMode::indexed);
      } else if (item == "naive_scan") {
        c.settings.modes.push_back(BenchMode::naive_scan);
      } else {
        throw ConfigError("modes entries must be indexed or naive_scan, got '" + item + "'");
      }
    }
    if (c.settings.modes.empty()) throw ConfigError("modes is empty");
  }
  c.settings.repeats = static_cast<unsigned>(positive("repeats", c.settings.repeats));
  return c;
}

std::vector<BenchmarkRow> run_benchmark(const Corpus& corpus, std::span<const PairInput> pairs,
                                        const BenchSettings& settings) {
  std::optional<std::vector<PairOutcome>> reference;
  std::vector<BenchmarkRow> rows;
  for (const BenchMode mode : settings.modes) {
    for (const unsigned workers : settings.worker_counts) {
      double best = std::numeric_limits<double>::infinity();
      for (unsigned rep = 0; rep < std::max(1U, settings.repeats); ++rep) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<PairOutcome> outcomes;
        if (mode == BenchMode::indexed) {
          InvertedIndex index(corpus, settings.case_mode);
          outcomes = run_job_local(index, pairs, LocalRunOptions{workers, kDefaultCoKeysLimit, {}});
        } else {
          outcomes = run_job_naive(corpus, settings.case_mode, pairs, workers);
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        best = std::min(best, elapsed);
        if (!reference) {
          reference = std::move(outcomes);
        } else if (auto diff = first_difference(*reference, outcomes)) {
          throw BenchmarkMismatch(std::string(to_string(mode)) + " with " + std::to_string(workers) +
                                  " workers disagrees: " + *diff);
        }
      }
      rows.push_back(BenchmarkRow{settings.label, pairs.size(), workers, std::max(best, 1e-9), mode});
    }
  }
  return rows;
}

std::vector<BenchmarkRow> run_benchmark(const BenchConfig& config) {
  if (!config.resource_path.empty()) {
    Corpus corpus = load_resource(config.resource_path, Granularity::abstract);
    if (config.granularity == Granularity::sentence) corpus = sentence_split(corpus);
    const auto pairs = load_pair_list(config.pair_list_path);
    return run_benchmark(corpus, pairs, config.settings);
  }
  SynthOptions synth;
  synth.n_docs = config.n_docs;
  synth.vocab_size = config.vocab_size;
  synth.seed = config.seed;
  Corpus corpus = parse_resource(generate_corpus(synth), Granularity::abstract);
  if (config.granularity == Granularity::sentence) corpus = sentence_split(corpus);
  const auto pairs = generate_pairs(synth, config.n_pairs);
  return run_benchmark(corpus, pairs, config.settings);
}

std::string format_benchmark_rows(const std::vector<BenchmarkRow>& rows) {
  std::string out = "label\tn_pairs\tworkers\twall_time_seconds\tmode\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", row.wall_time_seconds);
    out += row.label + '\t' + std::to_string(row.n_pairs) + '\t' + std::to_string(row.workers) + '\t' + buf + '\t' +
           to_string(row.mode) + '\n';
  }
  return out;
}

}  // namespace coterm
