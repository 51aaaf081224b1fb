#pragma once

#include "coterm/config.hpp"
#include "coterm/cooccur.hpp"
#include "coterm/corpus.hpp"
#include "coterm/error.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace coterm {

enum class BenchMode { indexed, naive_scan };

const char* to_string(BenchMode mode) noexcept;

struct BenchmarkRow {
  std::string label;
  std::size_t n_pairs = 0;
  unsigned workers = 1;
  double wall_time_seconds = 0.0;
  BenchMode mode = BenchMode::indexed;
};

struct BenchSettings {
  std::string label = "bench";
  CaseMode case_mode = CaseMode::insensitive;
  std::vector<unsigned> worker_counts{1, 2, 4};
  std::vector<BenchMode> modes{BenchMode::indexed, BenchMode::naive_scan};
  unsigned repeats = 1;  // best of
};

/// Benchmark configuration file. Either `resource_path` and `pair_list_path`
/// name existing inputs, or the corpus and pairs are generated from
/// `n_docs`, `vocab_size`, `n_pairs` and `seed`.
struct BenchConfig {
  std::filesystem::path resource_path;
  std::filesystem::path pair_list_path;
  Granularity granularity = Granularity::abstract;
  std::size_t n_docs = 100'000;
  std::size_t vocab_size = 5'000;
  std::size_t n_pairs = 100;
  std::uint64_t seed = 0;
  BenchSettings settings;

  static BenchConfig from(const KeyValueFile& file);
  static BenchConfig load(const std::filesystem::path& path) { return from(KeyValueFile::load(path)); }
};

/// A benchmark whose modes or worker counts disagree on a result.
class BenchmarkMismatch : public Error {
 public:
  using Error::Error;
};

/// Times every (mode, worker count) combination, best of `repeats`, with a
/// fresh index per indexed run. Corpus loading is not timed. Every run's
/// results are compared with the first before any row is returned; a
/// difference throws BenchmarkMismatch.
std::vector<BenchmarkRow> run_benchmark(const Corpus& corpus, std::span<const PairInput> pairs,
                                        const BenchSettings& settings);

/// Loads or generates the inputs named by `config` and runs the benchmark.
std::vector<BenchmarkRow> run_benchmark(const BenchConfig& config);

std::string format_benchmark_rows(const std::vector<BenchmarkRow>& rows);

}  // namespace coterm
