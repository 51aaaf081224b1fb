#pragma once

#include "brute_force.hpp"
#include "coterm/pairs.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi);

/// Random ASCII corpus with mixed case, punctuation and random keys, plus
/// random one- and two-token pairs (some absent from the corpus, some
/// self-pairs, some respelled with other case and separators).
struct RandomCase {
  std::vector<oracle::Doc> docs;
  std::string bytes;  // resource file
  std::vector<coterm::PairInput> pairs;
};

RandomCase random_case(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_vocab, std::size_t max_pairs);

}  // namespace testsupport
