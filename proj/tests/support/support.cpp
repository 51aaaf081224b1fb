#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace testsupport {

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "coterm-test-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

namespace {

std::string random_word(std::mt19937_64& rng, const std::string& alphabet) {
  std::string w;
  const auto len = uniform(rng, 1, 5);
  for (std::size_t i = 0; i < len; ++i) w += alphabet[uniform(rng, 0, alphabet.size() - 1)];
  return w;
}

std::string respell(std::mt19937_64& rng, const std::string& word) {
  std::string out = word;
  for (auto& c : out) {
    if (uniform(rng, 0, 3) == 0) c = static_cast<char>(std::isupper(static_cast<unsigned char>(c)) ? std::tolower(c)
                                                                                                     : std::toupper(c));
  }
  return out;
}

const char* const kSeparators[] = {" ", "  ", ", ", "-", ". ", "; ", " (", ") ", "/", ": "};

}  // namespace

RandomCase random_case(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_vocab, std::size_t max_pairs) {
  RandomCase rc;
  // Letters a-m and A-M plus digits; absent words use letters x-z only.
  const std::string alphabet = "abcdefghijklmABCDEFGHIJKLM0123456789";
  const std::size_t vocab_size = uniform(rng, 1, max_vocab);
  std::set<std::string> vocab_set;
  while (vocab_set.size() < vocab_size) vocab_set.insert(random_word(rng, alphabet));
  const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());

  const std::size_t n_docs = uniform(rng, 1, max_docs);
  std::set<std::string> keys;
  while (keys.size() < n_docs) keys.insert("k" + std::to_string(uniform(rng, 0, n_docs * 20)));
  std::vector<std::string> key_order(keys.begin(), keys.end());
  std::shuffle(key_order.begin(), key_order.end(), rng);

  for (const auto& key : key_order) {
    std::string text;
    const auto n_tokens = uniform(rng, 0, 30);
    for (std::size_t t = 0; t < n_tokens; ++t) {
      if (t > 0) text += kSeparators[uniform(rng, 0, std::size(kSeparators) - 1)];
      // Small effective vocabulary per document so co-occurrences are common.
      text += vocab[uniform(rng, 0, std::min<std::size_t>(vocab.size() - 1, uniform(rng, 0, vocab.size() - 1)))];
    }
    rc.docs.emplace_back(key, text);
    rc.bytes += key + '\t' + text + '\n';
  }

  auto random_term = [&] {
    if (uniform(rng, 0, 9) == 0) return random_word(rng, "xyz");
    std::string term = vocab[uniform(rng, 0, vocab.size() - 1)];
    if (uniform(rng, 0, 3) == 0) {
      term += kSeparators[uniform(rng, 0, std::size(kSeparators) - 1)];
      term += vocab[uniform(rng, 0, vocab.size() - 1)];
    }
    return term;
  };
  const std::size_t n_pairs = uniform(rng, 1, max_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    std::string a = random_term();
    std::string b = uniform(rng, 0, 9) == 0 ? a : random_term();
    if (uniform(rng, 0, 4) == 0) a = respell(rng, a);
    if (uniform(rng, 0, 4) == 0) b = " " + b + " ";
    rc.pairs.push_back(coterm::PairInput{i + 1, a, b});
  }
  return rc;
}

}  // namespace testsupport
