#include "coterm/pairs.hpp"

#include "coterm/error.hpp"

#include <fstream>

namespace coterm {

std::vector<PairInput> parse_pair_list(std::string_view bytes) {
  std::vector<PairInput> pairs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    if (auto bad = find_invalid_utf8(line)) {
      throw EncodingError(line_no, "invalid UTF-8 at byte " + std::to_string(*bad));
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError(line_no, "missing tab between paired terms");
    if (line.find('\t', tab + 1) != std::string_view::npos) {
      throw FormatError(line_no, "expected exactly two tab-separated terms");
    }
    pairs.push_back(PairInput{line_no, std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
  }
  if (pairs.empty()) throw FormatError(0, "paired term list is empty");
  return pairs;
}

std::vector<PairInput> load_pair_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open paired term list " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pair_list(bytes);
}

PairedTerm PairedTerm::make(std::string_view a, std::string_view b, CaseMode mode) {
  PairedTerm pair{normalize_term(a, mode), normalize_term(b, mode)};
  if (pair.a.empty()) throw EmptyTerm(std::string(a));
  if (pair.b.empty()) throw EmptyTerm(std::string(b));
  return pair;
}

std::string PairedTerm::canonical_key() const {
  const auto& first = a <= b ? a : b;
  const auto& second = a <= b ? b : a;
  std::string key;
  key.reserve(first.size() + second.size() + 1);
  key.append(first);
  key.push_back('\t');
  key.append(second);
  return key;
}

PairedTerm PairedTerm::canonical() const {
  return is_canonical() ? *this : PairedTerm{b, a};
}

}  // namespace coterm
