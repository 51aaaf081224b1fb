#include "coterm/corpus.hpp"

#include "coterm/error.hpp"
#include "coterm/text.hpp"

#include <openssl/evp.h>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <unordered_set>

namespace coterm {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const noexcept { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

MdCtx new_md5_context() {
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_md5(), nullptr) != 1) {
    throw Error("cannot initialise MD5 context");
  }
  return ctx;
}

ResourceId finish(EVP_MD_CTX* ctx) {
  ResourceId::Digest digest{};
  unsigned int length = 0;
  if (EVP_DigestFinal_ex(ctx, digest.data(), &length) != 1 || length != digest.size()) {
    throw Error("MD5 finalisation failed");
  }
  return ResourceId(digest);
}

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_terminator(char c) noexcept { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) noexcept { return c == '"' || c == '\'' || c == ')' || c == ']'; }

constexpr std::string_view kAbbreviations[] = {
    "e.g", "i.e", "al", "fig", "figs", "vs", "cf", "approx", "ca", "dr", "mr",
    "mrs", "ms", "no", "eq", "ref", "refs", "resp", "st", "viz",
};

// True when the word ending just before a terminator should suppress a split.
bool blocks_split(std::string_view word) {
  while (!word.empty() && (word.front() == '(' || word.front() == '[' || word.front() == '"')) {
    word.remove_prefix(1);
  }
  if (word.empty()) return false;

  const auto* bytes = reinterpret_cast<const std::uint8_t*>(word.data());
  const auto length = static_cast<std::int32_t>(word.size());
  std::int32_t i = 0;
  UChar32 c = 0;
  U8_NEXT(bytes, i, length, c);
  if (i == length && c >= 0 && u_isupper(c)) return true;

  std::string lowered(word);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char ch) {
    return static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch + ('a' - 'A') : ch);
  });
  return std::find(std::begin(kAbbreviations), std::end(kAbbreviations), lowered) !=
         std::end(kAbbreviations);
}

bool starts_sentence(std::string_view rest) {
  if (rest.empty()) return false;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(rest.data());
  const auto length = static_cast<std::int32_t>(std::min<std::size_t>(rest.size(), 8));
  std::int32_t i = 0;
  UChar32 c = 0;
  U8_NEXT(bytes, i, length, c);
  return c >= 0 && (u_isupper(c) || u_isdigit(c));
}

std::string serialize_records(std::span<const Record> records) {
  std::string out;
  for (const auto& record : records) {
    out.append(record.key);
    out.push_back('\t');
    out.append(record.text);
    out.push_back('\n');
  }
  return out;
}

void check_key(std::string_view key, std::size_t line_no) {
  if (key.empty()) throw FormatError(line_no, "empty document key");
  if (key.find_first_of("\t\n") != std::string_view::npos) {
    throw FormatError(line_no, "document key contains a tab or newline");
  }
}

}  // namespace

std::optional<ResourceId> ResourceId::parse(std::string_view hex) noexcept {
  if (hex.size() != 32) return std::nullopt;
  Digest digest{};
  for (std::size_t i = 0; i < 32; ++i) {
    const char c = hex[i];
    int v = 0;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else {
      return std::nullopt;
    }
    digest[i / 2] = static_cast<std::uint8_t>(digest[i / 2] | (i % 2 == 0 ? v << 4 : v));
  }
  return ResourceId(digest);
}

ResourceId ResourceId::of_bytes(std::string_view bytes) {
  auto ctx = new_md5_context();
  if (EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1) throw Error("MD5 update failed");
  return finish(ctx.get());
}

std::string ResourceId::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(32, '0');
  for (std::size_t i = 0; i < digest_.size(); ++i) {
    out[2 * i] = kDigits[digest_[i] >> 4];
    out[2 * i + 1] = kDigits[digest_[i] & 0x0f];
  }
  return out;
}

ResourceId resource_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open resource file " + path.string());
  auto ctx = new_md5_context();
  std::vector<char> chunk(1 << 16);
  while (in) {
    in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    const auto got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx.get(), chunk.data(), static_cast<std::size_t>(got)) != 1) {
      throw Error("MD5 update failed");
    }
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return finish(ctx.get());
}

const char* to_string(Granularity granularity) noexcept {
  return granularity == Granularity::abstract ? "abstract" : "sentence";
}

std::optional<Granularity> parse_granularity(std::string_view text) noexcept {
  if (text == "abstract") return Granularity::abstract;
  if (text == "sentence") return Granularity::sentence;
  return std::nullopt;
}

Corpus::Corpus(ResourceId resource_id, Granularity granularity, std::vector<Record> records)
    : resource_id_(resource_id), granularity_(granularity), records_(std::move(records)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    check_key(records_[i].key, i + 1);
    if (!seen.insert(records_[i].key).second) {
      throw FormatError(i + 1, "duplicate document key '" + records_[i].key + "'");
    }
  }
}

Corpus parse_resource(std::string_view bytes, Granularity granularity) {
  std::vector<Record> records;
  std::unordered_set<std::string_view> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() && line.find('\t') == std::string_view::npos) continue;

    if (auto bad = find_invalid_utf8(line)) {
      throw EncodingError(line_no, "invalid UTF-8 at byte " + std::to_string(*bad));
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError(line_no, "missing tab separator");
    const std::string_view key = line.substr(0, tab);
    check_key(key, line_no);
    if (!seen.insert(key).second) {
      throw FormatError(line_no, "duplicate document key '" + std::string(key) + "'");
    }
    records.push_back(Record{std::string(key), std::string(line.substr(tab + 1))});
  }
  return Corpus(ResourceId::of_bytes(bytes), granularity, std::move(records));
}

Corpus load_resource(const std::filesystem::path& path, Granularity granularity) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open resource file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on " + path.string());
  return parse_resource(bytes, granularity);
}

std::string serialize(const Corpus& corpus) { return serialize_records(corpus.records()); }
std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && (is_terminator(text[j]) || is_closer(text[j]))) ++j;
    if (j >= text.size() || !is_space(text[j])) {
      i = j;
      continue;
    }
    std::size_t next = j;
    while (next < text.size() && is_space(text[next])) ++next;

    std::size_t word_begin = i;
    while (word_begin > start && !is_space(text[word_begin - 1])) --word_begin;
    const std::string_view word = text.substr(word_begin, i - word_begin);

    if (starts_sentence(text.substr(next)) && !blocks_split(word)) {
      auto sentence = trim(text.substr(start, j - start));
      if (!sentence.empty()) sentences.emplace_back(sentence);
      start = next;
    }
    i = next;
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty() || sentences.empty()) sentences.emplace_back(tail);
  return sentences;
}

Corpus sentence_split(const Corpus& corpus) {
  std::vector<Record> records;
  records.reserve(corpus.n_docs());
  for (const auto& record : corpus.records()) {
    const auto sentences = split_sentences(record.text);
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      records.push_back(Record{record.key + "." + std::to_string(k + 1), sentences[k]});
    }
  }
  // Identity of the split corpus is the fingerprint of its serialized form.
  const auto id = ResourceId::of_bytes(serialize_records(records));
  return Corpus(id, Granularity::sentence, std::move(records));
}

}  // namespace coterm
