#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coterm {

/// MD5 digest identifying the exact bytes of a resource file.
class ResourceId {
 public:
  using Digest = std::array<std::uint8_t, 16>;

  ResourceId() = default;
  explicit ResourceId(const Digest& digest) : digest_(digest) {}

  /// Parses 32 lowercase hex characters.
  static std::optional<ResourceId> parse(std::string_view hex) noexcept;

  /// MD5 of an in-memory byte string.
  static ResourceId of_bytes(std::string_view bytes);

  const Digest& digest() const noexcept { return digest_; }
  std::string hex() const;

  friend bool operator==(const ResourceId&, const ResourceId&) = default;
  friend auto operator<=>(const ResourceId&, const ResourceId&) = default;

 private:
  Digest digest_{};
};

/// Streams the file through MD5 without buffering it whole.
ResourceId resource_fingerprint(const std::filesystem::path& path);

enum class Granularity { abstract, sentence };

const char* to_string(Granularity granularity) noexcept;
std::optional<Granularity> parse_granularity(std::string_view text) noexcept;

struct Record {
  std::string key;
  std::string text;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Immutable, fingerprinted set of records. Keys are pairwise distinct.
class Corpus {
 public:
  /// Throws FormatError when keys are empty, contain tabs or newlines, or
  /// repeat.
  Corpus(ResourceId resource_id, Granularity granularity, std::vector<Record> records);

  const ResourceId& resource_id() const noexcept { return resource_id_; }
  Granularity granularity() const noexcept { return granularity_; }
  std::span<const Record> records() const noexcept { return records_; }
  std::size_t n_docs() const noexcept { return records_.size(); }

 private:
  ResourceId resource_id_;
  Granularity granularity_;
  std::vector<Record> records_;
};

/// Parses `key<TAB>text` lines (LF or CRLF). Blank lines are skipped; the
/// resource id is the MD5 of `bytes`.
Corpus parse_resource(std::string_view bytes, Granularity granularity);

Corpus load_resource(const std::filesystem::path& path, Granularity granularity);

/// Serialized form, `key<TAB>text\n` per record.
std::string serialize(const Corpus& corpus);

/// Splits every abstract into sentences keyed `<key>.<ordinal>`. Splits after
/// '.', '!' or '?' followed by whitespace and an uppercase letter or digit,
/// unless the word before the terminator is a single uppercase letter
/// (an initial) or a listed abbreviation.
Corpus sentence_split(const Corpus& corpus);

/// Sentences of one text, trimmed.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace coterm
