#include "coterm/error.hpp"
#include "coterm/index.hpp"
#include "brute_force.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace coterm;

namespace {

const std::string kThreeDocs = "d1\taspirin reduces pain\nd2\taspirin linked to cancer\nd3\tcancer therapy\n";

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TEST(TermStats, SingleToken) {
  const auto corpus = parse_resource(kThreeDocs, Granularity::abstract);
  InvertedIndex index(corpus, CaseMode::insensitive);
  const auto e = index.term_stats("aspirin");
  EXPECT_EQ(e.term, "aspirin");
  EXPECT_EQ(e.doc_freq, 2u);
  EXPECT_EQ(e.term_freq, 2u);
  EXPECT_EQ(e.doc_keys, (std::vector<std::string>{"d1", "d2"}));
}

TEST(TermStats, MultiTokenContiguous) {
  const auto corpus = parse_resource(kThreeDocs, Granularity::abstract);
  InvertedIndex index(corpus, CaseMode::insensitive);
  const auto e = index.term_stats("cancer therapy");
  EXPECT_EQ(e.doc_freq, 1u);
  EXPECT_EQ(e.doc_keys, (std::vector<std::string>{"d3"}));
  EXPECT_EQ(index.term_stats("linked cancer").doc_freq, 0u);
}

TEST(TermStats, AbsentTerm) {
  const auto corpus = parse_resource(kThreeDocs, Granularity::abstract);
  InvertedIndex index(corpus, CaseMode::insensitive);
  const auto e = index.term_stats("ibuprofen");
  EXPECT_EQ(e.doc_freq, 0u);
  EXPECT_EQ(e.term_freq, 0u);
  EXPECT_TRUE(e.doc_keys.empty());
}

TEST(TermStats, EmptyTermThrows) {
  const auto corpus = parse_resource(kThreeDocs, Granularity::abstract);
  InvertedIndex index(corpus, CaseMode::insensitive);
  EXPECT_THROW(index.term_stats(" - "), EmptyTerm);
}

TEST(TermStats, OverlappingMatchesCountTwice) {
  const auto corpus = parse_resource("x\ta a a\ny\ta b a\n", Granularity::abstract);
  InvertedIndex index(corpus, CaseMode::sensitive);
  const auto e = index.term_stats("a a");
  EXPECT_EQ(e.term_freq, 2u);
  EXPECT_EQ(e.doc_freq, 1u);
  EXPECT_EQ(index.term_stats("a").term_freq, 5u);
}

TEST(TermStats, KeysSortedLexicographically) {
  const auto corpus = parse_resource("k9\tw\nk10\tw\nk1\tw\nb\tz\n", Granularity::abstract);
  InvertedIndex index(corpus, CaseMode::sensitive);
  EXPECT_EQ(index.term_stats("w").doc_keys, (std::vector<std::string>{"k1", "k10", "k9"}));
}

TEST(TermStats, MatchesBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 60; ++round) {
    const auto rc = testsupport::random_case(rng, 300, 120, 30);
    const auto corpus = parse_resource(rc.bytes, Granularity::abstract);
    for (auto mode : {CaseMode::sensitive, CaseMode::insensitive}) {
      InvertedIndex index(corpus, mode);
      for (const auto& p : rc.pairs) {
        for (const auto& term : {p.a, p.b}) {
          const auto expected = oracle::count_term(rc.docs, term, mode == CaseMode::insensitive);
          const auto actual = index.term_stats(term);
          ASSERT_EQ(actual.doc_freq, expected.doc_freq) << term;
          ASSERT_EQ(actual.term_freq, expected.term_freq) << term;
          ASSERT_EQ(actual.doc_keys, expected.doc_keys) << term;
          ASSERT_EQ(actual.doc_freq, actual.doc_keys.size());
          ASSERT_GE(actual.term_freq, actual.doc_freq);
        }
      }
    }
  }
}

TEST(TermStats, InsensitiveModeIgnoresQueryCase) {
  std::mt19937_64 rng(4);
  for (int round = 0; round < 20; ++round) {
    const auto rc = testsupport::random_case(rng, 100, 60, 20);
    const auto corpus = parse_resource(rc.bytes, Granularity::abstract);
    InvertedIndex index(corpus, CaseMode::insensitive);
    for (const auto& p : rc.pairs) {
      auto lower = index.term_stats(p.a);
      auto upper_case = index.term_stats(upper(p.a));
      ASSERT_EQ(lower, upper_case);
    }
  }
}

TEST(TermStats, QueryOrderDoesNotMatter) {
  std::mt19937_64 rng(8);
  const auto rc = testsupport::random_case(rng, 200, 80, 40);
  const auto corpus = parse_resource(rc.bytes, Granularity::abstract);
  std::vector<std::string> terms;
  for (const auto& p : rc.pairs) {
    terms.push_back(p.a);
    terms.push_back(p.b);
  }
  InvertedIndex first(corpus, CaseMode::insensitive);
  std::vector<PostingEntry> forward;
  for (const auto& t : terms) forward.push_back(first.term_stats(t));

  InvertedIndex second(corpus, CaseMode::insensitive);
  std::vector<std::string> normalized;
  for (const auto& t : terms) normalized.push_back(normalize_term(t, CaseMode::insensitive));
  std::reverse(normalized.begin(), normalized.end());
  second.materialize(normalized, 3);
  for (std::size_t i = terms.size(); i-- > 0;) ASSERT_EQ(second.term_stats(terms[i]), forward[i]);
}

TEST(Materialize, ShardedMatchesSingleThreaded) {
  std::mt19937_64 rng(31);
  const auto rc = testsupport::random_case(rng, 500, 100, 50);
  const auto corpus = parse_resource(rc.bytes, Granularity::abstract);
  std::vector<std::string> terms;
  for (const auto& p : rc.pairs) terms.push_back(normalize_term(p.a, CaseMode::sensitive));
  InvertedIndex one(corpus, CaseMode::sensitive);
  InvertedIndex many(corpus, CaseMode::sensitive);
  one.materialize(terms, 1);
  many.materialize(terms, 7);
  EXPECT_EQ(one.materialized_terms(), many.materialized_terms());
  for (const auto& t : terms) EXPECT_EQ(one.term_stats(t), many.term_stats(t));
}

TEST(UniqueTerms, Examples) {
  auto pairs = [](std::initializer_list<std::pair<const char*, const char*>> list) {
    std::vector<PairedTerm> out;
    for (auto [a, b] : list) out.push_back(PairedTerm{a, b});
    return out;
  };
  EXPECT_EQ(unique_terms(pairs({{"a", "b"}, {"b", "c"}, {"a", "c"}})), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(unique_terms(pairs({{"a", "a"}})), (std::vector<std::string>{"a"}));
  EXPECT_EQ(unique_terms(pairs({{"x", "y"}})), (std::vector<std::string>{"x", "y"}));
}

TEST(UniqueTerms, CardinalityAndMembership) {
  std::mt19937_64 rng(2);
  for (int round = 0; round < 100; ++round) {
    std::vector<PairedTerm> pairs;
    const auto n = testsupport::uniform(rng, 1, 30);
    for (std::size_t i = 0; i < n; ++i) {
      pairs.push_back(PairedTerm{std::string(1, static_cast<char>('a' + testsupport::uniform(rng, 0, 12))),
                                 std::string(1, static_cast<char>('a' + testsupport::uniform(rng, 0, 12)))});
    }
    const auto terms = unique_terms(pairs);
    ASSERT_LE(terms.size(), 2 * pairs.size());
    ASSERT_TRUE(std::is_sorted(terms.begin(), terms.end()));
    ASSERT_EQ(std::adjacent_find(terms.begin(), terms.end()), terms.end());
    for (const auto& p : pairs) {
      ASSERT_TRUE(std::binary_search(terms.begin(), terms.end(), p.a));
      ASSERT_TRUE(std::binary_search(terms.begin(), terms.end(), p.b));
    }
  }
}

TEST(IndexCache, RoundTripAndValidation) {
  testsupport::TempDir dir;
  const auto corpus = parse_resource("a,1\tx y\nb%2\tx\nc\ty z\n", Granularity::abstract);
  InvertedIndex index(corpus, CaseMode::insensitive);
  const std::vector<std::string> terms{"x", "y", "x y", "absent"};
  index.materialize(terms);
  index.save_cache(dir / "cache.idx");

  InvertedIndex loaded(corpus, CaseMode::insensitive);
  loaded.load_cache(dir / "cache.idx");
  EXPECT_EQ(loaded.materialized_terms(), index.materialized_terms());
  for (const auto& t : terms) EXPECT_EQ(loaded.term_stats(t), index.term_stats(t));
  EXPECT_EQ(loaded.term_stats("x").doc_keys, (std::vector<std::string>{"a,1", "b%2"}));

  InvertedIndex other_mode(corpus, CaseMode::sensitive);
  EXPECT_THROW(other_mode.load_cache(dir / "cache.idx"), FormatError);

  const auto other_corpus = parse_resource("a,1\tx y\n", Granularity::abstract);
  InvertedIndex other_resource(other_corpus, CaseMode::insensitive);
  EXPECT_THROW(other_resource.load_cache(dir / "cache.idx"), FormatError);
}

TEST(IndexCache, RejectsUnknownKeysAndBadCounts) {
  testsupport::TempDir dir;
  const auto corpus = parse_resource("a\tx\nb\tx\n", Granularity::abstract);
  const std::string header =
      "#coterm-index\tresource_id=" + corpus.resource_id().hex() + "\tcase_mode=sensitive\n";
  InvertedIndex index(corpus, CaseMode::sensitive);
  testsupport::write_file(dir / "ok", header + "x\t2\ta,b\n");
  EXPECT_NO_THROW(index.load_cache(dir / "ok"));
  EXPECT_EQ(index.term_stats("x").doc_freq, 2u);

  for (const std::string body : {"x\t2\ta,zz\n", "x\t1\ta,b\n", "x\t2\ta,a\n", "x  y\t1\ta\n", "x\tnope\ta\n", "x 2 a\n"}) {
    InvertedIndex fresh(corpus, CaseMode::sensitive);
    testsupport::write_file(dir / "bad", header + body);
    EXPECT_THROW(fresh.load_cache(dir / "bad"), FormatError) << body;
  }
}
