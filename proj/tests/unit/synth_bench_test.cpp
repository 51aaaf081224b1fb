#include "coterm/bench.hpp"
#include "coterm/error.hpp"
#include "coterm/synth.hpp"
#include "md5_reference.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace coterm;

TEST(Synth, SameOptionsSameBytes) {
  SynthOptions o;
  o.n_docs = 10;
  o.vocab_size = 50;
  o.seed = 7;
  const auto a = generate_corpus(o);
  const auto b = generate_corpus(o);
  EXPECT_EQ(oracle::md5_hex(a), oracle::md5_hex(b));
  EXPECT_EQ(ResourceId::of_bytes(a).hex(), oracle::md5_hex(a));
  o.seed = 8;
  EXPECT_NE(generate_corpus(o), a);
}

TEST(Synth, SingleDocument) {
  SynthOptions o;
  o.n_docs = 1;
  o.vocab_size = 1;
  o.seed = 0;
  const auto corpus = parse_resource(generate_corpus(o), Granularity::abstract);
  ASSERT_EQ(corpus.n_docs(), 1u);
  EXPECT_EQ(corpus.records()[0].key, "d1");
}

TEST(Synth, DegenerateInputsRejected) {
  SynthOptions o;
  o.vocab_size = 0;
  EXPECT_THROW(generate_corpus(o), ScenarioInvalid);
  o.vocab_size = 10;
  o.n_docs = 0;
  EXPECT_THROW(generate_corpus(o), ScenarioInvalid);
}

TEST(Synth, VocabularyIsStableAndDistinct) {
  const auto small = synth_vocabulary(30);
  const auto large = synth_vocabulary(3000);
  EXPECT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
  EXPECT_EQ(std::set<std::string>(large.begin(), large.end()).size(), large.size());
  for (const auto& w : large) {
    EXPECT_EQ(tokenize(w, CaseMode::insensitive).size(), 1u) << w;
  }
}

TEST(Synth, PairsAreDistinctVocabularyWords) {
  SynthOptions o;
  o.vocab_size = 40;
  o.seed = 3;
  const auto pairs = generate_pairs(o, 100);
  ASSERT_EQ(pairs.size(), 100u);
  const auto vocab = synth_vocabulary(40);
  const std::set<std::string> words(vocab.begin(), vocab.end());
  std::set<std::string> keys;
  for (const auto& p : pairs) {
    EXPECT_NE(p.a, p.b);
    EXPECT_TRUE(words.count(p.a) && words.count(p.b));
    keys.insert(PairedTerm{p.a, p.b}.canonical_key());
  }
  EXPECT_EQ(keys.size(), 100u);
  const auto listed = parse_pair_list(format_pair_list(pairs));
  ASSERT_EQ(listed.size(), pairs.size());
  EXPECT_EQ(listed[5].a, pairs[5].a);
}

TEST(Bench, TinyCorpusModesAgree) {
  SynthOptions o;
  o.n_docs = 200;
  o.vocab_size = 60;
  const auto corpus = parse_resource(generate_corpus(o), Granularity::abstract);
  const auto pairs = generate_pairs(o, 12);
  BenchSettings settings;
  settings.worker_counts = {1, 2};
  const auto rows = run_benchmark(corpus, pairs, settings);
  EXPECT_EQ(rows.size(), 4u);
  const auto tsv = format_benchmark_rows(rows);
  EXPECT_EQ(tsv.rfind("label\tn_pairs\tworkers\twall_time_seconds\tmode\n", 0), 0u);
  EXPECT_NE(tsv.find("\tnaive_scan\n"), std::string::npos);

  InvertedIndex index(corpus, CaseMode::insensitive);
  const auto indexed = run_job_local(index, pairs);
  const auto naive = run_job_naive(corpus, CaseMode::insensitive, pairs, 3);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(format_result_row(indexed[i]), format_result_row(naive[i]));
  }
}

TEST(Bench, ConfigParsing) {
  const auto c = BenchConfig::from(KeyValueFile::parse("n_docs = 500\nvocab_size = 80\nn_pairs = 7\nseed = 2\n"
                                                       "label = small\nworker_counts = 1,4\nmodes = indexed\n"
                                                       "repeats = 2\n"));
  EXPECT_EQ(c.n_docs, 500u);
  EXPECT_EQ(c.n_pairs, 7u);
  EXPECT_EQ(c.settings.label, "small");
  EXPECT_EQ(c.settings.worker_counts, (std::vector<unsigned>{1, 4}));
  EXPECT_EQ(c.settings.modes, (std::vector<BenchMode>{BenchMode::indexed}));
  EXPECT_EQ(c.settings.repeats, 2u);
  const auto rows = run_benchmark(c);
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n_pairs, 7u);
  EXPECT_THROW(BenchConfig::from(KeyValueFile::parse("modes = turbo\n")), ConfigError);
  EXPECT_THROW(BenchConfig::from(KeyValueFile::parse("speed = 3\n")), ConfigError);
}
