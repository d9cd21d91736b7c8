#include "perturb/bpe.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "perturb/corpus.hpp"
#include "perturb/errors.hpp"
#include "perturb/rng.hpp"

namespace {

using namespace perturb;
using bpe::MergeTable;
using bpe::Symbol;

Symbol sym(const char32_t* text, bool final = false) { return {text, final}; }

TEST(BpeLearnTest, PicksMostFrequentPair) {
  const MergeTable table = bpe::bpe_learn({{"ab", 3}, {"ba", 2}}, 1);
  ASSERT_EQ(table.merges.size(), 1u);
  EXPECT_EQ(table.merges[0].first, sym(U"a"));
  EXPECT_EQ(table.merges[0].second, sym(U"b", true));
}

TEST(BpeLearnTest, ZeroMergesGivesEmptyTable) {
  const MergeTable table = bpe::bpe_learn({{"ab", 3}}, 0);
  EXPECT_TRUE(table.merges.empty());
  EXPECT_EQ(table.num_requested, 0u);
}

TEST(BpeLearnTest, RepeatedSymbolPairsCountNonOverlapping) {
  // "aaab" holds one (a,a) pair and one (a,b-final) pair; the tie falls to
  // (a,a) on symbol order.
  const MergeTable table = bpe::bpe_learn({{"aaab", 10}}, 2);
  ASSERT_EQ(table.merges.size(), 2u);
  EXPECT_EQ(table.merges[0].first, sym(U"a"));
  EXPECT_EQ(table.merges[0].second, sym(U"a"));
  EXPECT_EQ(table.merges[1].first, sym(U"a"));
  EXPECT_EQ(table.merges[1].second, sym(U"b", true));
}

TEST(BpeLearnTest, StopsWhenNoPairRepeats) {
  const MergeTable table = bpe::bpe_learn({{"ab", 1}, {"cd", 1}}, 10);
  EXPECT_TRUE(table.merges.empty());
  EXPECT_EQ(table.num_requested, 10u);
}

TEST(BpeLearnTest, FrequentWordCollapsesToSingleUnit) {
  const MergeTable table = bpe::bpe_learn({{"used", 10}}, 3);
  ASSERT_EQ(table.merges.size(), 3u);
  EXPECT_EQ(bpe::bpe_apply(U"used", table), (bpe::SegmentedToken{U"used"}));
}

TEST(BpeLearnTest, TieBreaksLexicographically) {
  // All three pairs occur 5 times; (e,d-final) < (s,e) < (u,s).
  const MergeTable table = bpe::bpe_learn({{"used", 5}}, 1);
  ASSERT_EQ(table.merges.size(), 1u);
  EXPECT_EQ(table.merges[0].first, sym(U"e"));
  EXPECT_EQ(table.merges[0].second, sym(U"d", true));
}

TEST(BpeLearnTest, EmptyWordListThrows) {
  EXPECT_THROW(bpe::bpe_learn({}, 5), config_error);
}

TEST(BpeLearnTest, DeterministicAcrossRuns) {
  const std::unordered_map<std::string, std::uint64_t> freqs = {
      {"lower", 5}, {"lowest", 3}, {"newer", 6}, {"wider", 2}, {"low", 7}};
  const MergeTable a = bpe::bpe_learn(freqs, 20);
  const MergeTable b = bpe::bpe_learn(freqs, 20);
  EXPECT_EQ(a.merges, b.merges);
}

TEST(BpeApplyTest, EmptyTableSegmentsToCharacters) {
  EXPECT_EQ(bpe::bpe_apply(U"abc", MergeTable{}),
            (bpe::SegmentedToken{U"a", U"b", U"c"}));
}

TEST(BpeApplyTest, WordFinalFlagBlocksMidWordMatch) {
  // The learned pair is (a, b-final): it hits only where the b ends the word,
  // so "ba" stays apart and "abab" merges just its last two characters.
  const MergeTable table = bpe::bpe_learn({{"ab", 3}, {"ba", 2}}, 1);
  EXPECT_EQ(bpe::bpe_apply(U"ba", table), (bpe::SegmentedToken{U"b", U"a"}));
  EXPECT_EQ(bpe::bpe_apply(U"ab", table), (bpe::SegmentedToken{U"ab"}));
  EXPECT_EQ(bpe::bpe_apply(U"abab", table), (bpe::SegmentedToken{U"a", U"b", U"ab"}));
}

TEST(BpeApplyTest, MergesReplayGreedilyInTableOrder) {
  MergeTable table;
  table.merges.push_back({sym(U"a"), sym(U"a")});
  table.merges.push_back({sym(U"aa"), sym(U"b", true)});
  EXPECT_EQ(bpe::bpe_apply(U"aab", table), (bpe::SegmentedToken{U"aab"}));
  // The first merge takes the leftmost (a,a), leaving nothing for (aa,b).
  EXPECT_EQ(bpe::bpe_apply(U"aaab", table), (bpe::SegmentedToken{U"aa", U"a", U"b"}));
  EXPECT_EQ(bpe::bpe_apply(U"aaaab", table), (bpe::SegmentedToken{U"aa", U"aab"}));
}

TEST(RenderTest, ContinuationMarkers) {
  EXPECT_EQ(bpe::render_segmented({U"b", U"a"}), U"b@@ a");
  EXPECT_EQ(bpe::render_segmented({U"purcha", U"se"}), U"purcha@@ se");
  EXPECT_EQ(bpe::render_segmented({U"whole"}), U"whole");
}

TEST(SegmentCorpusTest, UnitsBecomeTokensWithMarkers) {
  const MergeTable empty;
  const Corpus segmented = bpe::segment_corpus({{U"ab", U"c"}}, empty);
  ASSERT_EQ(segmented.size(), 1u);
  EXPECT_EQ(segmented[0], (Sentence{U"a@@", U"b", U"c"}));
}

TEST(DecodeCorpusTest, JoinsContinuations) {
  EXPECT_EQ(bpe::decode_corpus({{U"b@@", U"a"}}), (Corpus{{U"ba"}}));
  EXPECT_EQ(bpe::decode_corpus({{U"x", U"y"}}), (Corpus{{U"x", U"y"}}));
  EXPECT_EQ(bpe::decode_corpus({{}}), (Corpus{{}}));
}

TEST(DecodeCorpusTest, DanglingContinuationThrows) {
  try {
    bpe::decode_corpus({{U"ok"}, {U"ab@@"}});
    FAIL() << "expected format_error";
  } catch (const format_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(RoundTripTest, SegmentThenDecodeRestoresCorpus) {
  const Corpus corpus = {{U"the", U"newer", U"lower", U"houses"},
                         {U"wider", U"low", U"lowest"},
                         {}};
  const MergeTable table =
      bpe::bpe_learn(count_tokens(corpus), 30);
  EXPECT_EQ(bpe::decode_corpus(bpe::segment_corpus(corpus, table)), corpus);
}

TEST(RoundTripTest, RandomTokensSurviveAnyTable) {
  const std::u32string alphabet = U"abcdefghijklmnopqrstuvwxyz0123456789é中";
  RngStream rng(20240817);
  Corpus corpus;
  for (int s = 0; s < 50; ++s) {
    Sentence sentence;
    for (int t = 0; t < 8; ++t) {
      Token token;
      const std::size_t len = 1 + rng.below(12);
      for (std::size_t i = 0; i < len; ++i) token.push_back(alphabet[rng.below(alphabet.size())]);
      sentence.push_back(token);
    }
    corpus.push_back(sentence);
  }
  for (const std::size_t merges : {0ull, 5ull, 50ull, 500ull}) {
    const MergeTable table = bpe::bpe_learn(count_tokens(corpus), merges);
    EXPECT_EQ(bpe::decode_corpus(bpe::segment_corpus(corpus, table)), corpus);
  }
}

TEST(RoundTripTest, SurvivesPlainTextSerialization) {
  const Corpus corpus = {{U"segmentation", U"divergence"}, {U"tokens"}};
  const MergeTable table = bpe::bpe_learn(count_tokens(corpus), 10);
  const std::string rendered = write_plain_string(bpe::segment_corpus(corpus, table));
  std::istringstream in(rendered);
  EXPECT_EQ(bpe::decode_corpus(read_plain(in)), corpus);
}

TEST(GranularityTest, MeanUnitsNonIncreasingInMerges) {
  const Corpus corpus = {{U"the", U"teacher", U"teaches", U"the", U"reader"},
                         {U"the", U"reader", U"reads", U"the", U"letter"},
                         {U"letters", U"reach", U"teachers"}};
  const auto freqs = count_tokens(corpus);
  const MergeTable full = bpe::bpe_learn(freqs, 40);
  double previous = 1e9;
  for (std::size_t k = 0; k <= full.merges.size(); ++k) {
    MergeTable prefix;
    prefix.merges.assign(full.merges.begin(), full.merges.begin() + k);
    const double mean = bpe::mean_units_per_token(corpus, prefix);
    EXPECT_LE(mean, previous);
    previous = mean;
  }
  // With no merges every token splits into its characters: 69 chars over 13 tokens.
  EXPECT_DOUBLE_EQ(bpe::mean_units_per_token(corpus, MergeTable{}), 69.0 / 13.0);
}

TEST(MergeFileTest, WriterAndReaderAreInverse) {
  const MergeTable table = bpe::bpe_learn(
      {{"lower", 5}, {"lowest", 3}, {"newer", 6}, {"caf\xC3\xA9", 4}}, 15);
  std::ostringstream out;
  bpe::write_merges(out, table);
  std::istringstream in(out.str());
  const MergeTable back = bpe::read_merges(in);
  EXPECT_EQ(back.merges, table.merges);
}

TEST(MergeFileTest, HeaderAndLayout) {
  MergeTable table;
  table.merges.push_back({sym(U"a"), sym(U"b", true)});
  table.merges.push_back({sym(U"x"), sym(U"y")});
  std::ostringstream out;
  bpe::write_merges(out, table);
  EXPECT_EQ(out.str(), "#bpe v1\na b</w>\nx y\n");
}

TEST(MergeFileTest, RejectsMalformedFiles) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return bpe::read_merges(in);
  };
  EXPECT_THROW(parse(""), format_error);
  EXPECT_THROW(parse("#bpe v2\n"), format_error);
  EXPECT_THROW(parse("a b</w>\n"), format_error);
  EXPECT_THROW(parse("#bpe v1\nnospace\n"), format_error);
  EXPECT_THROW(parse("#bpe v1\ntoo many parts\n"), format_error);
  EXPECT_NO_THROW(parse("#bpe v1\n"));
  EXPECT_NO_THROW(parse("#bpe v1\na b</w>\n"));
}

}  // namespace
