#include "biascal/sampling.hpp"

#include <map>

#include <gtest/gtest.h>

#include "biascal/error.hpp"
#include "biascal/text.hpp"
#include "support/synthetic.hpp"

namespace biascal {
namespace {

TEST(BuildBagTest, KeepsEveryOccurrence) {
  const std::vector<std::string> texts = {"the cat sat", "the dog"};
  const auto bag = build_bag(texts, "d");
  EXPECT_EQ(bag.tokens(), (std::vector<std::string>{"the", "cat", "sat", "the", "dog"}));
  EXPECT_EQ(bag.source_id(), "d");
}

TEST(BuildBagTest, SplitsOnAnyWhitespaceRun) {
  const std::vector<std::string> texts = {"  a \t b\n\nc  "};
  EXPECT_EQ(build_bag(texts, "d").tokens(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(BuildBagTest, EmptyCorpus) {
  const std::vector<std::string> blank = {"", "   "};
  EXPECT_THROW(build_bag(blank, "d"), EmptyCorpusError);
  EXPECT_THROW(build_bag(std::vector<std::string>{}, "d"), EmptyCorpusError);
  EXPECT_THROW(BagOfWords({}, "d"), EmptyCorpusError);
}

TEST(AvgLengthTest, RoundsHalfUp) {
  EXPECT_EQ(avg_length(std::vector<std::string>{"a b c", "a b c d e"}), 4u);
  EXPECT_EQ(avg_length(std::vector<std::string>{"a b c", "a b c d"}), 4u);  // 3.5
  EXPECT_EQ(avg_length(std::vector<std::string>{"a b", "a b c d e f g h i j"}), 6u);
  EXPECT_EQ(avg_length(std::vector<std::string>{"a", "a", "a b"}), 1u);   // 1.33
  EXPECT_EQ(avg_length(std::vector<std::string>{"", ""}), 1u);
  EXPECT_THROW(avg_length(std::vector<std::string>{}), EmptyCorpusError);
}

TEST(AvgLengthTest, MatchesFloatingPointRounding) {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> texts(1 + uniform_index(rng, 9));
    std::size_t total = 0;
    for (auto& t : texts) {
      const std::size_t n = uniform_index(rng, 12);
      total += n;
      for (std::size_t i = 0; i < n; ++i) t += "w ";
    }
    const double mean = static_cast<double>(total) / static_cast<double>(texts.size());
    const auto expected = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(mean + 0.5)));
    EXPECT_EQ(avg_length(texts), expected);
  }
}

TEST(SampleRandomTextTest, SingleWordBag) {
  const auto bag = build_bag(std::vector<std::string>{"a a a"}, "d");
  Rng rng(1);
  EXPECT_EQ(sample_random_text(bag, 4, rng), "a a a a");
}

TEST(SampleRandomTextTest, LengthAndDeterminism) {
  const WordList words({"alpha", "beta", "gamma", "delta"});
  for (std::size_t len : {1u, 3u, 17u}) {
    Rng a = make_rng(9, "x");
    Rng b = make_rng(9, "x");
    const auto ta = sample_random_text(words, len, a);
    EXPECT_EQ(ta, sample_random_text(words, len, b));
    EXPECT_EQ(count_words(ta), len);
    for (const auto& w : split_words(ta)) {
      EXPECT_NE(std::find(words.words().begin(), words.words().end(), w), words.words().end());
    }
  }
}

TEST(SampleRandomTextTest, FollowsCorpusFrequencies) {
  const auto bag = build_bag(std::vector<std::string>{"x x x y"}, "d");
  Rng rng = make_rng(2, "freq");
  std::size_t x = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) x += sample_random_text(bag, 1, rng) == "x";
  EXPECT_NEAR(static_cast<double>(x) / n, 0.75, 0.02);
}

// Every drawn word appears in the bag; with a large enough sample each
// word's share tracks its multiplicity.
TEST(SampleRandomTextTest, MatchesBruteForceMultiplicities) {
  const std::vector<std::string> texts = {"a b b c c c", "d d d d"};
  const auto bag = build_bag(texts, "d");
  std::map<std::string, double> expected;
  for (const auto& t : bag.tokens()) expected[t] += 1.0 / static_cast<double>(bag.size());

  Rng rng = make_rng(4, "mult");
  std::map<std::string, std::size_t> got;
  const std::size_t n = 5000, len = 4;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& w : split_words(sample_random_text(bag, len, rng))) ++got[w];
  }
  for (const auto& [w, c] : got) ASSERT_TRUE(expected.count(w)) << w;
  for (const auto& [w, p] : expected) EXPECT_NEAR(static_cast<double>(got[w]) / (n * len), p, 0.015) << w;
}

TEST(SampleRandomTextTest, VariantDispatch) {
  const WordList words({"only"});
  const auto bag = build_bag(std::vector<std::string>{"mine"}, "d");
  Rng rng(0);
  EXPECT_EQ(sample_random_text(WordSource(std::cref(words)), 2, rng), "only only");
  EXPECT_EQ(sample_random_text(WordSource(std::cref(bag)), 2, rng), "mine mine");
}

TEST(WordListTest, Invariants) {
  EXPECT_THROW(WordList({}), ConfigError);
  EXPECT_THROW(WordList({"Upper"}), ConfigError);
  EXPECT_THROW(WordList({"dup", "dup"}), ConfigError);
  EXPECT_THROW(WordList({"two words"}), ConfigError);
}

TEST(WordListTest, LoadsFile) {
  testing::TempDir dir("biascal-words");
  testing::write_file(dir / "w.txt", "apple\n\n  banana \ncherry\n");
  EXPECT_EQ(load_word_list(dir / "w.txt").words(), (std::vector<std::string>{"apple", "banana", "cherry"}));
  testing::write_file(dir / "bad.txt", "apple pie\n");
  EXPECT_THROW(load_word_list(dir / "bad.txt"), ConfigError);
  EXPECT_THROW(load_word_list(dir / "missing.txt"), ConfigError);
}

TEST(WordListTest, BundledListIsValid) {
  const auto words = load_word_list(std::filesystem::path(BIASCAL_SOURCE_DIR) / "data" / "english_words.txt");
  EXPECT_GE(words.size(), 1000u);
}

TEST(RngTest, DeriveSeedSeparatesTags) {
  EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(RngTest, UniformIndexStaysInRange) {
  Rng rng(77);
  std::vector<std::size_t> counts(7);
  for (int i = 0; i < 70000; ++i) {
    const auto v = uniform_index(rng, 7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c), 10000.0, 500.0);
}

}  // namespace
}  // namespace biascal
