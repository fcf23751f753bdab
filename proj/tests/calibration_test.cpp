#include "biascal/calibration.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "biascal/error.hpp"
#include "biascal/mock_backend.hpp"
#include "biascal/text.hpp"
#include "support/synthetic.hpp"

namespace biascal {
namespace {

const LabelSet kBinary({"negative", "positive"});
const Template kTemplate{"Input:", "Label:", "\n\n", {}};

LabelScores scores(std::vector<double> p) { return LabelScores{std::move(p)}; }

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double z = 0;
  for (double& x : v) z += x = 1e-3 + static_cast<double>(uniform_index(rng, 1000000)) / 1e6;
  for (double& x : v) x /= z;
  return v;
}

TEST(MeanProbsTest, ArithmeticMean) {
  const std::vector<LabelScores> one = {scores({0.25, 0.75})};
  EXPECT_EQ(mean_probs(one), (std::vector<double>{0.25, 0.75}));
  const std::vector<LabelScores> two = {scores({0.6, 0.4}), scores({0.8, 0.2})};
  const auto m = mean_probs(two);
  EXPECT_NEAR(m[0], 0.7, 1e-15);
  EXPECT_NEAR(m[1], 0.3, 1e-15);
  EXPECT_THROW(mean_probs(std::vector<LabelScores>{}), DimensionError);
  EXPECT_THROW(mean_probs(std::vector<LabelScores>{scores({1.0}), scores({0.5, 0.5})}), DimensionError);
}

TEST(CalibratedPredictTest, Examples) {
  EXPECT_EQ(calibrated_predict(scores({0.7, 0.3}), std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_EQ(calibrated_predict(scores({0.7, 0.3}), std::vector<double>{0.95, 0.05}), 1u);
  EXPECT_EQ(calibrated_predict(scores({0.5, 0.5}), std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_THROW(calibrated_predict(scores({0.5, 0.5}), std::vector<double>{1.0}), DimensionError);
}

TEST(CalibratedPredictTest, ZeroPriorIsFloored) {
  EXPECT_EQ(calibrated_predict(scores({0.9, 0.1}), std::vector<double>{0.0, 1.0}), 0u);
  EXPECT_EQ(calibrated_predict(scores({0.9, 1e-300}), std::vector<double>{1.0, 0.0}), 0u);
}

TEST(PredictUncalibratedTest, Examples) {
  EXPECT_EQ(predict_uncalibrated(scores({0.9, 0.1})), 0u);
  EXPECT_EQ(predict_uncalibrated(scores({0.2, 0.3, 0.5})), 2u);
  EXPECT_EQ(predict_uncalibrated(scores({0.5, 0.5})), 0u);
}

TEST(CalibrationPropertyTest, UniformPriorIsIdentity) {
  Rng rng(101);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + uniform_index(rng, 5);
    auto s = scores(random_simplex(rng, n));
    if (i % 10 == 0) s.probs[1] = s.probs[0];  // exercise ties
    const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    EXPECT_EQ(calibrated_predict(s, uniform), predict_uncalibrated(s));
  }
}

TEST(CalibrationPropertyTest, PriorScaleInvariance) {
  Rng rng(102);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + uniform_index(rng, 5);
    const auto s = scores(random_simplex(rng, n));
    const auto prior = random_simplex(rng, n);
    // Powers of two keep the ratios exact, so ties survive scaling too.
    const double c = std::ldexp(1.0, static_cast<int>(uniform_index(rng, 41)) - 20);
    std::vector<double> scaled = prior;
    for (double& p : scaled) p *= c;
    EXPECT_EQ(calibrated_predict(s, prior), calibrated_predict(s, scaled));
  }
}

TEST(CalibrationPropertyTest, BatchMeanLinearity) {
  Rng rng(103);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + uniform_index(rng, 4);
    const std::size_t m1 = 1 + uniform_index(rng, 10), m2 = 1 + uniform_index(rng, 10);
    std::vector<LabelScores> a, b;
    for (std::size_t j = 0; j < m1; ++j) a.push_back(scores(random_simplex(rng, n)));
    for (std::size_t j = 0; j < m2; ++j) b.push_back(scores(random_simplex(rng, n)));
    std::vector<LabelScores> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto pa = mean_probs(a), pb = mean_probs(b), pab = mean_probs(ab);
    for (std::size_t y = 0; y < n; ++y) {
      const double weighted = (static_cast<double>(m1) * pa[y] + static_cast<double>(m2) * pb[y]) /
                              static_cast<double>(m1 + m2);
      EXPECT_NEAR(pab[y], weighted, 1e-12);
    }
  }
}

// Drawing M1 then M2 samples from one generator equals drawing M1 + M2.
TEST(EstimatePriorTest, ConcatenatedBatchesAreWeightedMeans) {
  const auto corpus = testing::make_biased_corpus();
  const MockBackend backend(corpus.table);
  const auto bag = build_bag(corpus.dataset.texts(), "synthetic");
  const ContextPrompt empty;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng split = make_rng(seed, "lin");
    const auto p1 = estimate_prior(backend, kTemplate, empty, kBinary, CalibrationMethod::dc_indomain(3),
                                   std::cref(bag), 1, split);
    const auto p2 = estimate_prior(backend, kTemplate, empty, kBinary, CalibrationMethod::dc_indomain(5),
                                   std::cref(bag), 1, split);
    Rng joint = make_rng(seed, "lin");
    const auto p = estimate_prior(backend, kTemplate, empty, kBinary, CalibrationMethod::dc_indomain(8),
                                  std::cref(bag), 1, joint);
    for (std::size_t y = 0; y < 2; ++y) EXPECT_NEAR(p.prior[y], (3 * p1.prior[y] + 5 * p2.prior[y]) / 8, 1e-12);
  }
}

TEST(EstimatePriorTest, SingleSampleIsThatSample) {
  const auto corpus = testing::make_biased_corpus();
  const MockBackend backend(corpus.table);
  const auto bag = build_bag(corpus.dataset.texts(), "synthetic");
  Rng a = make_rng(3, "one"), b = make_rng(3, "one");
  const auto est = estimate_prior(backend, kTemplate, {}, kBinary, CalibrationMethod::dc_indomain(1), std::cref(bag),
                                  1, a);
  const auto text = sample_random_text(bag, 1, b);
  const auto direct = score_labels(backend, render_prompt(kTemplate, {}, kBinary, text), kBinary);
  EXPECT_EQ(est.prior, direct.probs);
  EXPECT_EQ(est.m_samples, 1u);
}

TEST(EstimatePriorTest, PromptIndependentMockIsUniformForEveryMode) {
  const MockBackend backend(AssociationTable{{0.0, 0.0}, {}});
  const WordList words({"alpha", "beta"});
  const auto bag = build_bag(std::vector<std::string>{"x y z"}, "d");
  for (std::size_t m : {1u, 5u, 20u}) {
    for (const auto& [method, source] :
         std::vector<std::pair<CalibrationMethod, WordSource>>{{CalibrationMethod::cc(), std::cref(words)},
                                                               {CalibrationMethod::dc_english(m), std::cref(words)},
                                                               {CalibrationMethod::dc_indomain(m), std::cref(bag)}}) {
      Rng rng(m);
      const auto est = estimate_prior(backend, kTemplate, {}, kBinary, method, source, 2, rng);
      EXPECT_EQ(est.prior, (std::vector<double>{0.5, 0.5}));
    }
  }
}

TEST(ContentFreeTextsTest, CcUsesTheTokenOnce) {
  const WordList words({"alpha"});
  Rng rng(0);
  EXPECT_EQ(content_free_texts(CalibrationMethod::cc(), std::cref(words), 7, rng), (std::vector<std::string>{"N/A"}));
  auto repeated = CalibrationMethod::cc("[MASK]");
  repeated.length_override = 3;
  EXPECT_EQ(content_free_texts(repeated, std::cref(words), 7, rng),
            (std::vector<std::string>{"[MASK] [MASK] [MASK]"}));
}

TEST(ContentFreeTextsTest, DcUsesDefaultOrOverriddenLength) {
  const WordList words({"alpha", "beta"});
  Rng rng(0);
  const auto texts = content_free_texts(CalibrationMethod::dc_english(4), std::cref(words), 3, rng);
  ASSERT_EQ(texts.size(), 4u);
  for (const auto& t : texts) EXPECT_EQ(count_words(t), 3u);
  auto m = CalibrationMethod::dc_english(2);
  m.length_override = 6;
  for (const auto& t : content_free_texts(m, std::cref(words), 3, rng)) EXPECT_EQ(count_words(t), 6u);
}

TEST(ContentFreeTextsTest, SourceMismatchAndInvalidMethods) {
  const WordList words({"alpha"});
  const auto bag = build_bag(std::vector<std::string>{"x"}, "d");
  Rng rng(0);
  EXPECT_THROW(content_free_texts(CalibrationMethod::dc_english(), std::cref(bag), 1, rng), SourceMismatchError);
  EXPECT_THROW(content_free_texts(CalibrationMethod::dc_indomain(), std::cref(words), 1, rng), SourceMismatchError);
  EXPECT_THROW(content_free_texts(CalibrationMethod::none(), std::cref(words), 1, rng), ConfigError);
  EXPECT_THROW(content_free_texts(CalibrationMethod::cc("two words"), std::cref(words), 1, rng), ConfigError);
  EXPECT_THROW(content_free_texts(CalibrationMethod::dc_indomain(0), std::cref(bag), 1, rng), ConfigError);
}

TEST(CalibrationVariantTest, RoundTrip) {
  for (auto v : {CalibrationVariant::none, CalibrationVariant::cc, CalibrationVariant::dc_english,
                 CalibrationVariant::dc_indomain}) {
    EXPECT_EQ(parse_calibration_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_calibration_variant("dc"), ConfigError);
}

// Three-label mock where every in-domain word carries the same random
// offset d plus a bump h toward its own class. Dividing by the in-domain
// prior recovers each word's class for every word of the vocabulary, for
// the exact (enumerated) prior and for a large-M estimate of it.
TEST(BiasCancellationTest, InDomainPriorRecoversOffsetFreeArgmax) {
  const LabelSet labels({"a", "b", "c"});
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> d(3);
    for (double& x : d) x = static_cast<double>(uniform_index(rng, 600)) / 100.0 - 3.0;
    const double h = 0.2 + static_cast<double>(uniform_index(rng, 200)) / 100.0;

    AssociationTable table{{0.0, 0.0, 0.0}, {}};
    std::vector<std::pair<std::string, std::size_t>> vocab;
    std::string corpus;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < 2; ++i) {
        const auto w = testing::class_word(c, i);
        auto v = d;
        v[c] += h;
        table.assoc[w] = v;
        vocab.emplace_back(w, c);
        corpus += w + " ";
      }
    }
    const MockBackend backend(table);
    const auto bag = build_bag(std::vector<std::string>{corpus}, "d");

    std::vector<LabelScores> per_word;
    for (const auto& [w, c] : vocab) per_word.push_back(score_labels(backend, render_prompt(kTemplate, {}, labels, w), labels));
    const auto exact = mean_probs(per_word);

    Rng sample_rng = make_rng(static_cast<std::uint64_t>(trial), "cancel");
    const auto est = estimate_prior(backend, kTemplate, {}, labels, CalibrationMethod::dc_indomain(3000), std::cref(bag),
                                    1, sample_rng);
    for (std::size_t y = 0; y < 3; ++y) EXPECT_NEAR(est.prior[y], exact[y], 0.03);

    for (std::size_t i = 0; i < vocab.size(); ++i) {
      EXPECT_EQ(calibrated_predict(per_word[i], exact), vocab[i].second) << "trial " << trial;
      EXPECT_EQ(calibrated_predict(per_word[i], est), vocab[i].second) << "trial " << trial;
    }
  }
}

TEST(BiasCancellationTest, PriorConvergesToOffsetSoftmaxWithoutBumps) {
  // h = 0: every in-domain text scores exactly softmax(d).
  AssociationTable table{{0.0, 0.0}, {{"x", {0.0, std::log(19.0)}}, {"y", {0.0, std::log(19.0)}}}};
  const MockBackend backend(table);
  const auto bag = build_bag(std::vector<std::string>{"x y x"}, "d");
  for (std::size_t m : {1u, 10u, 100u}) {
    Rng rng(m);
    const auto est =
        estimate_prior(backend, kTemplate, {}, kBinary, CalibrationMethod::dc_indomain(m), std::cref(bag), 1, rng);
    EXPECT_NEAR(est.prior[0], 0.05, 1e-12);
    EXPECT_NEAR(est.prior[1], 0.95, 1e-12);
  }
}

}  // namespace
}  // namespace biascal
