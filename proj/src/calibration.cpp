#include "biascal/calibration.hpp"

#include <algorithm>

#include "biascal/error.hpp"
#include "biascal/parallel.hpp"
#include "biascal/text.hpp"

namespace biascal {

std::string to_string(CalibrationVariant v) {
  switch (v) {
    case CalibrationVariant::none: return "none";
    case CalibrationVariant::cc: return "cc";
    case CalibrationVariant::dc_english: return "dc-eng";
    case CalibrationVariant::dc_indomain: return "dc-id";
  }
  return "?";
}

CalibrationVariant parse_calibration_variant(const std::string& s) {
  if (s == "none") return CalibrationVariant::none;
  if (s == "cc") return CalibrationVariant::cc;
  if (s == "dc-eng") return CalibrationVariant::dc_english;
  if (s == "dc-id") return CalibrationVariant::dc_indomain;
  throw ConfigError("unknown calibration method '" + s + "' (expected none, cc, dc-eng or dc-id)");
}

void CalibrationMethod::validate() const {
  if (variant == CalibrationVariant::cc) {
    if (content_free_token.empty() || count_words(content_free_token) != 1 ||
        content_free_token.size() != split_words(content_free_token).front().size()) {
      throw ConfigError("content-free token must be a single word, got '" + content_free_token + "'");
    }
  }
  if ((variant == CalibrationVariant::dc_english || variant == CalibrationVariant::dc_indomain) && m_samples == 0) {
    throw ConfigError("number of calibration samples must be >= 1");
  }
  if (length_override && *length_override == 0) throw ConfigError("calibration length must be >= 1");
}

std::vector<double> mean_probs(std::span<const LabelScores> samples) {
  if (samples.empty()) throw DimensionError("cannot average an empty batch of label scores");
  const std::size_t dim = samples.front().size();
  std::vector<double> sum(dim, 0.0);
  for (const auto& s : samples) {
    if (s.size() != dim) throw DimensionError("label score vectors differ in length");
    for (std::size_t y = 0; y < dim; ++y) sum[y] += s.probs[y];
  }
  const auto m = static_cast<double>(samples.size());
  for (double& v : sum) v /= m;
  return sum;
}

std::vector<std::string> content_free_texts(const CalibrationMethod& method, const WordSource& source,
                                            std::size_t default_length, Rng& rng) {
  method.validate();
  switch (method.variant) {
    case CalibrationVariant::none:
      throw ConfigError("calibration method 'none' has no content-free prior");
    case CalibrationVariant::cc: {
      const std::size_t reps = method.length_override.value_or(1);
      std::string text;
      for (std::size_t i = 0; i < reps; ++i) {
        if (i) text += ' ';
        text += method.content_free_token;
      }
      return {text};
    }
    case CalibrationVariant::dc_english:
      if (!std::holds_alternative<std::reference_wrapper<const WordList>>(source)) {
        throw SourceMismatchError("dc-eng calibration samples from an English word list");
      }
      break;
    case CalibrationVariant::dc_indomain:
      if (!std::holds_alternative<std::reference_wrapper<const BagOfWords>>(source)) {
        throw SourceMismatchError("dc-id calibration samples from an in-domain bag of words");
      }
      break;
  }
  const std::size_t length = method.length_override.value_or(std::max<std::size_t>(default_length, 1));
  std::vector<std::string> texts;
  texts.reserve(method.m_samples);
  for (std::size_t j = 0; j < method.m_samples; ++j) texts.push_back(sample_random_text(source, length, rng));
  return texts;
}

PriorEstimate estimate_prior(const Backend& backend, const Template& tmpl, const ContextPrompt& context,
                             const LabelSet& labels, const CalibrationMethod& method, const WordSource& source,
                             std::size_t default_length, Rng& rng) {
  const auto texts = content_free_texts(method, source, default_length, rng);
  std::vector<LabelScores> samples(texts.size());
  parallel_for(texts.size(), backend.max_parallel(), [&](std::size_t j) {
    samples[j] = score_labels(backend, render_prompt(tmpl, context, labels, texts[j]), labels);
  });
  PriorEstimate est;
  est.prior = mean_probs(samples);
  est.mode = method.variant;
  est.m_samples = texts.size();
  est.length = method.variant == CalibrationVariant::cc ? method.length_override.value_or(1)
                                                         : method.length_override.value_or(default_length);
  est.context_seed = context.seed;
  return est;
}

std::size_t calibrated_predict(const LabelScores& scores, std::span<const double> prior) {
  if (scores.size() != prior.size() || scores.size() == 0) {
    throw DimensionError("scores have " + std::to_string(scores.size()) + " labels, prior has " +
                         std::to_string(prior.size()));
  }
  std::size_t best = 0;
  double best_ratio = scores.probs[0] / std::max(prior[0], kPriorFloor);
  for (std::size_t y = 1; y < prior.size(); ++y) {
    const double r = scores.probs[y] / std::max(prior[y], kPriorFloor);
    if (r > best_ratio) {
      best_ratio = r;
      best = y;
    }
  }
  return best;
}

std::size_t predict_uncalibrated(const LabelScores& scores) {
  std::size_t best = 0;
  for (std::size_t y = 1; y < scores.size(); ++y) {
    if (scores.probs[y] > scores.probs[best]) best = y;
  }
  return best;
}

}  // namespace biascal
