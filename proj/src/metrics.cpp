#include "biascal/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "biascal/calibration.hpp"
#include "biascal/error.hpp"

namespace biascal {

double bias_from_priors(std::span<const double> english_prior, std::span<const double> indomain_prior) {
  if (english_prior.size() != indomain_prior.size()) {
    throw DimensionError("bias: priors have " + std::to_string(english_prior.size()) + " and " +
                         std::to_string(indomain_prior.size()) + " labels");
  }
  double l1 = 0.0;
  for (std::size_t y = 0; y < english_prior.size(); ++y) l1 += std::abs(english_prior[y] - indomain_prior[y]);
  return std::clamp(0.5 * l1, 0.0, 1.0);
}

BiasScore domain_label_bias(const Backend& backend, const Dataset& dataset, const WordList& words,
                            std::size_t n_samples, Rng& rng) {
  if (n_samples == 0) throw ConfigError("bias measurement needs at least one sample per side");
  const auto texts = dataset.texts();
  const std::size_t length = avg_length(texts);
  const BagOfWords bag = build_bag(texts, dataset.id);
  const ContextPrompt zero_shot;

  const auto eng = estimate_prior(backend, dataset.prompt_template, zero_shot, dataset.label_set,
                                  CalibrationMethod::dc_english(n_samples), std::cref(words), length, rng);
  const auto ind = estimate_prior(backend, dataset.prompt_template, zero_shot, dataset.label_set,
                                  CalibrationMethod::dc_indomain(n_samples), std::cref(bag), length, rng);

  BiasScore out;
  out.value = bias_from_priors(eng.prior, ind.prior);
  out.dataset_id = dataset.id;
  out.model_id = backend.model_id();
  out.length = length;
  out.n_samples = n_samples;
  out.english_prior = eng.prior;
  out.indomain_prior = ind.prior;
  return out;
}

std::string to_string(BiasTier t) {
  switch (t) {
    case BiasTier::small: return "small";
    case BiasTier::medium: return "medium";
    case BiasTier::large: return "large";
  }
  return "?";
}

Tiers stratify(std::vector<BiasScore> scores) {
  std::sort(scores.begin(), scores.end(), [](const BiasScore& a, const BiasScore& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dataset_id != b.dataset_id) return a.dataset_id < b.dataset_id;
    return a.model_id < b.model_id;
  });
  const std::size_t n = scores.size();
  const std::size_t base = n / 3;
  const std::size_t rem = n % 3;
  const std::size_t n_small = base;
  const std::size_t n_medium = base + (rem == 2 ? 1 : 0);

  Tiers t;
  auto it = scores.begin();
  t.small.assign(std::make_move_iterator(it), std::make_move_iterator(it + static_cast<std::ptrdiff_t>(n_small)));
  it += static_cast<std::ptrdiff_t>(n_small);
  t.medium.assign(std::make_move_iterator(it), std::make_move_iterator(it + static_cast<std::ptrdiff_t>(n_medium)));
  it += static_cast<std::ptrdiff_t>(n_medium);
  t.large.assign(std::make_move_iterator(it), std::make_move_iterator(scores.end()));
  return t;
}

double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> golds, std::size_t n_classes) {
  if (preds.size() != golds.size()) {
    throw MetricError("macro-F1: " + std::to_string(preds.size()) + " predictions vs " +
                      std::to_string(golds.size()) + " gold labels");
  }
  if (n_classes == 0) throw MetricError("macro-F1 needs at least one class");
  std::vector<std::size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= n_classes || golds[i] >= n_classes) throw MetricError("macro-F1: label index out of range");
    if (preds[i] == golds[i]) {
      ++tp[preds[i]];
    } else {
      ++fp[preds[i]];
      ++fn[golds[i]];
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom) sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(n_classes);
}

PredictionDistribution prediction_distribution(std::span<const std::size_t> preds, std::size_t n_classes) {
  PredictionDistribution d;
  d.counts.assign(n_classes, 0);
  for (std::size_t p : preds) {
    if (p >= n_classes) throw MetricError("prediction index out of range");
    ++d.counts[p];
  }
  if (!preds.empty()) {
    std::vector<double> f(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
      f[c] = static_cast<double>(d.counts[c]) / static_cast<double>(preds.size());
    }
    d.fractions = std::move(f);
  }
  return d;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MetricError("correlation: series have different lengths");
  if (a.size() < 2) throw MetricError("correlation needs at least two points");
  const auto n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw MetricError("correlation undefined: zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double bias_correlation(std::span<const BiasScore> model_a, std::span<const BiasScore> model_b) {
  if (model_a.size() != model_b.size()) throw MetricError("bias correlation: models cover different datasets");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < model_a.size(); ++i) {
    if (model_a[i].dataset_id != model_b[i].dataset_id) {
      throw MetricError("bias correlation: dataset '" + model_a[i].dataset_id + "' aligned with '" +
                        model_b[i].dataset_id + "'");
    }
    a.push_back(model_a[i].value);
    b.push_back(model_b[i].value);
  }
  return pearson(a, b);
}

}  // namespace biascal
