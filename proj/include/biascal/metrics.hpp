#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biascal/backend.hpp"
#include "biascal/core.hpp"
#include "biascal/rng.hpp"
#include "biascal/sampling.hpp"

namespace biascal {

struct BiasScore {
  double value = 0.0;  // in [0, 1]
  std::string dataset_id;
  std::string model_id;
  std::size_t length = 1;     // words per random text
  std::size_t n_samples = 0;  // random texts per side
  std::vector<double> english_prior;
  std::vector<double> indomain_prior;
};

// Half the L1 distance between two priors over the same label set.
// Throws DimensionError when the lengths differ.
double bias_from_priors(std::span<const double> english_prior, std::span<const double> indomain_prior);

// Domain-label bias of a backend on a dataset: zero-shot priors from
// n_samples random English texts and n_samples random in-domain texts
// (both of the dataset's average length), compared with bias_from_priors.
// The in-domain bag is built from the dataset's evaluation texts.
BiasScore domain_label_bias(const Backend& backend, const Dataset& dataset, const WordList& words,
                            std::size_t n_samples, Rng& rng);

enum class BiasTier { small, medium, large };
std::string to_string(BiasTier t);

struct Tiers {
  std::vector<BiasScore> small;
  std::vector<BiasScore> medium;
  std::vector<BiasScore> large;
};

// Sorts by value (ties by dataset id, then model id) and cuts into three
// contiguous groups. Sizes differ by at most one; leftovers go to the
// larger-bias tiers (n = 4 -> 1/1/2, n = 5 -> 1/2/2).
Tiers stratify(std::vector<BiasScore> scores);

// Unweighted mean of per-class F1 over all n_classes. A class that is
// neither predicted nor gold scores 0.
double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> golds, std::size_t n_classes);

struct PredictionDistribution {
  std::vector<std::size_t> counts;
  std::optional<std::vector<double>> fractions;  // nullopt when there are no predictions
};

PredictionDistribution prediction_distribution(std::span<const std::size_t> preds, std::size_t n_classes);

// Pearson product-moment correlation. Throws MetricError on fewer than two
// points, mismatched lengths or zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

// Pearson r between two models' bias scores over the same datasets, which
// must appear in the same order.
double bias_correlation(std::span<const BiasScore> model_a, std::span<const BiasScore> model_b);

}  // namespace biascal
