#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biascal/backend.hpp"
#include "biascal/calibration.hpp"
#include "biascal/core.hpp"
#include "biascal/metrics.hpp"
#include "biascal/sampling.hpp"

namespace biascal {

// Seed for the evaluation subsample. Fixed so every seed and method is
// scored on the same subset.
inline constexpr std::uint64_t kSubsampleSeed = 0;

struct RunSpec {
  std::vector<CalibrationVariant> methods = {CalibrationVariant::none, CalibrationVariant::cc,
                                             CalibrationVariant::dc_english, CalibrationVariant::dc_indomain};
  std::size_t k = 8;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::size_t m_samples = 20;
  std::size_t eval_cap = 500;
  std::optional<std::vector<std::string>> label_override;
  std::optional<std::size_t> cal_length;
  std::string cc_token = "N/A";
  std::optional<std::size_t> bag_cap;  // unlabeled texts used for the in-domain bag
  bool bias_tiers = true;              // also measure bias and report tier means
  std::size_t bias_samples = 20;
  std::uint64_t bias_seed = 0;

  // Throws ConfigError on empty seeds/methods, eval_cap == 0, m_samples == 0
  // or a zero bag cap / calibration length.
  void validate() const;

  CalibrationMethod method(CalibrationVariant v) const;
};

struct ExampleRecord {
  std::string dataset_id;
  std::uint64_t seed = 0;
  CalibrationVariant method = CalibrationVariant::none;
  std::size_t index = 0;  // position in the dataset's evaluation file
  std::vector<double> scores;
  std::optional<std::vector<double>> prior;
  std::size_t prediction = 0;
  std::size_t gold = 0;
};

struct CellResult {
  std::string dataset_id;
  CalibrationVariant method = CalibrationVariant::none;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::uint64_t context_seed = 0;
  std::size_t n_examples = 0;
  double macro_f1 = 0.0;
  PredictionDistribution distribution;
  std::optional<std::vector<double>> prior;
  std::optional<std::string> error;
};

struct Aggregate {
  std::string dataset_id;
  CalibrationVariant method = CalibrationVariant::none;
  std::size_t n_seeds = 0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // sample standard deviation, 0 for a single seed
};

struct TierMean {
  BiasTier tier = BiasTier::small;
  CalibrationVariant method = CalibrationVariant::none;
  std::size_t n_datasets = 0;
  double mean_f1 = 0.0;
};

struct BiasCell {
  std::string dataset_id;
  std::string model_id;
  std::optional<BiasScore> score;
  std::optional<std::string> error;
};

struct EvalReport {
  std::vector<CellResult> cells;  // dataset, seed, method order
  std::vector<ExampleRecord> examples;
  std::vector<Aggregate> aggregates;
  std::vector<BiasCell> bias;
  std::map<std::string, BiasTier> tier_of;
  std::vector<TierMean> tier_means;

  bool has_errors() const;
};

// Mean and sample standard deviation, summed in input order.
std::pair<double, double> mean_std(std::span<const double> xs);

// Indices into dataset.examples making up the evaluation set: every
// labeled example, reduced to `cap` by a seeded uniform draw when larger,
// in ascending order.
std::vector<std::size_t> evaluation_indices(const Dataset& dataset, std::size_t cap);

// Runs every (dataset, seed) cell of the spec. Each cell builds one
// context, scores every evaluation example once and applies all methods to
// the same scores; each calibrated method estimates its prior once per
// cell. Errors abort only the affected cell and are recorded in it.
EvalReport run_eval(const RunSpec& spec, const std::vector<Dataset>& datasets, const Backend& backend,
                    const WordList& words);

struct BiasScanResult {
  std::vector<std::string> model_ids;
  std::vector<BiasCell> cells;  // dataset-major, models in model_ids order
  std::map<std::string, BiasTier> tier_of;  // by first model's scores
  // correlation[i][j] between model_ids[i] and model_ids[j]; nullopt when
  // undefined (fewer than two shared datasets, zero variance).
  std::vector<std::vector<std::optional<double>>> correlation;

  bool has_errors() const;
};

BiasScanResult run_bias_scan(const std::vector<Dataset>& datasets, const std::vector<const Backend*>& backends,
                             const WordList& words, std::size_t n_samples, std::uint64_t seed);

enum class SweepAxis { m_samples, corpus_size, cal_length };
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);

struct SweepPoint {
  std::size_t value = 0;
  CalibrationVariant method = CalibrationVariant::dc_indomain;
  std::vector<double> f1_per_seed;  // seed order
  std::vector<std::vector<double>> prior_per_seed;
  std::size_t n_errors = 0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  // Sum over labels of the across-seed sample variance of the prior.
  double prior_variance = 0.0;
};

// Re-runs the calibrated cell at each grid value of one axis: dc-id for
// m_samples and corpus_size, dc-eng for cal_length. A corpus_size value of
// 0 means the full evaluation corpus.
std::vector<SweepPoint> run_sensitivity(const Dataset& dataset, const Backend& backend, const WordList& words,
                                        const RunSpec& base, SweepAxis axis, const std::vector<std::size_t>& grid);

}  // namespace biascal
