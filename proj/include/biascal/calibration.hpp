#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biascal/backend.hpp"
#include "biascal/core.hpp"
#include "biascal/rng.hpp"
#include "biascal/sampling.hpp"

namespace biascal {

enum class CalibrationVariant { none, cc, dc_english, dc_indomain };

// CLI spellings: none, cc, dc-eng, dc-id.
std::string to_string(CalibrationVariant v);
CalibrationVariant parse_calibration_variant(const std::string& s);

struct CalibrationMethod {
  CalibrationVariant variant = CalibrationVariant::none;
  std::string content_free_token = "N/A";  // cc only
  std::size_t m_samples = 20;              // dc only; cc always uses one sample
  std::optional<std::size_t> length_override;

  static CalibrationMethod none() { return {}; }
  static CalibrationMethod cc(std::string token = "N/A") {
    return {CalibrationVariant::cc, std::move(token), 1, std::nullopt};
  }
  static CalibrationMethod dc_english(std::size_t m = 20) { return {CalibrationVariant::dc_english, "N/A", m, std::nullopt}; }
  static CalibrationMethod dc_indomain(std::size_t m = 20) { return {CalibrationVariant::dc_indomain, "N/A", m, std::nullopt}; }

  // Throws ConfigError on an empty or multi-word cc token, or m_samples == 0
  // for the dc variants.
  void validate() const;
};

// Averaged content-free prior for one context.
struct PriorEstimate {
  std::vector<double> prior;
  CalibrationVariant mode = CalibrationVariant::cc;
  std::size_t m_samples = 1;
  std::size_t length = 1;
  std::uint64_t context_seed = 0;
};

// Arithmetic mean of probability vectors, accumulated in index order.
// Throws DimensionError on an empty batch or ragged vectors.
std::vector<double> mean_probs(std::span<const LabelScores> samples);

// The content-free texts the method scores, in sample order.
//   cc: the token repeated length_override times (once by default)
//   dc_english / dc_indomain: m_samples random texts of L words, where
//   L = length_override or default_length
// Throws SourceMismatchError when a dc variant gets the wrong source kind.
std::vector<std::string> content_free_texts(const CalibrationMethod& method, const WordSource& source,
                                            std::size_t default_length, Rng& rng);

// prior = mean over content-free texts t_j of
//         score_labels(render_prompt(template, context, labels, t_j)).
// Scoring runs on up to backend.max_parallel() threads; the reduction is in
// sample order.
PriorEstimate estimate_prior(const Backend& backend, const Template& tmpl, const ContextPrompt& context,
                             const LabelSet& labels, const CalibrationMethod& method, const WordSource& source,
                             std::size_t default_length, Rng& rng);

inline constexpr double kPriorFloor = 1e-12;

// argmax_y scores[y] / max(prior[y], kPriorFloor); lowest index on ties.
std::size_t calibrated_predict(const LabelScores& scores, std::span<const double> prior);
inline std::size_t calibrated_predict(const LabelScores& scores, const PriorEstimate& prior) {
  return calibrated_predict(scores, prior.prior);
}

// argmax_y scores[y]; lowest index on ties.
std::size_t predict_uncalibrated(const LabelScores& scores);

}  // namespace biascal
