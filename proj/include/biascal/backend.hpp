#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biascal/core.hpp"

namespace biascal {

// Per-label probabilities, aligned with LabelSet order, renormalized over
// the label set. Entries are > 0 and sum to 1 within 1e-9.
struct LabelScores {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

// Softmax over the label set. Adding a constant to every log-score leaves
// the result unchanged. Underflowed entries are floored at the smallest
// normal double so the positivity invariant holds.
LabelScores softmax_scores(std::span<const double> logscores);

// The scoring contract: one log-score per label verbalization, read as the
// continuation " " + name of the prompt. Implementations must be safe to
// call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string kind() const = 0;
  virtual std::string model_id() const = 0;
  virtual std::vector<double> label_logscores(const std::string& prompt, const LabelSet& labels) const = 0;

  // Upper bound on concurrent label_logscores() calls worth issuing.
  virtual std::size_t max_parallel() const { return 1; }
};

// score_labels = softmax(backend.label_logscores(prompt, labels)).
// Throws ScoringError on an empty prompt or a wrong-sized response.
LabelScores score_labels(const Backend& backend, const std::string& prompt, const LabelSet& labels);

enum class BackendKind { remote, mock };

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string endpoint;  // remote: base URL, e.g. http://localhost:8000
  std::string model;     // remote: model id sent with each request; mock: report label
  std::chrono::milliseconds timeout{30000};
  std::size_t max_parallel = 4;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> mock_table;  // JSON association table
  std::string api_key_env = "BIASCAL_API_KEY";

  // Throws ConfigError on violated invariants (remote without endpoint or
  // model, zero parallelism).
  void validate() const;
};

BackendKind parse_backend_kind(const std::string& s);
std::string to_string(BackendKind kind);

// Builds the configured backend, wrapped in a ScoreCache when cache_dir is
// set.
std::unique_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace biascal
