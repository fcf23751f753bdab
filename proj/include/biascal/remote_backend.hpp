#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>
#include <vector>

#include "biascal/backend.hpp"

namespace biascal {

struct RemoteOptions {
  std::string endpoint;  // scheme://host[:port][/base], completions live at <base>/v1/completions
  std::string model;
  std::string api_key;  // sent as a Bearer token when non-empty
  std::chrono::milliseconds timeout{30000};
  std::size_t max_parallel = 4;
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};  // doubles after each failed attempt
};

// Scores labels against an OpenAI-compatible /v1/completions endpoint.
// One request per label: the prompt is sent with " " + label appended,
// echo on and logprobs requested; the label's log-score is the sum of the
// echoed token logprobs whose text offset falls inside the appended
// continuation.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteOptions options);

  std::string kind() const override { return "remote"; }
  std::string model_id() const override { return options_.model; }
  std::vector<double> label_logscores(const std::string& prompt, const LabelSet& labels) const override;
  std::size_t max_parallel() const override { return options_.max_parallel; }

  // Number of HTTP requests issued so far, retries included.
  std::size_t request_count() const noexcept { return requests_.load(); }

  // Continuation log-score of `continuation` given `prompt`, one request.
  double continuation_logprob(const std::string& prompt, const std::string& continuation) const;

 private:
  class Slot;

  std::string post_completion(const std::string& body) const;

  RemoteOptions options_;
  std::string host_;  // scheme://host:port
  std::string path_;  // <base>/v1/completions
  mutable std::atomic<std::size_t> requests_{0};
  mutable std::mutex slots_mutex_;
  mutable std::condition_variable slots_cv_;
  mutable std::size_t in_flight_ = 0;
};

// Extracts the continuation log-score from a completions response body.
// The continuation occupies [prompt_chars, prompt_chars + continuation_chars)
// of the echoed text. Throws ScoringError on a malformed or logprob-less
// response.
double parse_continuation_logprob(const std::string& response_body, std::size_t prompt_chars,
                                  std::size_t continuation_chars);

}  // namespace biascal
