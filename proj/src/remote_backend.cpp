#include "biascal/remote_backend.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "biascal/error.hpp"

namespace biascal {

class RemoteBackend::Slot {
 public:
  explicit Slot(const RemoteBackend& b) : b_(b) {
    std::unique_lock lock(b_.slots_mutex_);
    b_.slots_cv_.wait(lock, [&] { return b_.in_flight_ < b_.options_.max_parallel; });
    ++b_.in_flight_;
  }
  ~Slot() {
    {
      std::lock_guard lock(b_.slots_mutex_);
      --b_.in_flight_;
    }
    b_.slots_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  const RemoteBackend& b_;
};

RemoteBackend::RemoteBackend(RemoteOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
  if (options_.model.empty()) throw ConfigError("remote backend needs a model id");
  if (options_.max_parallel == 0) throw ConfigError("remote backend parallelism must be >= 1");

  const auto scheme_end = options_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint '" + options_.endpoint + "' must start with http:// or https://");
  }
  const auto path_start = options_.endpoint.find('/', scheme_end + 3);
  host_ = options_.endpoint.substr(0, path_start);
  std::string base = path_start == std::string::npos ? "" : options_.endpoint.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  if (base.size() >= 3 && base.compare(base.size() - 3, 3, "/v1") == 0) {
    path_ = base + "/completions";
  } else {
    path_ = base + "/v1/completions";
  }
}

std::string RemoteBackend::post_completion(const std::string& body) const {
  Slot slot(*this);
  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  auto delay = options_.backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      spdlog::warn("remote scoring attempt {} failed ({}), retrying in {} ms", attempt, last_error, delay.count());
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    ++requests_;
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ScoringError("endpoint " + host_ + path_ + " rejected the logprob request: HTTP " +
                         std::to_string(res->status) + " " + res->body.substr(0, 300));
    }
    return res->body;
  }
  throw TransportError("endpoint " + host_ + path_ + " failed after " + std::to_string(options_.max_retries) +
                       " retries: " + last_error);
}

double RemoteBackend::continuation_logprob(const std::string& prompt, const std::string& continuation) const {
  const nlohmann::json request = {
      {"model", options_.model},
      {"prompt", prompt + continuation},
      {"max_tokens", 1},
      {"temperature", 0},
      {"echo", true},
      {"logprobs", 1},
  };
  const std::string body = post_completion(request.dump());
  return parse_continuation_logprob(body, prompt.size(), continuation.size());
}

std::vector<double> RemoteBackend::label_logscores(const std::string& prompt, const LabelSet& labels) const {
  std::vector<double> out;
  out.reserve(labels.size());
  for (const auto& name : labels.names()) out.push_back(continuation_logprob(prompt, " " + name));
  return out;
}

double parse_continuation_logprob(const std::string& response_body, std::size_t prompt_chars,
                                  std::size_t continuation_chars) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(response_body);
  } catch (const nlohmann::json::parse_error&) {
    throw ScoringError("completions response is not JSON: " + response_body.substr(0, 200));
  }
  try {
    const auto& lp = j.at("choices").at(0).at("logprobs");
    if (lp.is_null()) throw ScoringError("completions response carries no logprobs");
    const auto& token_logprobs = lp.at("token_logprobs");
    const auto& offsets = lp.at("text_offset");
    if (token_logprobs.size() != offsets.size()) {
      throw ScoringError("completions response: token_logprobs and text_offset lengths differ");
    }
    const std::size_t end = prompt_chars + continuation_chars;
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      const auto off = offsets[i].get<std::size_t>();
      if (off < prompt_chars || off >= end) continue;
      if (token_logprobs[i].is_null()) throw ScoringError("completions response: null logprob on a label token");
      total += token_logprobs[i].get<double>();
      ++used;
    }
    if (used == 0) throw ScoringError("completions response has no echoed tokens for the label continuation");
    if (!std::isfinite(total)) throw ScoringError("completions response: non-finite label logprob");
    return total;
  } catch (const nlohmann::json::exception& e) {
    throw ScoringError(std::string("malformed completions response: ") + e.what());
  }
}

}  // namespace biascal
