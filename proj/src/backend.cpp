#include "biascal/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "biascal/error.hpp"
#include "biascal/mock_backend.hpp"
#include "biascal/remote_backend.hpp"
#include "biascal/score_cache.hpp"

namespace biascal {

LabelScores softmax_scores(std::span<const double> logscores) {
  if (logscores.empty()) throw ScoringError("no label log-scores to normalize");
  const double mx = *std::max_element(logscores.begin(), logscores.end());
  if (!std::isfinite(mx)) throw ScoringError("label log-scores contain no finite maximum");
  LabelScores out;
  out.probs.resize(logscores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logscores.size(); ++i) {
    out.probs[i] = std::exp(logscores[i] - mx);
    total += out.probs[i];
  }
  for (double& p : out.probs) p = std::max(p / total, std::numeric_limits<double>::min());
  return out;
}

LabelScores score_labels(const Backend& backend, const std::string& prompt, const LabelSet& labels) {
  if (prompt.empty()) throw ScoringError("cannot score an empty prompt");
  const auto logscores = backend.label_logscores(prompt, labels);
  if (logscores.size() != labels.size()) {
    throw ScoringError("backend returned " + std::to_string(logscores.size()) + " log-scores for " +
                       std::to_string(labels.size()) + " labels");
  }
  return softmax_scores(logscores);
}

void BackendConfig::validate() const {
  if (max_parallel == 0) throw ConfigError("backend parallelism must be >= 1");
  if (kind == BackendKind::remote) {
    if (endpoint.empty()) throw ConfigError("remote backend requires an endpoint");
    if (model.empty()) throw ConfigError("remote backend requires a model id");
  }
}

BackendKind parse_backend_kind(const std::string& s) {
  if (s == "remote") return BackendKind::remote;
  if (s == "mock") return BackendKind::mock;
  throw ConfigError("unknown backend kind '" + s + "' (expected remote or mock)");
}

std::string to_string(BackendKind kind) { return kind == BackendKind::remote ? "remote" : "mock"; }

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  std::unique_ptr<Backend> backend;
  if (config.kind == BackendKind::remote) {
    RemoteOptions opts;
    opts.endpoint = config.endpoint;
    opts.model = config.model;
    opts.timeout = config.timeout;
    opts.max_parallel = config.max_parallel;
    if (const char* key = std::getenv(config.api_key_env.c_str())) opts.api_key = key;
    backend = std::make_unique<RemoteBackend>(std::move(opts));
  } else {
    AssociationTable table;
    if (config.mock_table) table = load_association_table(*config.mock_table);
    std::string id = config.model;
    if (id.empty()) id = config.mock_table ? config.mock_table->stem().string() : "mock";
    backend = std::make_unique<MockBackend>(std::move(table), std::move(id), config.max_parallel);
  }
  if (config.cache_dir) backend = std::make_unique<ScoreCache>(std::move(backend), *config.cache_dir);
  return backend;
}

}  // namespace biascal
