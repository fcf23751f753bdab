#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "biascal/backend.hpp"

namespace biascal {

inline constexpr int kCacheFormatVersion = 1;

// Hex SHA-256 of kind, model id, prompt and label names (NUL-separated).
std::string cache_key(const std::string& kind, const std::string& model_id, const std::string& prompt,
                      const LabelSet& labels);

struct CacheCounters {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t corrupt = 0;       // unreadable or mismatched entries that were recomputed
  std::size_t write_errors = 0;  // failed stores (scoring still succeeded)
};

// Persistent log-score cache in front of another backend: one JSON file
// per key under the cache directory. Cache I/O failures are logged and
// fall through to live scoring; they never fail a request.
class ScoreCache final : public Backend {
 public:
  ScoreCache(std::unique_ptr<Backend> inner, std::filesystem::path dir);

  std::string kind() const override { return inner_->kind(); }
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<double> label_logscores(const std::string& prompt, const LabelSet& labels) const override;
  std::size_t max_parallel() const override { return inner_->max_parallel(); }

  const Backend& inner() const noexcept { return *inner_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  CacheCounters counters() const;
  std::filesystem::path entry_path(const std::string& key) const;

 private:
  std::optional<std::vector<double>> read(const std::filesystem::path& path, const LabelSet& labels) const;
  void write(const std::filesystem::path& path, const LabelSet& labels, const std::vector<double>& logscores) const;

  std::unique_ptr<Backend> inner_;
  std::filesystem::path dir_;
  mutable std::array<std::mutex, 64> stripes_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
  mutable std::atomic<std::size_t> corrupt_{0};
  mutable std::atomic<std::size_t> write_errors_{0};
};

struct CacheDirStats {
  std::size_t entries = 0;
  std::uintmax_t bytes = 0;
};

// Inspection and cleanup for the `cache` subcommand. Only *.json entry
// files are counted or removed.
CacheDirStats cache_dir_stats(const std::filesystem::path& dir);
std::size_t clear_cache_dir(const std::filesystem::path& dir);

}  // namespace biascal
