#include "biascal/score_cache.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

namespace biascal {
namespace fs = std::filesystem;

std::string cache_key(const std::string& kind, const std::string& model_id, const std::string& prompt,
                      const LabelSet& labels) {
  std::string material;
  material.reserve(kind.size() + model_id.size() + prompt.size() + 64);
  material += kind;
  material += '\0';
  material += model_id;
  material += '\0';
  material += prompt;
  for (const auto& n : labels.names()) {
    material += '\0';
    material += n;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

ScoreCache::ScoreCache(std::unique_ptr<Backend> inner, fs::path dir) : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) spdlog::warn("cannot create cache directory {}: {}", dir_.string(), ec.message());
}

fs::path ScoreCache::entry_path(const std::string& key) const { return dir_ / (key + ".json"); }

CacheCounters ScoreCache::counters() const {
  return CacheCounters{hits_.load(), misses_.load(), corrupt_.load(), write_errors_.load()};
}

std::optional<std::vector<double>> ScoreCache::read(const fs::path& path, const LabelSet& labels) const {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format").get<int>() != kCacheFormatVersion) throw std::runtime_error("format version mismatch");
    if (j.at("labels").get<std::vector<std::string>>() != labels.names()) throw std::runtime_error("label mismatch");
    auto scores = j.at("logscores").get<std::vector<double>>();
    if (scores.size() != labels.size()) throw std::runtime_error("wrong number of log-scores");
    for (double s : scores) {
      if (!std::isfinite(s)) throw std::runtime_error("non-finite log-score");
    }
    return scores;
  } catch (const std::exception& e) {
    ++corrupt_;
    spdlog::warn("discarding corrupt cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void ScoreCache::write(const fs::path& path, const LabelSet& labels, const std::vector<double>& logscores) const {
  const nlohmann::json j = {
      {"format", kCacheFormatVersion},
      {"kind", inner_->kind()},
      {"model", inner_->model_id()},
      {"labels", labels.names()},
      {"logscores", logscores},
  };
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const fs::path tmp = path.string() + ".tmp." + tid.str();
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump() << '\n';
    if (!out) {
      ++write_errors_;
      spdlog::warn("cannot write cache entry {}", tmp.string());
      std::error_code ec;
      fs::remove(tmp, ec);
      return;
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    ++write_errors_;
    spdlog::warn("cannot store cache entry {}: {}", path.string(), ec.message());
    fs::remove(tmp, ec);
  }
}

std::vector<double> ScoreCache::label_logscores(const std::string& prompt, const LabelSet& labels) const {
  const std::string key = cache_key(inner_->kind(), inner_->model_id(), prompt, labels);
  const fs::path path = entry_path(key);
  std::mutex& stripe = stripes_[std::hash<std::string>{}(key) % stripes_.size()];
  {
    std::lock_guard lock(stripe);
    if (auto hit = read(path, labels)) {
      ++hits_;
      return *hit;
    }
  }
  ++misses_;
  auto scores = inner_->label_logscores(prompt, labels);
  std::lock_guard lock(stripe);
  write(path, labels, scores);
  return scores;
}

CacheDirStats cache_dir_stats(const fs::path& dir) {
  CacheDirStats stats;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return stats;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    ++stats.entries;
    stats.bytes += entry.file_size(ec);
  }
  return stats;
}

std::size_t clear_cache_dir(const fs::path& dir) {
  std::size_t removed = 0;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return 0;
  std::vector<fs::path> victims;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") victims.push_back(entry.path());
  }
  for (const auto& p : victims) {
    if (fs::remove(p, ec)) ++removed;
  }
  return removed;
}

}  // namespace biascal
