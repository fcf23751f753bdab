#include "biascal/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "biascal/backend.hpp"
#include "biascal/error.hpp"
#include "biascal/harness.hpp"
#include "biascal/kv_config.hpp"
#include "biascal/remote_backend.hpp"
#include "biascal/report.hpp"
#include "biascal/score_cache.hpp"

#ifndef BIASCAL_DEFAULT_WORDLIST
#define BIASCAL_DEFAULT_WORDLIST "data/english_words.txt"
#endif

namespace biascal {
namespace fs = std::filesystem;
namespace {

constexpr const char* kVersion = "0.1.0";

// Raw command-line values; unset optionals / empty vectors fall back to the
// run config file, then to built-in defaults.
struct Flags {
  std::string config;
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> labels;
  std::vector<std::string> models;
  std::vector<std::string> mock_tables;
  std::vector<std::size_t> grid;
  std::optional<std::size_t> k, m_samples, eval_cap, cal_length, corpus_size, bias_samples, parallel, timeout_ms;
  std::optional<std::uint64_t> bias_seed;
  std::optional<bool> bias_tiers;
  std::optional<std::string> cc_token, wordlist, backend, endpoint, cache_dir, out_dir, api_key_env, axis, dataset,
      log_level;
  bool quiet = false;
  bool verbose = false;
};

struct Resolved {
  RunSpec spec;
  std::vector<fs::path> datasets;
  BackendConfig backend;
  std::vector<std::string> models;
  std::vector<fs::path> mock_tables;
  fs::path wordlist;
  fs::path out_dir;
  std::optional<std::string> sweep_dataset;
  std::optional<SweepAxis> axis;
  std::vector<std::size_t> grid;
  std::string log_level = "info";
};

template <typename T>
T pick(const std::optional<T>& flag, const std::optional<T>& file, T fallback) {
  if (flag) return *flag;
  if (file) return *file;
  return fallback;
}

template <typename T>
std::optional<T> pick_opt(const std::optional<T>& flag, const std::optional<T>& file) {
  return flag ? flag : file;
}

std::optional<std::size_t> as_count(const std::optional<std::int64_t>& v, const char* key) {
  if (!v) return std::nullopt;
  if (*v < 0) throw ConfigError(std::string("run config: '") + key + "' must be non-negative");
  return static_cast<std::size_t>(*v);
}

Resolved resolve(const Flags& f) {
  KvConfig kv;
  fs::path base = fs::current_path();
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw ConfigError("run config not found: " + f.config);
    kv = KvConfig::load(f.config);
    base = fs::absolute(f.config).parent_path();
  }
  auto file_path = [&](const std::string& key) -> std::optional<fs::path> {
    if (auto s = kv.optional_string(key)) return base / *s;
    return std::nullopt;
  };
  auto file_paths = [&](const std::string& key) {
    std::vector<fs::path> out;
    if (auto xs = kv.optional_string_list(key)) {
      for (const auto& s : *xs) out.push_back(base / s);
    }
    return out;
  };

  Resolved r;
  RunSpec& spec = r.spec;

  if (!f.datasets.empty()) {
    for (const auto& d : f.datasets) r.datasets.emplace_back(d);
  } else {
    r.datasets = file_paths("datasets");
  }

  std::vector<std::string> methods = f.methods;
  if (methods.empty()) methods = kv.optional_string_list("methods").value_or(std::vector<std::string>{});
  if (!methods.empty()) {
    spec.methods.clear();
    for (const auto& m : methods) spec.methods.push_back(parse_calibration_variant(m));
  }

  if (!f.seeds.empty()) {
    spec.seeds = f.seeds;
  } else if (auto s = kv.optional_int_list("seeds")) {
    spec.seeds.clear();
    for (auto v : *s) {
      if (v < 0) throw ConfigError("run config: seeds must be non-negative");
      spec.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }

  spec.k = pick(f.k, as_count(kv.optional_int("k"), "k"), spec.k);
  spec.m_samples = pick(f.m_samples, as_count(kv.optional_int("m_samples"), "m_samples"), spec.m_samples);
  spec.eval_cap = pick(f.eval_cap, as_count(kv.optional_int("eval_cap"), "eval_cap"), spec.eval_cap);
  spec.cal_length = pick_opt(f.cal_length, as_count(kv.optional_int("cal_length"), "cal_length"));
  spec.bag_cap = pick_opt(f.corpus_size, as_count(kv.optional_int("corpus_size"), "corpus_size"));
  spec.cc_token = pick(f.cc_token, kv.optional_string("cc_token"), spec.cc_token);
  spec.bias_tiers = pick(f.bias_tiers, kv.optional_bool("bias_tiers"), spec.bias_tiers);
  spec.bias_samples = pick(f.bias_samples, as_count(kv.optional_int("bias_samples"), "bias_samples"),
                           spec.bias_samples);
  {
    auto file_seed = kv.optional_int("bias_seed");
    if (file_seed && *file_seed < 0) throw ConfigError("run config: bias_seed must be non-negative");
    spec.bias_seed = pick(f.bias_seed,
                          file_seed ? std::optional<std::uint64_t>(static_cast<std::uint64_t>(*file_seed))
                                    : std::nullopt,
                          spec.bias_seed);
  }
  if (!f.labels.empty()) {
    spec.label_override = f.labels;
  } else {
    spec.label_override = kv.optional_string_list("labels");
  }

  BackendConfig& b = r.backend;
  b.kind = parse_backend_kind(pick(f.backend, kv.optional_string("backend"), std::string("mock")));
  b.endpoint = pick(f.endpoint, kv.optional_string("endpoint"), std::string());
  b.api_key_env = pick(f.api_key_env, kv.optional_string("api_key_env"), b.api_key_env);
  b.max_parallel = pick(f.parallel, as_count(kv.optional_int("parallel"), "parallel"), b.max_parallel);
  b.timeout = std::chrono::milliseconds(
      pick(f.timeout_ms, as_count(kv.optional_int("timeout_ms"), "timeout_ms"), std::size_t{30000}));

  if (!f.models.empty()) {
    r.models = f.models;
  } else if (kv.contains("models")) {
    r.models = kv.get_string_list("models");
  } else if (auto m = kv.optional_string("model")) {
    r.models = {*m};
  }
  if (!f.mock_tables.empty()) {
    for (const auto& t : f.mock_tables) r.mock_tables.emplace_back(t);
  } else if (kv.contains("mock_tables")) {
    r.mock_tables = file_paths("mock_tables");
  } else if (auto t = file_path("mock_table")) {
    r.mock_tables = {*t};
  }

  std::optional<std::string> cache = f.cache_dir;
  if (!cache) {
    if (auto c = file_path("cache_dir")) cache = c->string();
  }
  if (!cache && b.kind == BackendKind::remote) cache = ".biascal-cache";
  if (cache && !cache->empty()) b.cache_dir = fs::path(*cache);

  if (f.wordlist) {
    r.wordlist = *f.wordlist;
  } else if (auto w = file_path("wordlist")) {
    r.wordlist = *w;
  } else {
    r.wordlist = BIASCAL_DEFAULT_WORDLIST;
  }

  if (f.out_dir) {
    r.out_dir = *f.out_dir;
  } else if (auto o = file_path("out_dir")) {
    r.out_dir = *o;
  } else {
    r.out_dir = "biascal-out";
  }

  r.sweep_dataset = f.dataset;
  if (!r.sweep_dataset) {
    if (auto d = file_path("dataset")) r.sweep_dataset = d->string();
  }
  if (auto a = pick_opt(f.axis, kv.optional_string("axis"))) r.axis = parse_sweep_axis(*a);
  if (!f.grid.empty()) {
    r.grid = f.grid;
  } else if (auto g = kv.optional_int_list("grid")) {
    for (auto v : *g) {
      if (v < 0) throw ConfigError("run config: grid values must be non-negative");
      r.grid.push_back(static_cast<std::size_t>(v));
    }
  }

  r.log_level = pick(f.log_level, kv.optional_string("log_level"), r.log_level);
  if (f.quiet) r.log_level = "warn";
  if (f.verbose) r.log_level = "debug";

  spec.validate();
  return r;
}

std::vector<Dataset> load_datasets(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw ConfigError("no datasets given (use --datasets or 'datasets' in the run config)");
  std::vector<Dataset> out;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw ConfigError("dataset config not found: " + p.string());
    DatasetConfig cfg = load_dataset_config(p);
    if (cfg.data_path && !fs::exists(*cfg.data_path)) {
      throw ConfigError("dataset file not found: " + cfg.data_path->string() + " (from " + p.string() + ")");
    }
    if (cfg.train_path && !fs::exists(*cfg.train_path)) {
      throw ConfigError("train file not found: " + cfg.train_path->string() + " (from " + p.string() + ")");
    }
    out.push_back(load_dataset(p));
  }
  return out;
}

WordList load_words(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("word list not found: " + path.string());
  return load_word_list(path);
}

// One backend per model id (remote) or per association table (mock).
std::vector<std::unique_ptr<Backend>> make_backends(const Resolved& r, bool allow_many) {
  std::vector<BackendConfig> configs;
  if (r.backend.kind == BackendKind::remote) {
    if (r.models.empty()) throw ConfigError("remote backend requires --model");
    for (const auto& m : r.models) {
      BackendConfig c = r.backend;
      c.model = m;
      configs.push_back(c);
    }
  } else if (r.mock_tables.empty()) {
    BackendConfig c = r.backend;
    c.model = r.models.empty() ? "mock" : r.models.front();
    configs.push_back(c);
  } else {
    for (std::size_t i = 0; i < r.mock_tables.size(); ++i) {
      if (!fs::exists(r.mock_tables[i])) throw ConfigError("mock table not found: " + r.mock_tables[i].string());
      BackendConfig c = r.backend;
      c.mock_table = r.mock_tables[i];
      c.model = i < r.models.size() ? r.models[i] : "";
      configs.push_back(c);
    }
  }
  if (!allow_many && configs.size() > 1) {
    throw ConfigError("this subcommand scores with a single model; got " + std::to_string(configs.size()));
  }
  std::vector<std::unique_ptr<Backend>> out;
  for (const auto& c : configs) out.push_back(make_backend(c));
  return out;
}

nlohmann::ordered_json header_json(const Resolved& r, const std::vector<Dataset>& datasets,
                                   const std::vector<std::unique_ptr<Backend>>& backends) {
  const RunSpec& s = r.spec;
  nlohmann::ordered_json j;
  j["tool"] = "biascal";
  j["version"] = kVersion;
  std::vector<std::string> ids;
  for (const auto& d : datasets) ids.push_back(d.id);
  j["datasets"] = ids;
  std::vector<std::string> methods;
  for (auto m : s.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["k"] = s.k;
  j["seeds"] = s.seeds;
  j["m_samples"] = s.m_samples;
  j["eval_cap"] = s.eval_cap;
  j["labels"] = s.label_override ? nlohmann::ordered_json(*s.label_override) : nlohmann::ordered_json(nullptr);
  j["cal_length"] = s.cal_length ? nlohmann::ordered_json(*s.cal_length) : nlohmann::ordered_json(nullptr);
  j["cc_token"] = s.cc_token;
  j["corpus_size"] = s.bag_cap ? nlohmann::ordered_json(*s.bag_cap) : nlohmann::ordered_json(nullptr);
  j["bias_tiers"] = s.bias_tiers;
  j["bias_samples"] = s.bias_samples;
  j["bias_seed"] = s.bias_seed;
  j["backend"] = to_string(r.backend.kind);
  if (r.backend.kind == BackendKind::remote) j["endpoint"] = r.backend.endpoint;
  std::vector<std::string> models;
  for (const auto& b : backends) models.push_back(b->model_id());
  j["models"] = models;
  j["wordlist"] = r.wordlist.filename().string();
  if (r.axis) j["axis"] = to_string(*r.axis);
  if (!r.grid.empty()) j["grid"] = r.grid;
  return j;
}

void log_backend_stats(const Backend& backend) {
  if (const auto* cache = dynamic_cast<const ScoreCache*>(&backend)) {
    const auto c = cache->counters();
    std::string remote;
    if (const auto* rb = dynamic_cast<const RemoteBackend*>(&cache->inner())) {
      remote = ", remote requests " + std::to_string(rb->request_count());
    }
    spdlog::info("cache {}: {} hits, {} misses, {} corrupt, {} write errors{}", cache->dir().string(), c.hits,
                 c.misses, c.corrupt, c.write_errors, remote);
  } else if (const auto* rb = dynamic_cast<const RemoteBackend*>(&backend)) {
    spdlog::info("remote requests: {}", rb->request_count());
  }
}

int cmd_eval(const Resolved& r) {
  const auto datasets = load_datasets(r.datasets);
  const auto words = load_words(r.wordlist);
  const auto backends = make_backends(r, false);
  const EvalReport report = run_eval(r.spec, datasets, *backends.front(), words);
  write_eval_report(report, header_json(r, datasets, backends), r.out_dir);
  log_backend_stats(*backends.front());
  for (const Aggregate& a : report.aggregates) {
    std::cout << a.dataset_id << '\t' << to_string(a.method) << "\tmacro-F1 " << format_double(a.mean_f1)
              << " +- " << format_double(a.std_f1) << " (" << a.n_seeds << " seeds)\n";
  }
  std::cout << "reports written to " << r.out_dir.string() << '\n';
  return report.has_errors() ? kExitRuntime : kExitOk;
}

int cmd_bias_scan(const Resolved& r) {
  const auto datasets = load_datasets(r.datasets);
  const auto words = load_words(r.wordlist);
  const auto backends = make_backends(r, true);
  std::vector<const Backend*> ptrs;
  for (const auto& b : backends) ptrs.push_back(b.get());
  const BiasScanResult result = run_bias_scan(datasets, ptrs, words, r.spec.bias_samples, r.spec.bias_seed);
  write_bias_scan(result, r.out_dir);
  for (const auto& b : backends) log_backend_stats(*b);
  for (const BiasCell& c : result.cells) {
    std::cout << c.dataset_id << '\t' << c.model_id << '\t'
              << (c.score ? format_double(c.score->value) : "error: " + c.error.value_or("")) << '\n';
  }
  std::cout << "bias table written to " << (r.out_dir / kBiasFile).string() << '\n';
  return result.has_errors() ? kExitRuntime : kExitOk;
}

int cmd_sensitivity(const Resolved& r) {
  if (!r.axis) throw ConfigError("sensitivity needs --axis (m_samples, corpus_size or cal_length)");
  if (r.grid.empty()) throw ConfigError("sensitivity needs a non-empty --grid");
  std::vector<fs::path> paths;
  if (r.sweep_dataset) {
    paths.emplace_back(*r.sweep_dataset);
  } else if (r.datasets.size() == 1) {
    paths = r.datasets;
  } else {
    throw ConfigError("sensitivity sweeps one dataset; pass --dataset");
  }
  const auto datasets = load_datasets(paths);
  const auto words = load_words(r.wordlist);
  const auto backends = make_backends(r, false);
  const auto points = run_sensitivity(datasets.front(), *backends.front(), words, r.spec, *r.axis, r.grid);
  write_sweep(points, *r.axis, datasets.front().id, r.out_dir);
  log_backend_stats(*backends.front());
  bool errors = false;
  for (const SweepPoint& p : points) {
    errors = errors || p.n_errors > 0;
    std::cout << to_string(*r.axis) << '=' << p.value << '\t' << to_string(p.method) << "\tmacro-F1 "
              << format_double(p.mean_f1) << " +- " << format_double(p.std_f1) << '\n';
  }
  std::cout << "sweep written to " << (r.out_dir / kSweepFile).string() << '\n';
  return errors ? kExitRuntime : kExitOk;
}

void configure_logging(const std::string& level) {
  static auto logger = [] {
    auto l = spdlog::stderr_color_mt("biascal");
    l->set_pattern("[%l] %v");
    return l;
  }();
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

void add_run_options(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "Run config file (key = value)");
  app->add_option("--datasets", f.datasets, "Dataset config files")->delimiter(',');
  app->add_option("--method,--methods", f.methods, "Calibration methods: none, cc, dc-eng, dc-id")
      ->delimiter(',')
      ->check(CLI::IsMember({"none", "cc", "dc-eng", "dc-id"}));
  app->add_option("--k,--shots", f.k, "In-context exemplars per prompt (default 8)");
  app->add_option("--seeds", f.seeds, "Context seeds (default 1,2,3,4,5)")->delimiter(',');
  app->add_option("--m-samples", f.m_samples, "Random texts per calibration prior (default 20)");
  app->add_option("--eval-cap", f.eval_cap, "Evaluation subset size cap (default 500)");
  app->add_option("--labels", f.labels, "Override label names, in label-index order")->delimiter(',');
  app->add_option("--cal-length", f.cal_length, "Words per calibration text (default: dataset average length)");
  app->add_option("--cc-token", f.cc_token, "Content-free token for cc (default N/A)");
  app->add_option("--corpus-size", f.corpus_size, "Cap on unlabeled texts used for the in-domain bag");
  app->add_option("--wordlist", f.wordlist, "English word list, one word per line");
  app->add_option("--bias-samples", f.bias_samples, "Random texts per side for the bias metric (default 20)");
  app->add_option("--bias-seed", f.bias_seed, "Seed for bias-metric random texts (default 0)");
  app->add_option("--bias-tiers", f.bias_tiers, "Measure bias and report tier means in eval (default true)");
  app->add_option("--backend", f.backend, "Scoring backend: mock or remote")->check(CLI::IsMember({"mock", "remote"}));
  app->add_option("--endpoint", f.endpoint, "OpenAI-compatible base URL, e.g. http://localhost:8000");
  app->add_option("--model,--models", f.models, "Model id(s) sent to the endpoint")->delimiter(',');
  app->add_option("--mock-table", f.mock_tables, "Mock association table(s), JSON")->delimiter(',');
  app->add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key (default BIASCAL_API_KEY)");
  app->add_option("--timeout-ms", f.timeout_ms, "Remote request timeout in ms (default 30000)");
  app->add_option("--parallel", f.parallel, "Max concurrent scoring requests (default 4)");
  app->add_option("--cache-dir", f.cache_dir, "Score cache directory (remote default .biascal-cache; empty disables)");
  app->add_option("--out-dir", f.out_dir, "Report directory (default biascal-out)");
  app->add_option("--log-level", f.log_level, "trace, debug, info, warn, error");
  app->add_flag("-q,--quiet", f.quiet, "Only log warnings and errors");
  app->add_flag("-v,--verbose", f.verbose, "Debug logging");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"biascal: label-bias measurement and domain-context calibration for in-context learning"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Flags flags;
  auto* eval = app.add_subcommand("eval", "Score datasets under each calibration method and write reports");
  add_run_options(eval, flags);

  auto* scan = app.add_subcommand("bias-scan", "Measure domain-label bias per dataset and model");
  add_run_options(scan, flags);

  auto* sens = app.add_subcommand("sensitivity", "Sweep M, corpus size or calibration length");
  add_run_options(sens, flags);
  sens->add_option("--dataset", flags.dataset, "Dataset config to sweep");
  sens->add_option("--axis", flags.axis, "m_samples, corpus_size or cal_length");
  sens->add_option("--grid", flags.grid, "Grid values (corpus_size 0 = full corpus)")->delimiter(',');

  auto* cache = app.add_subcommand("cache", "Inspect or clear the score cache");
  cache->require_subcommand(1);
  std::string cache_dir = ".biascal-cache";
  auto* stats = cache->add_subcommand("stats", "Count cached entries");
  stats->add_option("--cache-dir", cache_dir, "Score cache directory");
  auto* clear = cache->add_subcommand("clear", "Delete cached entries");
  clear->add_option("--cache-dir", cache_dir, "Score cache directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cache->parsed()) {
      configure_logging("info");
      if (stats->parsed()) {
        const auto s = cache_dir_stats(cache_dir);
        std::cout << "cache " << cache_dir << ": " << s.entries << " entries, " << s.bytes << " bytes\n";
      } else {
        std::cout << "removed " << clear_cache_dir(cache_dir) << " entries from " << cache_dir << '\n';
      }
      return kExitOk;
    }
    const Resolved r = resolve(flags);
    configure_logging(r.log_level);
    if (eval->parsed()) return cmd_eval(r);
    if (scan->parsed()) return cmd_bias_scan(r);
    return cmd_sensitivity(r);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const spdlog::spdlog_ex& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace biascal
