#include "biascal/core.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "biascal/error.hpp"
#include "biascal/kv_config.hpp"
#include "biascal/rng.hpp"

namespace biascal {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ConfigError("label set must not be empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ConfigError("label names must not be empty");
    if (std::any_of(n.begin(), n.end(), [](unsigned char c) { return std::isspace(c); })) {
      throw ConfigError("label name '" + n + "' contains whitespace; label names are single words");
    }
    if (!seen.insert(n).second) throw ConfigError("duplicate label name '" + n + "'");
  }
}

std::optional<std::size_t> LabelSet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

void Dataset::validate() const {
  if (examples.empty()) throw EmptyDatasetError("dataset '" + id + "' has no examples");
  auto check = [&](const std::vector<Example>& xs, const char* what) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i].gold && *xs[i].gold >= label_set.size()) {
        throw ConfigError("dataset '" + id + "': " + what + " example " + std::to_string(i) +
                          " has gold index " + std::to_string(*xs[i].gold) + " outside the label set");
      }
    }
  };
  check(examples, "evaluation");
  check(train_pool, "train");
}

std::vector<std::string> Dataset::texts() const {
  std::vector<std::string> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.text);
  return out;
}

Dataset Dataset::with_label_names(std::vector<std::string> names) const {
  if (names.size() != label_set.size()) {
    throw ConfigError("label override for '" + id + "' has " + std::to_string(names.size()) +
                      " names, dataset has " + std::to_string(label_set.size()) + " labels");
  }
  Dataset out = *this;
  out.label_set = LabelSet(std::move(names));
  return out;
}

namespace {

void append_input_line(std::string& out, const Template& tmpl, const std::string& text) {
  if (!tmpl.input_prefix.empty()) {
    out += tmpl.input_prefix;
    out += ' ';
  }
  out += text;
  out += '\n';
  out += tmpl.label_prefix;
}

}  // namespace

std::string render_prompt(const Template& tmpl, const ContextPrompt& context, const LabelSet& labels,
                          const std::string& query_text) {
  std::string out;
  if (tmpl.instruction) {
    out += *tmpl.instruction;
    out += '\n';
  }
  for (const auto& ex : context.exemplars) {
    append_input_line(out, tmpl, ex.text);
    out += ' ';
    out += labels.name(ex.label);
    out += tmpl.pair_separator;
  }
  append_input_line(out, tmpl, query_text);
  return out;
}

ContextPrompt build_context(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < dataset.train_pool.size(); ++i) {
    if (dataset.train_pool[i].gold) pool.push_back(i);
  }
  if (pool.size() < k) {
    throw PoolTooSmallError("dataset '" + dataset.id + "': need " + std::to_string(k) +
                            " labeled exemplars, train pool has " + std::to_string(pool.size()));
  }
  ContextPrompt ctx;
  ctx.seed = seed;
  ctx.k = k;
  ctx.exemplars.reserve(k);
  Rng rng = make_rng(seed, "context/" + dataset.id);
  // Partial Fisher-Yates; position i holds the i-th draw.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
    const Example& ex = dataset.train_pool[pool[i]];
    ctx.exemplars.push_back(Exemplar{ex.text, *ex.gold});
  }
  return ctx;
}

std::vector<Example> load_examples(const std::filesystem::path& path, const LabelSet& labels) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path.string());
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": malformed JSON record (" + e.what() + ")");
    }
    if (!rec.is_object() || !rec.contains("text") || !rec["text"].is_string()) {
      throw ParseError(where + ": record needs a string field \"text\"");
    }
    Example ex;
    ex.text = rec["text"].get<std::string>();
    if (rec.contains("label") && !rec["label"].is_null()) {
      if (!rec["label"].is_string()) throw ParseError(where + ": field \"label\" must be a string");
      const auto name = rec["label"].get<std::string>();
      auto idx = labels.index_of(name);
      if (!idx) throw UnknownLabelError(where + ": label '" + name + "' is not in the configured label set");
      ex.gold = *idx;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

DatasetConfig load_dataset_config(const std::filesystem::path& config_path) {
  const KvConfig kv = KvConfig::load(config_path);
  Template tmpl;
  tmpl.input_prefix = kv.optional_string("input_prefix").value_or(tmpl.input_prefix);
  tmpl.label_prefix = kv.optional_string("label_prefix").value_or(tmpl.label_prefix);
  tmpl.pair_separator = kv.optional_string("pair_separator").value_or(tmpl.pair_separator);
  tmpl.instruction = kv.optional_string("instruction");
  if (tmpl.label_prefix.empty()) throw ConfigError(config_path.string() + ": label_prefix must not be empty");

  LabelSet labels = [&] {
    try {
      return LabelSet(kv.get_string_list("labels"));
    } catch (const ConfigError& e) {
      throw ConfigError(config_path.string() + ": " + e.what());
    }
  }();

  DatasetConfig cfg{kv.get_string("id"), std::move(labels), std::move(tmpl), std::nullopt, std::nullopt};
  const auto base = config_path.parent_path();
  if (auto d = kv.optional_string("data")) cfg.data_path = base / *d;
  if (auto t = kv.optional_string("train")) cfg.train_path = base / *t;
  return cfg;
}

namespace {

Dataset assemble(DatasetConfig cfg, const std::filesystem::path& data_path,
                 const std::optional<std::filesystem::path>& train_path) {
  Dataset ds{cfg.id, {}, {}, std::move(cfg.label_set), std::move(cfg.prompt_template)};
  ds.examples = load_examples(data_path, ds.label_set);
  if (train_path) ds.train_pool = load_examples(*train_path, ds.label_set);
  ds.validate();
  return ds;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& data_path, const std::filesystem::path& config_path,
                     const std::optional<std::filesystem::path>& train_path) {
  return assemble(load_dataset_config(config_path), data_path, train_path);
}

Dataset load_dataset(const std::filesystem::path& config_path) {
  DatasetConfig cfg = load_dataset_config(config_path);
  if (!cfg.data_path) throw ConfigError(config_path.string() + ": missing required key 'data'");
  const auto data = *cfg.data_path;
  const auto train = cfg.train_path;
  return assemble(std::move(cfg), data, train);
}

}  // namespace biascal
