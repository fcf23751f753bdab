#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace biascal {

// Ordered label verbalizations. Position i is label index i everywhere:
// in LabelScores, priors, predictions and gold annotations.
class LabelSet {
 public:
  // Throws ConfigError if names is empty, has duplicates, or a name is
  // empty or contains whitespace.
  explicit LabelSet(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<std::string> names_;
};

struct Example {
  std::string text;
  std::optional<std::size_t> gold;
};

// Prompt grammar:
//
//   [instruction "\n"]
//   block(x_1, y_1) pair_separator ... block(x_k, y_k) pair_separator
//   input_line(query) "\n" label_prefix
//
// where block(x, y) = input_line(x) "\n" label_prefix " " name(y) and
// input_line(x) = input_prefix " " x (just x when input_prefix is empty).
// The query rendering stops right after label_prefix, so the scored
// continuation of a label is " " + name.
struct Template {
  std::string input_prefix = "Input:";
  std::string label_prefix = "Label:";
  std::string pair_separator = "\n\n";
  std::optional<std::string> instruction;
};

struct Dataset {
  std::string id;
  std::vector<Example> examples;
  std::vector<Example> train_pool;
  LabelSet label_set;
  Template prompt_template;

  // Throws ConfigError when examples is empty or any gold index is out of
  // range for label_set.
  void validate() const;

  std::vector<std::string> texts() const;

  // Copy with the label names swapped; indices and data are unchanged.
  // The new set must have the same size.
  Dataset with_label_names(std::vector<std::string> names) const;
};

struct Exemplar {
  std::string text;
  std::size_t label = 0;

  bool operator==(const Exemplar&) const = default;
};

struct ContextPrompt {
  std::vector<Exemplar> exemplars;
  std::uint64_t seed = 0;
  std::size_t k = 0;

  bool operator==(const ContextPrompt&) const = default;
};

std::string render_prompt(const Template& tmpl, const ContextPrompt& context, const LabelSet& labels,
                          const std::string& query_text);

// Draws k exemplars uniformly without replacement from the dataset's train
// pool, keeping draw order. Pure in (dataset.id, k, seed). Throws
// PoolTooSmallError when the pool has fewer than k labeled items.
ContextPrompt build_context(const Dataset& dataset, std::size_t k, std::uint64_t seed);

// JSONL records: {"text": "...", "label": "..."}; label optional.
std::vector<Example> load_examples(const std::filesystem::path& path, const LabelSet& labels);

// Dataset config keys: id, labels, input_prefix, label_prefix,
// pair_separator, instruction (optional), data / train (optional JSONL
// paths, relative to the config file's directory).
struct DatasetConfig {
  std::string id;
  LabelSet label_set;
  Template prompt_template;
  std::optional<std::filesystem::path> data_path;
  std::optional<std::filesystem::path> train_path;
};

DatasetConfig load_dataset_config(const std::filesystem::path& config_path);

// Loads the evaluation examples from data_path (and the exemplar pool from
// train_path when given) and validates the result.
Dataset load_dataset(const std::filesystem::path& data_path, const std::filesystem::path& config_path,
                     const std::optional<std::filesystem::path>& train_path = std::nullopt);

// Resolves data/train from the config itself. Throws ConfigError when the
// config has no `data` key.
Dataset load_dataset(const std::filesystem::path& config_path);

}  // namespace biascal
