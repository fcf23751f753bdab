#include "biascal/mock_backend.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "biascal/error.hpp"
#include "biascal/text.hpp"

namespace biascal {

void AssociationTable::validate() const {
  std::size_t dim = base.size();
  auto check = [&](const std::vector<double>& v, const std::string& what) {
    for (double x : v) {
      if (!std::isfinite(x)) throw DimensionError("association table: non-finite weight in " + what);
    }
    if (dim == 0) dim = v.size();
    if (v.size() != dim) {
      throw DimensionError("association table: " + what + " has " + std::to_string(v.size()) +
                           " entries, expected " + std::to_string(dim));
    }
  };
  for (double x : base) {
    if (!std::isfinite(x)) throw DimensionError("association table: non-finite base weight");
  }
  for (const auto& [word, weights] : assoc) check(weights, "word '" + word + "'");
}

AssociationTable load_association_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open association table: " + path.string());
  AssociationTable table;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.contains("base")) table.base = j.at("base").get<std::vector<double>>();
    if (j.contains("assoc")) {
      for (const auto& [word, weights] : j.at("assoc").items()) {
        table.assoc.emplace(word, weights.get<std::vector<double>>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": malformed association table (" + e.what() + ")");
  }
  table.validate();
  return table;
}

std::vector<double> mock_logits(const AssociationTable& table, const std::string& prompt, std::size_t n_labels) {
  if (!table.base.empty() && table.base.size() != n_labels) {
    throw DimensionError("mock table has " + std::to_string(table.base.size()) + " base entries for " +
                         std::to_string(n_labels) + " labels");
  }
  std::vector<double> logits = table.base.empty() ? std::vector<double>(n_labels, 0.0) : table.base;
  for_each_word(prompt, [&](std::string_view w) {
    auto it = table.assoc.find(w);
    if (it == table.assoc.end()) return;
    if (it->second.size() != n_labels) {
      throw DimensionError("mock weights for '" + it->first + "' have " + std::to_string(it->second.size()) +
                           " entries for " + std::to_string(n_labels) + " labels");
    }
    for (std::size_t y = 0; y < n_labels; ++y) logits[y] += it->second[y];
  });
  return logits;
}

LabelScores mock_score(const AssociationTable& table, const std::string& prompt, const LabelSet& labels) {
  return softmax_scores(mock_logits(table, prompt, labels.size()));
}

MockBackend::MockBackend(AssociationTable table, std::string model_id, std::size_t parallel)
    : table_(std::move(table)), model_id_(std::move(model_id)), parallel_(parallel == 0 ? 1 : parallel) {
  table_.validate();
}

std::vector<double> MockBackend::label_logscores(const std::string& prompt, const LabelSet& labels) const {
  return mock_logits(table_, prompt, labels.size());
}

}  // namespace biascal
