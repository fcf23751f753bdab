#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "biascal/backend.hpp"

namespace biascal {

// Bag-of-words stand-in for a language model: each word pushes the label
// logits by a fixed vector, and a base vector plays the role of the
// model's non-contextual label preference.
//
//   logit[y] = base[y] + sum over whitespace-split prompt words w of assoc[w][y]
//
// Unknown words contribute nothing. An empty base means "zeros, sized to
// whatever label set is being scored".
struct AssociationTable {
  std::vector<double> base;
  std::map<std::string, std::vector<double>, std::less<>> assoc;

  // Throws DimensionError when weights are non-finite or vectors disagree
  // in length.
  void validate() const;
};

// JSON: {"base": [0.0, 0.0], "assoc": {"word": [1.0, 0.0], ...}}
AssociationTable load_association_table(const std::filesystem::path& path);

std::vector<double> mock_logits(const AssociationTable& table, const std::string& prompt, std::size_t n_labels);

// softmax(mock_logits(...)). Throws DimensionError when the table's vector
// length differs from |labels|.
LabelScores mock_score(const AssociationTable& table, const std::string& prompt, const LabelSet& labels);

class MockBackend final : public Backend {
 public:
  explicit MockBackend(AssociationTable table, std::string model_id = "mock", std::size_t parallel = 4);

  std::string kind() const override { return "mock"; }
  std::string model_id() const override { return model_id_; }
  std::vector<double> label_logscores(const std::string& prompt, const LabelSet& labels) const override;
  std::size_t max_parallel() const override { return parallel_; }

  const AssociationTable& table() const noexcept { return table_; }

 private:
  AssociationTable table_;
  std::string model_id_;
  std::size_t parallel_;
};

}  // namespace biascal
