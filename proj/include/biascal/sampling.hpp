#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "biascal/rng.hpp"

namespace biascal {

// Multiset of corpus words (duplicates kept, so a uniform draw over tokens
// follows the corpus word distribution).
class BagOfWords {
 public:
  BagOfWords(std::vector<std::string> tokens, std::string source_id);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& source_id() const noexcept { return source_id_; }
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::string source_id_;
};

// Distinct lower-case words, used as the random-English source.
class WordList {
 public:
  explicit WordList(std::vector<std::string> words);

  const std::vector<std::string>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::vector<std::string> words_;
};

// One word per line; blank lines and surrounding whitespace ignored.
// Throws ConfigError on an unreadable file or a word violating WordList's
// invariants.
WordList load_word_list(const std::filesystem::path& path);

// Whitespace-splits every text. Throws EmptyCorpusError when no token
// results.
BagOfWords build_bag(std::span<const std::string> texts, std::string source_id);

// Mean whitespace word count, rounded half up, at least 1. Throws
// EmptyCorpusError on an empty list.
std::size_t avg_length(std::span<const std::string> texts);

// L uniform draws with replacement, joined by single spaces.
std::string sample_random_text(const BagOfWords& source, std::size_t length, Rng& rng);
std::string sample_random_text(const WordList& source, std::size_t length, Rng& rng);

using WordSource = std::variant<std::reference_wrapper<const BagOfWords>, std::reference_wrapper<const WordList>>;

std::string sample_random_text(const WordSource& source, std::size_t length, Rng& rng);

}  // namespace biascal
