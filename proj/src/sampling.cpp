#include "biascal/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "biascal/error.hpp"
#include "biascal/text.hpp"

namespace biascal {

BagOfWords::BagOfWords(std::vector<std::string> tokens, std::string source_id)
    : tokens_(std::move(tokens)), source_id_(std::move(source_id)) {
  if (tokens_.empty()) throw EmptyCorpusError("bag of words '" + source_id_ + "' is empty");
  for (const auto& t : tokens_) {
    if (t.empty() || std::any_of(t.begin(), t.end(), is_space)) {
      throw ConfigError("bag of words '" + source_id_ + "': token '" + t + "' contains whitespace");
    }
  }
}

WordList::WordList(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.empty()) throw ConfigError("word list is empty");
  std::set<std::string_view> seen;
  for (const auto& w : words_) {
    if (w.empty() || std::any_of(w.begin(), w.end(), is_space)) {
      throw ConfigError("word list entry '" + w + "' contains whitespace");
    }
    if (std::any_of(w.begin(), w.end(), [](unsigned char c) { return c >= 'A' && c <= 'Z'; })) {
      throw ConfigError("word list entry '" + w + "' is not lower-case");
    }
    if (!seen.insert(w).second) throw ConfigError("word list has duplicate entry '" + w + "'");
  }
}

WordList load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word list: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto parts = split_words(line);
    if (parts.empty()) continue;
    if (parts.size() > 1) throw ConfigError(path.string() + ": more than one word on line '" + line + "'");
    words.push_back(std::move(parts.front()));
  }
  return WordList(std::move(words));
}

BagOfWords build_bag(std::span<const std::string> texts, std::string source_id) {
  std::vector<std::string> tokens;
  for (const auto& t : texts) for_each_word(t, [&](std::string_view w) { tokens.emplace_back(w); });
  if (tokens.empty()) throw EmptyCorpusError("corpus '" + source_id + "' has no words");
  return BagOfWords(std::move(tokens), std::move(source_id));
}

std::size_t avg_length(std::span<const std::string> texts) {
  if (texts.empty()) throw EmptyCorpusError("cannot average the length of an empty corpus");
  std::size_t total = 0;
  for (const auto& t : texts) total += count_words(t);
  // round-half-up of total / n in integer arithmetic
  const std::size_t n = texts.size();
  const std::size_t rounded = (2 * total + n) / (2 * n);
  return std::max<std::size_t>(rounded, 1);
}

namespace {

std::string draw(const std::vector<std::string>& pool, std::size_t length, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < length; ++i) {
    if (i) out += ' ';
    out += pool[uniform_index(rng, pool.size())];
  }
  return out;
}

}  // namespace

std::string sample_random_text(const BagOfWords& source, std::size_t length, Rng& rng) {
  return draw(source.tokens(), length, rng);
}

std::string sample_random_text(const WordList& source, std::size_t length, Rng& rng) {
  return draw(source.words(), length, rng);
}

std::string sample_random_text(const WordSource& source, std::size_t length, Rng& rng) {
  return std::visit([&](const auto& ref) { return sample_random_text(ref.get(), length, rng); }, source);
}

}  // namespace biascal
