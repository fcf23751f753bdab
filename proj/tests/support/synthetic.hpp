#pragma once

// Synthetic corpora with a known domain-label bias, scored by the mock
// backend. Everything here is deterministic.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "biascal/core.hpp"
#include "biascal/mock_backend.hpp"
#include "biascal/sampling.hpp"

namespace biascal::testing {

inline std::string class_word(std::size_t cls, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%zuw%02zu", cls, i);
  return buf;
}

struct BiasedCorpusOptions {
  std::size_t n_eval = 200;          // balanced, alternating classes
  std::size_t n_train = 40;
  std::size_t vocab_per_class = 20;
  std::size_t words_per_text = 1;    // all gold-class words
  std::size_t off_class_words = 0;   // of words_per_text, how many come from the other class
  double offset = std::log(19.0);    // per in-domain word, added to label 1
  double discriminative = 1.0;       // logit difference toward the word's class
  bool graded = false;               // word i gets d * (0.2 + 1.6 i / (vocab - 1)) instead of d
  std::size_t english_words = 500;
};

struct BiasedCorpus {
  Dataset dataset;
  AssociationTable table;
  WordList english;
};

// Binary corpus where every in-domain word w of class c carries
//   assoc[w] = (0, offset) + (+d/2, -d/2)   for c = 0
//   assoc[w] = (0, offset) + (-d/2, +d/2)   for c = 1
// with d = discriminative. English words are absent from the table.
inline BiasedCorpus make_biased_corpus(const BiasedCorpusOptions& o = {}) {
  AssociationTable table;
  table.base = {0.0, 0.0};
  for (std::size_t i = 0; i < o.vocab_per_class; ++i) {
    double h = o.discriminative / 2.0;
    if (o.graded && o.vocab_per_class > 1) {
      h *= 0.2 + 1.6 * static_cast<double>(i) / static_cast<double>(o.vocab_per_class - 1);
    }
    table.assoc[class_word(0, i)] = {+h, -h + o.offset};
    table.assoc[class_word(1, i)] = {-h, +h + o.offset};
  }

  auto make_text = [&](std::size_t idx, std::size_t cls) {
    std::string text;
    for (std::size_t w = 0; w < o.words_per_text; ++w) {
      const bool off = w < o.off_class_words;
      const std::size_t c = off ? 1 - cls : cls;
      if (w) text += ' ';
      text += class_word(c, (idx / 2 + 7 * w) % o.vocab_per_class);
    }
    return text;
  };

  Dataset ds{"synthetic", {}, {}, LabelSet({"negative", "positive"}), Template{"Input:", "Label:", "\n\n", {}}};
  for (std::size_t i = 0; i < o.n_eval; ++i) ds.examples.push_back(Example{make_text(i, i % 2), i % 2});
  for (std::size_t i = 0; i < o.n_train; ++i) {
    ds.train_pool.push_back(Example{make_text(i + 3, (i + 1) % 2), (i + 1) % 2});
  }

  std::vector<std::string> eng;
  for (std::size_t i = 0; i < o.english_words; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "english%04zu", i);
    eng.emplace_back(buf);
  }
  return BiasedCorpus{std::move(ds), std::move(table), WordList(std::move(eng))};
}

class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      path_ = base / (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
      if (std::filesystem::create_directories(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes the corpus as dataset config + JSONL files + mock table + word
// list under dir. Returns the dataset config path.
inline std::filesystem::path write_corpus_files(const BiasedCorpus& c, const std::filesystem::path& dir) {
  auto jsonl = [&](const std::vector<Example>& xs) {
    std::string out;
    for (const auto& e : xs) {
      nlohmann::json j = {{"text", e.text}};
      if (e.gold) j["label"] = c.dataset.label_set.name(*e.gold);
      out += j.dump() + "\n";
    }
    return out;
  };
  write_file(dir / "eval.jsonl", jsonl(c.dataset.examples));
  write_file(dir / "train.jsonl", jsonl(c.dataset.train_pool));
  write_file(dir / "synthetic.toml",
             "id = \"" + c.dataset.id + "\"\n"
             "labels = [\"negative\", \"positive\"]\n"
             "input_prefix = \"Input:\"\n"
             "label_prefix = \"Label:\"\n"
             "pair_separator = \"\\n\\n\"\n"
             "data = \"eval.jsonl\"\n"
             "train = \"train.jsonl\"\n");
  nlohmann::json table = {{"base", c.table.base}, {"assoc", nlohmann::json::object()}};
  for (const auto& [w, v] : c.table.assoc) table["assoc"][w] = v;
  write_file(dir / "mock_table.json", table.dump(1));
  std::string words;
  for (const auto& w : c.english.words()) words += w + "\n";
  write_file(dir / "words.txt", words);
  return dir / "synthetic.toml";
}

}  // namespace biascal::testing
