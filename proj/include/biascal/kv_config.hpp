#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace biascal {

// Flat key-value configuration files, written in a small TOML subset:
//
//   # comment
//   id = "sst2"
//   labels = ["negative", "positive"]
//   pair_separator = "\n\n"
//   k = 8
//   seeds = [1, 2, 3]
//
// Supported values: basic strings (with \n \t \r \" \\ escapes), integers,
// floats, booleans, and single-line arrays of those. No tables.
class KvConfig {
 public:
  using Scalar = std::variant<std::string, std::int64_t, double, bool>;
  using Value = std::variant<Scalar, std::vector<Scalar>>;

  static KvConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KvConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& origin() const { return origin_; }
  std::vector<std::string> keys() const;

  // Typed accessors throw ConfigError naming the key and origin on a type
  // mismatch; the optional_ variants return nullopt when the key is absent.
  std::string get_string(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  std::optional<std::string> optional_string(const std::string& key) const;
  std::optional<std::int64_t> optional_int(const std::string& key) const;
  std::optional<double> optional_double(const std::string& key) const;
  std::optional<bool> optional_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> optional_string_list(const std::string& key) const;
  std::optional<std::vector<std::int64_t>> optional_int_list(const std::string& key) const;

 private:
  const Value& at(const std::string& key) const;
  [[noreturn]] void type_error(const std::string& key, const char* expected) const;

  std::string origin_;
  std::map<std::string, Value> values_;
};

}  // namespace biascal
