#include "biascal/kv_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "biascal/error.hpp"

namespace biascal {
namespace {

class LineParser {
 public:
  LineParser(const std::string& line, std::string where) : s_(line), where_(std::move(where)) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  KvConfig::Value value() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '[') {
      ++pos_;
      std::vector<KvConfig::Scalar> items;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return items;
      }
      while (true) {
        items.push_back(scalar());
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          skip_ws();
          // trailing comma
          if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            break;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']' in array");
      }
      return items;
    }
    return scalar();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(where_ + ": " + what);
  }

 private:
  KvConfig::Scalar scalar() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return quoted();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number();
  }

  std::string quoted() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("dangling escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  KvConfig::Scalar number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-' ||
                                s_[pos_] == '+' || s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E' ||
                                s_[pos_] == '_')) {
      ++pos_;
    }
    std::string tok;
    for (std::size_t i = start; i < pos_; ++i) {
      if (s_[i] != '_') tok += s_[i];
    }
    if (tok.empty()) fail("expected a value (strings must be double-quoted)");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (*first == '+') ++first;
    if (is_float) {
      double d = 0;
      auto [p, ec] = std::from_chars(first, last, d);
      if (ec != std::errc() || p != last) fail("bad number '" + tok + "'");
      return d;
    }
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(first, last, i);
    if (ec != std::errc() || p != last) fail("bad integer '" + tok + "'");
    return i;
  }

  const std::string& s_;
  std::string where_;
  std::size_t pos_ = 0;
};

const char* scalar_type_name(const KvConfig::Scalar& s) {
  switch (s.index()) {
    case 0: return "string";
    case 1: return "integer";
    case 2: return "float";
    default: return "boolean";
  }
}

}  // namespace

KvConfig KvConfig::parse(const std::string& text, const std::string& origin) {
  KvConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LineParser p(line, origin + ":" + std::to_string(lineno));
    if (p.at_end_or_comment()) continue;
    std::string key = p.key();
    p.expect('=');
    Value v = p.value();
    if (!p.at_end_or_comment()) p.fail("trailing characters after value");
    if (cfg.values_.count(key)) p.fail("duplicate key '" + key + "'");
    cfg.values_.emplace(std::move(key), std::move(v));
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::vector<std::string> KvConfig::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

const KvConfig::Value& KvConfig::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return it->second;
}

void KvConfig::type_error(const std::string& key, const char* expected) const {
  throw ConfigError(origin_ + ": key '" + key + "' must be " + expected);
}

std::string KvConfig::get_string(const std::string& key) const {
  const auto* s = std::get_if<Scalar>(&at(key));
  if (!s || !std::holds_alternative<std::string>(*s)) type_error(key, "a string");
  return std::get<std::string>(*s);
}

std::int64_t KvConfig::get_int(const std::string& key) const {
  const auto* s = std::get_if<Scalar>(&at(key));
  if (!s || !std::holds_alternative<std::int64_t>(*s)) type_error(key, "an integer");
  return std::get<std::int64_t>(*s);
}

double KvConfig::get_double(const std::string& key) const {
  const auto* s = std::get_if<Scalar>(&at(key));
  if (s && std::holds_alternative<double>(*s)) return std::get<double>(*s);
  if (s && std::holds_alternative<std::int64_t>(*s)) return static_cast<double>(std::get<std::int64_t>(*s));
  type_error(key, "a number");
}

bool KvConfig::get_bool(const std::string& key) const {
  const auto* s = std::get_if<Scalar>(&at(key));
  if (!s || !std::holds_alternative<bool>(*s)) type_error(key, "a boolean");
  return std::get<bool>(*s);
}

std::vector<std::string> KvConfig::get_string_list(const std::string& key) const {
  const auto* arr = std::get_if<std::vector<Scalar>>(&at(key));
  if (!arr) type_error(key, "an array of strings");
  std::vector<std::string> out;
  for (const auto& s : *arr) {
    if (!std::holds_alternative<std::string>(s)) {
      type_error(key, (std::string("an array of strings (found ") + scalar_type_name(s) + ")").c_str());
    }
    out.push_back(std::get<std::string>(s));
  }
  return out;
}

std::vector<std::int64_t> KvConfig::get_int_list(const std::string& key) const {
  const auto* arr = std::get_if<std::vector<Scalar>>(&at(key));
  if (!arr) type_error(key, "an array of integers");
  std::vector<std::int64_t> out;
  for (const auto& s : *arr) {
    if (!std::holds_alternative<std::int64_t>(s)) type_error(key, "an array of integers");
    out.push_back(std::get<std::int64_t>(s));
  }
  return out;
}

std::optional<std::string> KvConfig::optional_string(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  return get_string(key);
}

std::optional<std::int64_t> KvConfig::optional_int(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  return get_int(key);
}

std::optional<double> KvConfig::optional_double(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  return get_double(key);
}

std::optional<bool> KvConfig::optional_bool(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  return get_bool(key);
}

std::optional<std::vector<std::string>> KvConfig::optional_string_list(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  return get_string_list(key);
}

std::optional<std::vector<std::int64_t>> KvConfig::optional_int_list(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  return get_int_list(key);
}

}  // namespace biascal
