#include "qtlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "qtlab/error.hpp"

namespace qtlab {

namespace {

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  ConfigValue parse_all() {
    ConfigValue v = parse();
    skip();
    if (pos_ != text_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(line_) + ": " + msg);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  ConfigValue parse() {
    skip();
    if (pos_ >= text_.size()) fail("missing value");
    ConfigValue v;
    char c = text_[pos_];
    if (c == '"') {
      ++pos_;
      v.kind = ConfigValue::Kind::String;
      while (pos_ < text_.size() && text_[pos_] != '"') v.text.push_back(text_[pos_++]);
      if (pos_ >= text_.size()) fail("unterminated string");
      ++pos_;
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.kind = ConfigValue::Kind::Array;
      skip();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(parse());
        skip();
        if (pos_ >= text_.size()) fail("unterminated array");
        if (text_[pos_] == ',') {
          ++pos_;
          skip();
          if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (text_[pos_] == ']') {
          ++pos_;
          return v;
        }
        fail("expected ',' or ']'");
      }
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    std::string token(text_.substr(start, pos_ - start));
    if (token == "true" || token == "false") {
      v.kind = ConfigValue::Kind::Bool;
      v.flag = token == "true";
      return v;
    }
    v.kind = ConfigValue::Kind::Number;
    try {
      v.number = parse_rational(token);
    } catch (const Error&) {
      fail("bad value '" + token + "'");
    }
    v.text = token;
    return v;
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    depth += c == '[' ? 1 : c == ']' ? -1 : 0;
  }
  return depth;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  cfg.source_ = std::string(text);
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(line_no) + ": empty section");
      cfg.sections_[current];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const int first_line = line_no;
    while (bracket_balance(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += " " + trim(strip_comment(raw));
    }
    if (current.empty()) {
      throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(first_line) + ": key outside a section");
    }
    auto& sec = cfg.sections_[current];
    if (sec.count(key)) {
      throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(first_line) + ": duplicate key " + key);
    }
    sec.emplace(key, ValueParser(value, first_line).parse_all());
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open scenario " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

const Config::Section& Config::section(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw Error(ErrorKind::ConfigInvalid, "missing section [" + name + "]");
  return it->second;
}

std::vector<std::string> Config::subsections(const std::string& prefix) const {
  std::vector<std::string> out;
  const std::string head = prefix + ".";
  for (const auto& [name, _] : sections_) {
    if (name.rfind(head, 0) == 0) out.push_back(name.substr(head.size()));
  }
  return out;
}

const ConfigValue& Config::value(const std::string& section, const std::string& key) const {
  const auto& sec = this->section(section);
  auto it = sec.find(key);
  if (it == sec.end()) throw Error(ErrorKind::ConfigInvalid, "missing " + where(section, key));
  return it->second;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const auto& v = value(section, key);
  if (v.kind == ConfigValue::Kind::Number) return v.text;
  if (v.kind != ConfigValue::Kind::String) throw Error(ErrorKind::ConfigInvalid, where(section, key) + " is not a string");
  return v.text;
}

Rational Config::get_rational(const std::string& section, const std::string& key) const {
  const auto& v = value(section, key);
  if (v.kind == ConfigValue::Kind::String) {
    try {
      return parse_rational(v.text);
    } catch (const Error&) {
    }
  }
  if (v.kind != ConfigValue::Kind::Number) throw Error(ErrorKind::ConfigInvalid, where(section, key) + " is not a number");
  return v.number;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key) const {
  Rational q = get_rational(section, key);
  if (q.denominator() != 1) throw Error(ErrorKind::ConfigInvalid, where(section, key) + " is not an integer");
  return q.numerator();
}

bool Config::get_bool(const std::string& section, const std::string& key) const {
  const auto& v = value(section, key);
  if (v.kind != ConfigValue::Kind::Bool) throw Error(ErrorKind::ConfigInvalid, where(section, key) + " is not a boolean");
  return v.flag;
}

std::vector<std::string> Config::get_strings(const std::string& section, const std::string& key) const {
  const auto& v = value(section, key);
  if (v.kind != ConfigValue::Kind::Array) throw Error(ErrorKind::ConfigInvalid, where(section, key) + " is not an array");
  std::vector<std::string> out;
  for (const auto& item : v.items) {
    if (item.kind == ConfigValue::Kind::Array || item.kind == ConfigValue::Kind::Bool) {
      throw Error(ErrorKind::ConfigInvalid, where(section, key) + " must hold strings");
    }
    out.push_back(item.text);
  }
  return out;
}

std::vector<Rational> Config::get_rationals(const std::string& section, const std::string& key) const {
  const auto& v = value(section, key);
  if (v.kind != ConfigValue::Kind::Array) throw Error(ErrorKind::ConfigInvalid, where(section, key) + " is not an array");
  std::vector<Rational> out;
  for (const auto& item : v.items) {
    if (item.kind != ConfigValue::Kind::Number) {
      throw Error(ErrorKind::ConfigInvalid, where(section, key) + " must hold numbers");
    }
    out.push_back(item.number);
  }
  return out;
}

std::vector<std::vector<Rational>> Config::get_matrix(const std::string& section, const std::string& key) const {
  const auto& v = value(section, key);
  if (v.kind != ConfigValue::Kind::Array || v.items.empty()) {
    throw Error(ErrorKind::ConfigInvalid, where(section, key) + " is not a matrix");
  }
  std::vector<std::vector<Rational>> out;
  for (const auto& row : v.items) {
    if (row.kind != ConfigValue::Kind::Array || row.items.size() != v.items.front().items.size()) {
      throw Error(ErrorKind::ConfigInvalid, where(section, key) + " has ragged rows");
    }
    std::vector<Rational> r;
    for (const auto& x : row.items) {
      if (x.kind != ConfigValue::Kind::Number) throw Error(ErrorKind::ConfigInvalid, where(section, key) + " entry");
      r.push_back(x.number);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string Config::get_string_or(const std::string& section, const std::string& key, std::string fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

Rational Config::get_rational_or(const std::string& section, const std::string& key, Rational fallback) const {
  return has(section, key) ? get_rational(section, key) : fallback;
}

std::int64_t Config::get_int_or(const std::string& section, const std::string& key, std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

}  // namespace qtlab
