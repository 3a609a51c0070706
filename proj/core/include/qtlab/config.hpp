#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtlab/rational.hpp"

namespace qtlab {

/// A value in the scenario dialect: string, exact number, boolean or array.
struct ConfigValue {
  enum class Kind { String, Number, Bool, Array };
  Kind kind = Kind::String;
  std::string text;
  Rational number;
  bool flag = false;
  std::vector<ConfigValue> items;
};

/// TOML-style sections of `key = value` lines. Keys may contain dots
/// (`word.e1 = "a"`). Arrays may span lines.
class Config {
 public:
  using Section = std::map<std::string, ConfigValue>;

  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  bool has(const std::string& section) const { return sections_.count(section) > 0; }
  bool has(const std::string& section, const std::string& key) const;
  const Section& section(const std::string& name) const;
  /// Section names starting with `prefix.`, with the prefix stripped, sorted.
  std::vector<std::string> subsections(const std::string& prefix) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  Rational get_rational(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& section, const std::string& key) const;
  std::vector<Rational> get_rationals(const std::string& section, const std::string& key) const;
  std::vector<std::vector<Rational>> get_matrix(const std::string& section, const std::string& key) const;

  std::string get_string_or(const std::string& section, const std::string& key, std::string fallback) const;
  Rational get_rational_or(const std::string& section, const std::string& key, Rational fallback) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key, std::int64_t fallback) const;

  /// The source text, for hashing.
  const std::string& source() const { return source_; }

 private:
  const ConfigValue& value(const std::string& section, const std::string& key) const;

  std::map<std::string, Section> sections_;
  std::string source_;
};

}  // namespace qtlab
