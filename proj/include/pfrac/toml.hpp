#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>

namespace pfrac {

/// Minimal TOML subset: [sections], key = value with string / integer /
/// float / boolean values, and # comments. Enough for the benchmark
/// configuration files.
struct TomlValue {
  std::variant<long long, double, bool, std::string> v;
  int line = 0;

  bool is_number() const { return v.index() == 0 || v.index() == 1; }
  double as_double() const {
    if (v.index() == 0) return static_cast<double>(std::get<long long>(v));
    if (v.index() == 1) return std::get<double>(v);
    throw std::runtime_error("expected a number");
  }
};

struct TomlTable {
  // section -> key -> value ("" section for top-level keys)
  std::map<std::string, std::map<std::string, TomlValue>> sections;

  bool has(const std::string& section, const std::string& key) const;
  const TomlValue& at(const std::string& section, const std::string& key) const;
};

struct TomlError : std::runtime_error {
  TomlError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_number(line) {}
  int line_number;
};

TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

}  // namespace pfrac
