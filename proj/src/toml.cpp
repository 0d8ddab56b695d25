#include "pfrac/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace pfrac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

TomlValue parse_value(const std::string& raw, int line) {
  TomlValue out;
  out.line = line;
  const std::string s = trim(raw);
  if (s.empty()) throw TomlError("missing value", line);
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw TomlError("unterminated string", line);
    out.v = s.substr(1, s.size() - 2);
    return out;
  }
  if (s == "true") {
    out.v = true;
    return out;
  }
  if (s == "false") {
    out.v = false;
    return out;
  }
  // Number: integer when it parses fully without . e E.
  const bool looks_integer = s.find_first_of(".eE") == std::string::npos;
  try {
    size_t pos = 0;
    if (looks_integer) {
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("");
      out.v = v;
    } else {
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("");
      out.v = v;
    }
  } catch (...) {
    throw TomlError("malformed value '" + s + "'", line);
  }
  return out;
}

bool valid_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

}  // namespace

bool TomlTable::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

const TomlValue& TomlTable::at(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  if (it == sections.end()) throw std::out_of_range("missing section [" + section + "]");
  auto kt = it->second.find(key);
  if (kt == it->second.end()) throw std::out_of_range("missing key " + section + "." + key);
  return kt->second;
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw TomlError("unterminated section header", lineno);
      section = trim(t.substr(1, t.size() - 2));
      if (!valid_key(section)) throw TomlError("invalid section name '" + section + "'", lineno);
      table.sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw TomlError("expected key = value", lineno);
    const std::string key = trim(t.substr(0, eq));
    if (!valid_key(key)) throw TomlError("invalid key '" + key + "'", lineno);
    auto& sec = table.sections[section];
    if (sec.count(key)) throw TomlError("duplicate key '" + key + "'", lineno);
    sec[key] = parse_value(t.substr(eq + 1), lineno);
  }
  return table;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_toml(ss.str());
}

}  // namespace pfrac
