#include "pfrac/abaqus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace pfrac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

// Keyword line: "*ELEMENT, TYPE=CPE4, ELSET=..." -> name + options map.
struct Keyword {
  std::string name;
  std::map<std::string, std::string> options;
};

Keyword parse_keyword(const std::string& line) {
  Keyword kw;
  auto fields = split_csv(line.substr(1));
  kw.name = upper(fields.empty() ? "" : fields[0]);
  for (size_t i = 1; i < fields.size(); ++i) {
    const auto eq = fields[i].find('=');
    if (eq == std::string::npos)
      kw.options[upper(fields[i])] = "";
    else
      kw.options[upper(trim(fields[i].substr(0, eq)))] = trim(fields[i].substr(eq + 1));
  }
  return kw;
}

double parse_double(const std::string& s, int line) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw InpParseError("malformed number '" + s + "'", line);
  }
}

long parse_long(const std::string& s, int line) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw InpParseError("malformed integer '" + s + "'", line);
  }
}

}  // namespace

InpResult parse_abaqus_inp(std::istream& in) {
  InpResult res;
  std::map<long, int> node_of_id;
  std::vector<std::pair<long, std::array<double, 2>>> raw_nodes;
  std::vector<std::pair<std::string, std::vector<long>>> raw_nsets;
  std::vector<std::array<long, 4>> raw_elements;

  enum class Section { none, node, element, nset, skip };
  Section section = Section::none;
  std::string nset_name;
  bool nset_generate = false;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.rfind("**", 0) == 0) continue;  // comment
    if (t[0] == '*') {
      const Keyword kw = parse_keyword(t);
      if (kw.name == "NODE") {
        section = Section::node;
      } else if (kw.name == "ELEMENT") {
        auto it = kw.options.find("TYPE");
        const std::string type = it == kw.options.end() ? "" : upper(it->second);
        if (type != "CPE4" && type != "CPS4")
          throw StructuralError("unsupported element type '" + type + "'");
        section = Section::element;
      } else if (kw.name == "NSET") {
        auto it = kw.options.find("NSET");
        if (it == kw.options.end()) throw InpParseError("*NSET without NSET= name", lineno);
        nset_name = it->second;
        nset_generate = kw.options.count("GENERATE") > 0;
        raw_nsets.emplace_back(nset_name, std::vector<long>{});
        section = Section::nset;
      } else {
        res.warnings.push_back("skipped keyword *" + kw.name);
        section = Section::skip;
      }
      continue;
    }
    const auto fields = split_csv(t);
    switch (section) {
      case Section::node: {
        if (fields.size() < 3) throw InpParseError("node line needs id, x, y", lineno);
        const long id = parse_long(fields[0], lineno);
        const double x = parse_double(fields[1], lineno);
        const double y = parse_double(fields[2], lineno);
        if (node_of_id.count(id)) throw InpParseError("duplicate node id " + std::to_string(id), lineno);
        node_of_id[id] = static_cast<int>(raw_nodes.size());
        raw_nodes.push_back({id, {x, y}});
        break;
      }
      case Section::element: {
        if (fields.size() < 5) throw InpParseError("element line needs id and 4 node ids", lineno);
        std::array<long, 4> conn{};
        for (int k = 0; k < 4; ++k) conn[k] = parse_long(fields[k + 1], lineno);
        raw_elements.push_back(conn);
        break;
      }
      case Section::nset: {
        auto& ids = raw_nsets.back().second;
        if (nset_generate) {
          if (fields.size() < 2) throw InpParseError("generate nset needs first, last[, step]", lineno);
          const long first = parse_long(fields[0], lineno);
          const long last = parse_long(fields[1], lineno);
          const long step = fields.size() > 2 ? parse_long(fields[2], lineno) : 1;
          if (step <= 0) throw InpParseError("generate step must be positive", lineno);
          for (long id = first; id <= last; id += step) ids.push_back(id);
        } else {
          for (const auto& f : fields)
            if (!f.empty()) ids.push_back(parse_long(f, lineno));
        }
        break;
      }
      case Section::skip:
      case Section::none:
        break;
    }
  }

  Mesh& m = res.mesh;
  m.nodes.reserve(raw_nodes.size());
  for (const auto& [id, xy] : raw_nodes) m.nodes.push_back(xy);
  m.elements.reserve(raw_elements.size());
  for (const auto& conn : raw_elements) {
    std::array<int, 4> e{};
    for (int k = 0; k < 4; ++k) {
      auto it = node_of_id.find(conn[k]);
      if (it == node_of_id.end())
        throw StructuralError("element references missing node " + std::to_string(conn[k]));
      e[k] = it->second;
    }
    m.elements.push_back(e);
  }
  for (const auto& [name, ids] : raw_nsets) {
    auto& set = m.boundary_sets[name];
    for (long id : ids) {
      auto it = node_of_id.find(id);
      if (it == node_of_id.end()) throw StructuralError("nset '" + name + "' references missing node " + std::to_string(id));
      set.push_back(it->second);
    }
  }
  return res;
}

InpResult parse_abaqus_inp(const std::string& text) {
  std::istringstream s(text);
  return parse_abaqus_inp(s);
}

std::string write_abaqus_inp(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  out << "*NODE\n";
  for (int i = 0; i < mesh.node_count(); ++i)
    out << i + 1 << ", " << mesh.nodes[i][0] << ", " << mesh.nodes[i][1] << "\n";
  out << "*ELEMENT, TYPE=CPE4\n";
  for (int e = 0; e < mesh.element_count(); ++e) {
    out << e + 1;
    for (int k = 0; k < 4; ++k) out << ", " << mesh.elements[e][k] + 1;
    out << "\n";
  }
  for (const auto& [name, set] : mesh.boundary_sets) {
    out << "*NSET, NSET=" << name << "\n";
    int col = 0;
    for (size_t i = 0; i < set.size(); ++i) {
      out << set[i] + 1;
      if (i + 1 < set.size()) out << (++col % 8 == 0 ? ",\n" : ", ");
    }
    if (!set.empty()) out << "\n";
  }
  return out.str();
}

}  // namespace pfrac
