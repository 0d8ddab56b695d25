#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pfrac/mesh.hpp"

namespace pfrac {

/// Parse error with the offending 1-based line number.
struct InpParseError : std::runtime_error {
  InpParseError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_number(line) {}
  int line_number;
};

struct InpResult {
  Mesh mesh;
  std::vector<std::string> warnings;  // skipped keywords etc.
};

/// Reads the *NODE / *ELEMENT (CPE4, CPS4) / *NSET subset of the Abaqus
/// .inp format. Unsupported keywords are skipped and reported as warnings;
/// unsupported element types are structural errors.
InpResult parse_abaqus_inp(std::istream& in);
InpResult parse_abaqus_inp(const std::string& text);

/// Exporter for the same subset (round-trips through parse_abaqus_inp up
/// to node ordering).
std::string write_abaqus_inp(const Mesh& mesh);

}  // namespace pfrac
