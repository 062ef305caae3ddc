#pragma once

// SGF grid files: `SGF1 <kind> <nu> <res_1> ... <res_k> <target-kind>` followed
// by one node per line (row-major, last axis fastest), nu reals printed with 17
// significant digits. Axis geometry, constraint_tol and provenance live in a
// `<file>.manifest` sidecar of `key: value` lines.

#include <filesystem>
#include <string>
#include <vector>

#include "sobolev_glue/core.hpp"

namespace sobolev_glue {

struct SgfContents {
  DomainSpec domain;
  TargetSpec target;
  std::vector<double> values;
  double constraint_tol = 0.0;
  std::string provenance;

  GridMap to_grid_map() const { return GridMap(domain, target, values, constraint_tol); }
  TraceMap to_trace_map() const { return TraceMap(domain, target, values, constraint_tol); }
};

std::filesystem::path manifest_path(const std::filesystem::path& sgf);

/// `%.17g`-style decimal; parses back to the identical double.
std::string format_real(double v);
double parse_real(std::string_view text);

void write_sgf(const std::filesystem::path& path, const NodeField& map,
               const std::string& provenance = "");
SgfContents read_sgf(const std::filesystem::path& path);

std::string serialize_sgf(const NodeField& map);
std::string serialize_manifest(const NodeField& map, const std::string& provenance);
SgfContents parse_sgf(const std::string& body, const std::string* manifest);

}  // namespace sobolev_glue
