#pragma once

// Command-line front end: energy, fold, cone, glue, estimate and accept.

#include <chrono>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace sobolev_glue {

inline constexpr const char* kToolVersion = "0.1.0";

/// Record of one CLI run, written next to the primary output as `<out>.run`.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> arguments;
  std::vector<std::pair<std::string, std::string>> input_digests;   // path, sha256
  std::vector<std::pair<std::string, std::string>> output_digests;  // path, sha256
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  double seconds = 0.0;

  std::string serialize() const;
};

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

/// Parses argv (without the program name) and runs the subcommand.
/// Returns 0 on success, 2 parameter, 3 precondition, 4 resolution or
/// optimization, 5 I/O failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sobolev_glue
