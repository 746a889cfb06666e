#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aamsupcon/errors.hpp"

namespace aamsupcon::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumerical = 2,
  kExitIo = 3,
};

ExitCode exit_code_for(ErrorCode code) noexcept;

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Human-readable output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aamsupcon::cli
