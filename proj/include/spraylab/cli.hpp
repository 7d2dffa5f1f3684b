#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "spraylab/degree.hpp"
#include "spraylab/sprays.hpp"

namespace spraylab {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  /// Empty means standard output.
  std::string out_path;
};

struct CommandResult {
  int exit_code = kExitPass;
  nlohmann::json report;
};

/// Spray from {"kind": ...}: stereographic, ambient-stereographic, group, product, iterated, constant.
Spray spray_from_json(const nlohmann::json& spec);
/// Matrix-valued map from {"map": ...}: a_k, power, sharp.
MatrixSphereMap matrix_map_from_json(const nlohmann::json& spec);

CommandResult cmd_verify_spray(const nlohmann::json& spec, std::uint64_t seed);
CommandResult cmd_degree(const nlohmann::json& spec, std::uint64_t seed);
CommandResult cmd_make_ak(const nlohmann::json& spec, std::uint64_t seed);
CommandResult cmd_approximate(const nlohmann::json& spec, std::uint64_t seed);

/// Dispatches on config.command and maps exceptions to exit codes; the report always carries
/// the command, seed, config echo and exit code.
CommandResult run_command(const RunConfig& config);

/// Writes to a sibling temporary file and renames it into place.
void write_report_atomic(const std::string& path, const nlohmann::json& report);
std::string format_report(const nlohmann::json& report);

/// Full command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace spraylab
