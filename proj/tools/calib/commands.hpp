#ifndef CALIB_TOOLS_COMMANDS_HPP_
#define CALIB_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace calib::cli {

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::filesystem::path out_dir = ".";
};

/// Each command reads its JSON config (relative paths resolve against the
/// config's directory) and writes its outputs under out_dir. Failures throw
/// calib::Error.
void cmd_simulate(const CommandOptions& opt);
void cmd_calibrate_3d3d(const CommandOptions& opt);
void cmd_calibrate_2d3d(const CommandOptions& opt);
void cmd_chain(const CommandOptions& opt);
void cmd_fuse(const CommandOptions& opt);

/// Dispatches by command name; returns the process exit code (0 success,
/// 1 input or configuration error, 2 numerical failure) after reporting any
/// error on stderr.
int run_command(std::string_view name, const CommandOptions& opt);

/// Applies CALIB_LOG (trace, debug, info, warn, error, off) to the logger.
void configure_logging();

}  // namespace calib::cli

#endif  // CALIB_TOOLS_COMMANDS_HPP_
