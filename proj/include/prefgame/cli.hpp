#pragma once

// The `prefgame` command line. Every command reads a flat configuration
// object whose keys have defaults, may be overridden by a JSON file
// (--config) and then by flags, and is echoed in full to <out>/config.json.
// Running the same command with --config <out>/config.json reproduces every
// output byte for byte.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "prefgame/io.hpp"

namespace prefgame::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
};

// Command names in help order.
const std::vector<std::string>& commands();

// Every key of `command` with its default value, seed first.
io::Json default_config(std::string_view command);

// Defaults overlaid with `overrides`. Throws UsageError on unknown keys,
// values of the wrong type, or a "command" entry naming another command.
io::Json resolve_config(std::string_view command, const io::Json& overrides);

// Runs one command with a resolved configuration, writing outputs and
// config.json into `out_dir` and a summary to `out`. Library errors
// propagate.
void run_command(std::string_view command, const io::Json& config,
                 const std::filesystem::path& out_dir, std::ostream& out);

// Maps an exception to its exit code.
int exit_code_for(const std::exception& e);

// Full entry point: parses argv, runs, reports errors on `err`.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace prefgame::cli
