#pragma once

// Command implementations behind the aahlab front end. Every command reads a
// RunConfig, writes its artifacts into an output directory and returns a
// summary; presets bind a command to the settings of one figure.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "aah/config.hpp"
#include "aah/io.hpp"

namespace aah {

struct CommandInfo {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;
};

const std::vector<CommandInfo>& command_table();
/// Throws ConfigError for an unknown name.
const CommandInfo& find_command(const std::string& name);

struct CheckResult {
  bool passed = true;
  std::vector<std::string> messages;
};

struct Preset {
  std::string name;
  std::string command;
  std::string description;
  std::vector<std::pair<std::string, std::string>> settings;
  /// Expected outcome, evaluated on the command summary.
  std::function<CheckResult(const io::Json&)> check;
};

const std::vector<Preset>& preset_table();
const Preset& find_preset(const std::string& name);

/// A fresh configuration for the command of `preset` with its settings applied.
RunConfig preset_config(const Preset& preset);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::string prefix;       // file-name prefix; the command name when empty
  std::ostream* log = nullptr;  // progress notes (never part of the outputs)
};

struct RunOutcome {
  io::Json summary;
  std::vector<std::filesystem::path> files;
};

RunOutcome run_command(const std::string& command, const RunConfig& config, const RunOptions& options);

}  // namespace aah
