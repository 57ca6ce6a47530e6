// aahlab: command-line front end for the commensurate AAH toolkit.
//
//   aahlab bands --set nu_od_over_J=4 --out results
//   aahlab pump --config run.cfg --set Z_cm=15
//   aahlab preset fig3b --check
//   aahlab --list-presets
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 preset expectation not met under --check.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aah/commands.hpp"
#include "aah/error.hpp"
#include "aah/parallel.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kCheckFailed = 4;

struct CommandArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::string prefix;
};

void add_common(CLI::App* sub, CommandArgs& args) {
  sub->add_option("--set", args.overrides, "Override one key (key=value); repeatable, applied after --config");
  sub->add_option("--out", args.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--prefix", args.prefix, "Output file-name prefix");
}

void report(const aah::RunOutcome& outcome) {
  for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commensurate Aubry-Andre-Harper lattices: bands, Chern numbers, edge states, "
               "waveguide pumping and tight-binding extraction"};
  app.require_subcommand(0, 1);
  unsigned threads = 0;
  bool list = false;
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");
  app.add_flag("--list-presets", list, "List the named figure presets");

  CommandArgs args;
  std::vector<std::pair<CLI::App*, std::string>> subs;
  for (const auto& cmd : aah::command_table()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.summary);
    sub->add_option("--config", args.config_file, "Flat key = value configuration file");
    add_common(sub, args);
    sub->footer(aah::describe_keys(cmd.keys));
    subs.emplace_back(sub, cmd.name);
  }

  std::string preset_name;
  bool check = false;
  CLI::App* preset = app.add_subcommand("preset", "Run a named figure preset");
  preset->add_option("name", preset_name, "Preset name (see --list-presets)")->required();
  preset->add_flag("--check", check, "Compare the result with the expected figure values (exit 4 on mismatch)");
  add_common(preset, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (list) {
    for (const auto& p : aah::preset_table())
      std::cout << p.name << "  [" << p.command << "]  " << p.description << '\n';
    return 0;
  }
  aah::set_thread_count(threads);

  aah::RunOptions options;
  options.out_dir = args.out_dir;
  options.prefix = args.prefix;
  options.log = &std::cerr;

  try {
    if (preset->parsed()) {
      const aah::Preset& p = aah::find_preset(preset_name);
      aah::RunConfig config = aah::preset_config(p);
      for (const auto& o : args.overrides) config.assign(o);
      if (options.prefix.empty()) options.prefix = p.name;
      const aah::RunOutcome outcome = aah::run_command(p.command, config, options);
      report(outcome);
      if (check) {
        const aah::CheckResult r = p.check(outcome.summary);
        for (const auto& m : r.messages) std::cout << "check " << p.name << ": " << m << '\n';
        std::cout << "check " << p.name << ": " << (r.passed ? "PASS" : "FAIL") << '\n';
        if (!r.passed) return kCheckFailed;
      }
      return 0;
    }
    for (const auto& [sub, name] : subs) {
      if (!sub->parsed()) continue;
      aah::RunConfig config(aah::find_command(name).keys);
      if (!args.config_file.empty()) config.load_file(args.config_file);
      for (const auto& o : args.overrides) config.assign(o);
      report(aah::run_command(name, config, options));
      return 0;
    }
    std::cout << app.help();
    return kConfigError;
  } catch (const aah::Error& e) {
    std::cerr << "error [" << aah::to_string(e.kind()) << "]: " << e.what() << '\n';
    return e.kind() == aah::ErrorKind::ConfigError ? kConfigError : kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}
