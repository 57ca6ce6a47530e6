#pragma once

// Flat `key = value` run configuration with a fixed key schema per command.
// Keys carry their unit in the name (Z_cm, ws_um, ...); energies of the
// lattice model are given in units of J.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace aah {

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

class RunConfig {
 public:
  explicit RunConfig(std::vector<KeySpec> schema);

  /// Reads `key = value` lines; '#' starts a comment, blank lines are
  /// skipped. Throws ConfigError naming the key or line on any problem.
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text, std::string_view origin);

  /// "key=value" as given on the command line.
  void assign(std::string_view assignment);
  void set(const std::string& key, const std::string& value);

  bool has_key(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;

  /// Every key with its effective value, in schema order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  const std::vector<KeySpec>& schema() const noexcept { return schema_; }

 private:
  std::vector<KeySpec> schema_;
  std::map<std::string, std::string> values_;
};

/// Help text listing every key with its default.
std::string describe_keys(const std::vector<KeySpec>& schema);

}  // namespace aah
