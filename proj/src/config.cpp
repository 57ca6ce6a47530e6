#include "aah/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "aah/error.hpp"
#include "aah/io.hpp"

namespace aah {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig(std::vector<KeySpec> schema) : schema_(std::move(schema)) {
  for (const auto& k : schema_) values_[k.name] = k.default_value;
}

bool RunConfig::has_key(const std::string& key) const { return values_.count(key) != 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::ConfigError, "unknown key '" + key + "'");
  it->second = value;
}

void RunConfig::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorKind::ConfigError, "expected key=value, got '" + std::string(assignment) + "'");
  const std::string key(trim(assignment.substr(0, eq)));
  const std::string value(trim(assignment.substr(eq + 1)));
  if (key.empty()) fail(ErrorKind::ConfigError, "empty key in '" + std::string(assignment) + "'");
  set(key, value);
}

void RunConfig::load_text(std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      assign(line);
    } catch (const Error& e) {
      fail(ErrorKind::ConfigError, std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  load_text(io::read_file(path), path.string());
}

const std::string& RunConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::ConfigError, "unknown key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string& s = text(key);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
    fail(ErrorKind::ConfigError, "key '" + key + "' needs a finite number, got '" + s + "'");
  return v;
}

long long RunConfig::integer(const std::string& key) const {
  const std::string& s = text(key);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorKind::ConfigError, "key '" + key + "' needs an integer, got '" + s + "'");
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorKind::ConfigError, "key '" + key + "' needs true/false, got '" + s + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : schema_) out.emplace_back(k.name, values_.at(k.name));
  return out;
}

std::string describe_keys(const std::vector<KeySpec>& schema) {
  std::size_t width = 0;
  for (const auto& k : schema) width = std::max(width, k.name.size());
  std::string out = "Config keys (key = default):\n";
  for (const auto& k : schema) {
    out += "  " + k.name + std::string(width - k.name.size(), ' ') + " = " + k.default_value;
    if (!k.help.empty()) out += "    " + k.help;
    out += '\n';
  }
  return out;
}

}  // namespace aah
