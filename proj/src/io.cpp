#include "aah/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "aah/error.hpp"

namespace aah::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  const std::string s = format_double(v);
  double r = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), r);
  return r;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

CsvTable& CsvTable::cell(std::string_view s) {
  if (filled_ >= columns_) fail(ErrorKind::InvalidArgument, "CSV row has more cells than header columns");
  if (filled_) text_ += ',';
  if (s.find_first_of(",\"\n") != std::string_view::npos) {
    text_ += '"';
    for (char c : s) {
      if (c == '"') text_ += '"';
      text_ += c;
    }
    text_ += '"';
  } else {
    text_ += s;
  }
  ++filled_;
  return *this;
}

CsvTable& CsvTable::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvTable& CsvTable::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

void CsvTable::end_row() {
  if (filled_ != columns_) fail(ErrorKind::InvalidArgument, "CSV row has fewer cells than header columns");
  text_ += '\n';
  filled_ = 0;
}

std::string pgm_levels(const std::vector<int>& levels, int width, int height, int maxval) {
  if (width < 1 || height < 1 || levels.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorKind::InvalidArgument, "PGM size does not match the pixel count");
  std::string out = "P2\n" + std::to_string(width) + " " + std::to_string(height) + "\n" + std::to_string(maxval) + "\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (c) out += ' ';
      out += std::to_string(levels[static_cast<std::size_t>(r) * width + c]);
    }
    out += '\n';
  }
  return out;
}

std::string pgm_normalized(const std::vector<double>& values, int width, int height, int maxval) {
  double top = 0.0;
  for (double v : values)
    if (std::isfinite(v)) top = std::max(top, v);
  std::vector<int> levels(values.size(), 0);
  if (top > 0.0)
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = std::isfinite(values[i]) ? std::max(0.0, values[i]) : 0.0;
      levels[i] = static_cast<int>(std::lround(v / top * maxval));
    }
  return pgm_levels(levels, width, height, maxval);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::ConfigError, "cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) fail(ErrorKind::ConfigError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::ConfigError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::ConfigError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace aah::io
