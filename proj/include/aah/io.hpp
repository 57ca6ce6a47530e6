#pragma once

// Locale-independent output: 12-significant-digit floats, CSV, PGM (P2) and
// JSON with sorted keys.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace aah::io {

using Json = nlohmann::json;  // std::map-backed, so keys serialize sorted

/// Shortest form with at most 12 significant digits; "nan", "inf", "-inf"
/// for non-finite values and "0" for both signed zeros.
std::string format_double(double v);

/// v rounded to 12 significant digits (null when not finite).
Json number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& cell(std::string_view text);
  CsvTable& cell(double v);
  CsvTable& cell(long long v);
  CsvTable& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvTable& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  void end_row();

  const std::string& text() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::size_t filled_ = 0;
  std::string text_;
};

/// Grayscale P2 image; values are mapped linearly from [0, max] onto
/// [0, maxval] (max taken over the frame, all-zero frames stay black).
std::string pgm_normalized(const std::vector<double>& values, int width, int height, int maxval = 255);

/// P2 image with explicit gray levels in [0, maxval].
std::string pgm_levels(const std::vector<int>& levels, int width, int height, int maxval = 255);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

/// Writes via a temporary sibling and rename; creates parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace aah::io
