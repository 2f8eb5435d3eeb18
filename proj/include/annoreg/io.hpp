#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace annoreg {

std::string read_file(const std::filesystem::path& path);

/// Writes atomically enough for our purposes: parent directories are created
/// and the file is replaced as a whole.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_shortest(double v);

/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

/// Strict number parsing; throws ParseError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

/// Minimal CSV reader for the pipeline's own files: comma-separated, no
/// quoting, first line is the header. Blank lines are skipped, CRLF accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Index of a header column; throws ParseError when absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view bytes, std::string_view what);

std::vector<std::string> split(std::string_view line, char sep);

std::string trim(std::string_view s);

}  // namespace annoreg
