#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sposkit {

/// Decimal text with 17 significant digits, enough to round-trip a double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Comma-separated, LF line endings, header row first. Fields are written
/// verbatim and must not contain commas or newlines.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string to_csv_string(const CsvTable& table);

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

}  // namespace sposkit
