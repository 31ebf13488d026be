#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace actmeas::cli {

// Plain comma-separated table without quoting. Row numbers in errors are
// 1-based file lines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // file line of each row
  std::string source;

  // Index of a header column; throws DataError when absent.
  std::size_t column(std::string_view name) const;
  // Parses a numeric cell; throws DataError naming the row and column.
  double number(std::size_t row, std::string_view name) const;
};

std::vector<std::string> split_csv_line(std::string_view line);

// Reads a table whose first line is a header and whose rows all have the
// header's width. Throws DataError on a missing file or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

// Reads a measurement trace: one episode per line of 0/1 cells, no header.
std::vector<std::vector<bool>> read_trace_csv(const std::filesystem::path& path);

}  // namespace actmeas::cli
