#include "actmeas/cli/csv.hpp"

#include <charconv>
#include <fstream>

#include "actmeas/errors.hpp"

namespace actmeas::cli {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string row_label(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ": row " + std::to_string(line);
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      return cells;
    }
    cells.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("missing column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::string& cell = rows.at(row)[column(name)];
  double v = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size())
    throw DataError(source + ": row " + std::to_string(lines.at(row)) + ": column '" + std::string(name) + "' is not a number: '" +
                    cell + "'");
  return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  CsvTable table;
  table.source = path.string();
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  table.header = split_csv_line(strip_cr(line));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != table.header.size())
      throw DataError(row_label(path, line_no) + ": expected " + std::to_string(table.header.size()) +
                      " fields, found " + std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
    table.lines.push_back(line_no);
  }
  return table;
}

std::vector<std::vector<bool>> read_trace_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<bool>> trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<bool> episode;
    for (const auto& cell : split_csv_line(line)) {
      if (cell != "0" && cell != "1")
        throw DataError(row_label(path, line_no) + ": trace cell '" + cell + "' is not 0 or 1");
      episode.push_back(cell == "1");
    }
    trace.push_back(std::move(episode));
  }
  if (trace.empty()) throw DataError(path.string() + ": empty trace");
  return trace;
}

}  // namespace actmeas::cli
