#pragma once

#include <string>
#include <vector>

#include "actmeas/cli/csv.hpp"
#include "actmeas/harness.hpp"

namespace actmeas::cli {

inline constexpr const char* kMeasuredColor = "#f28e2b";
inline constexpr const char* kUnmeasuredColor = "#4e79a7";

// A rendered figure plus the numbers it was drawn from.
struct Plot {
  std::string svg;
  CsvTable table;
};

// Episodes as rows, time steps as columns; measured cells orange, unmeasured
// blue, steps past an episode's end left empty.
Plot trace_grid(const MeasurementTrace& trace);

// Median evaluation costed return over trials with a min..max band, from one
// or more metrics tables (trials are told apart by their trial column).
Plot learning_curve(const std::vector<CsvTable>& metrics);

// Median best costed return per (agent, cost), grouped by agent, from one or
// more summary tables.
Plot cost_bars(const std::vector<CsvTable>& summaries);

void write_table_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace actmeas::cli
