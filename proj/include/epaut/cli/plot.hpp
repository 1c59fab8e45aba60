#pragma once

// Self-contained SVG: line plots on a single axis and heatmaps rasterized to
// an embedded PNG with a colour scale symmetric about zero.

#include <filesystem>
#include <string>
#include <vector>

#include "output.hpp"

namespace epaut::cli {

/// Plots columns `ys` (all but the first when empty) against column `x`.
std::string line_plot(const CsvTable& table, int x = 0, std::vector<int> ys = {}, const std::string& title = "");

/// ny == 1 snapshots become line plots over the grid index.
std::string heatmap(const Snapshot& snap, const std::string& title = "");

std::string plot(const ParsedCsv& csv, const std::string& title);

/// Reads `csv` and writes `<stem>.svg` into `out_dir` (defaults to the CSV's directory).
std::filesystem::path plot_file(const std::filesystem::path& csv, const std::filesystem::path& out_dir = {});

}  // namespace epaut::cli
