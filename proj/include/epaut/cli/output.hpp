#pragma once

// CSV interchange and atomic output.
//
// Time series: a header row of column names, then one row per sample.
// Field snapshots: a first row "snapshot,<field>,<nx>,<ny>,<t>" followed by ny
// rows of nx values (row j holds y = j dy, x increasing along the row).

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace epaut::cli {

/// Shortest round-trip decimal form; identical bits give identical text.
std::string format_number(double v);

class CsvTable
{
public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(std::vector<double> row);
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  int column(std::string_view name) const;  // -1 when absent
  std::vector<double> series(int c) const;

  std::string str() const;

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

struct Snapshot
{
  std::string field;
  double t = 0.0;
  Eigen::ArrayXXd values;  // nx x ny

  std::string str() const;
};

/// Either layout, as recognized from the first line.
struct ParsedCsv
{
  bool is_snapshot = false;
  CsvTable table{{}};
  Snapshot snapshot;
};

/// Throws ValidationError on malformed input and on files without data rows ("no data").
ParsedCsv parse_csv(std::string_view text, const std::string& origin = "csv");
ParsedCsv read_csv(const std::filesystem::path& path);

/// Named file contents produced by a run, written together.
using FileSet = std::vector<std::pair<std::string, std::string>>;

/// Writes every file to a temporary name inside `dir`, then renames them into
/// place. Nothing is left behind when any write fails; a directory created
/// here is removed again. Returns the final paths.
std::vector<std::filesystem::path> write_atomically(const std::filesystem::path& dir, const FileSet& files);

std::string read_text(const std::filesystem::path& path);

}  // namespace epaut::cli
