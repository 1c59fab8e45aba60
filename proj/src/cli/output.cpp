#include "epaut/cli/output.hpp"

#include <boost/algorithm/string.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "epaut/errors.hpp"

namespace fs = std::filesystem;

namespace epaut::cli {

std::string format_number(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), end};
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<double> row)
{
  if (row.size() != columns_.size())
    throw ValidationError("csv: row has " + std::to_string(row.size()) + " values, header has " +
                          std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

int CsvTable::column(std::string_view name) const
{
  for (std::size_t c = 0; c < columns_.size(); ++c)
    if (columns_[c] == name) return static_cast<int>(c);
  return -1;
}

std::vector<double> CsvTable::series(int c) const
{
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.at(static_cast<std::size_t>(c)));
  return out;
}

std::string CsvTable::str() const
{
  std::string out = boost::algorithm::join(columns_, ",") + "\n";
  for (const auto& r : rows_) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += ',';
      out += format_number(r[c]);
    }
    out += '\n';
  }
  return out;
}

std::string Snapshot::str() const
{
  std::string out = "snapshot," + field + "," + std::to_string(values.rows()) + "," + std::to_string(values.cols()) +
                    "," + format_number(t) + "\n";
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (i) out += ',';
      out += format_number(values(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line)
{
  std::vector<std::string> cells;
  boost::algorithm::split(cells, line, boost::is_any_of(","));
  for (auto& c : cells) boost::algorithm::trim(c);
  return cells;
}

double parse_value(const std::string& cell, const std::string& where)
{
  if (cell == "nan") return std::nan("");
  if (cell == "inf") return INFINITY;
  if (cell == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || end != cell.data() + cell.size())
    throw ValidationError(where + ": '" + cell + "' is not a number");
  return v;
}

int parse_count(const std::string& cell, const std::string& where)
{
  int v = 0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || end != cell.data() + cell.size() || v < 1)
    throw ValidationError(where + ": '" + cell + "' is not a positive size");
  return v;
}

}  // namespace

ParsedCsv parse_csv(std::string_view text, const std::string& origin)
{
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      boost::algorithm::trim(line);
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.empty()) throw ValidationError(origin + ": no data");

  ParsedCsv out;
  const auto head = split_line(lines[0]);
  if (head[0] == "snapshot") {
    if (head.size() != 5) throw ValidationError(origin + ":1: snapshot header needs snapshot,<field>,<nx>,<ny>,<t>");
    out.is_snapshot = true;
    out.snapshot.field = head[1];
    const int nx = parse_count(head[2], origin + ":1");
    const int ny = parse_count(head[3], origin + ":1");
    out.snapshot.t = parse_value(head[4], origin + ":1");
    if (lines.size() == 1) throw ValidationError(origin + ": no data");
    if (static_cast<int>(lines.size()) - 1 != ny)
      throw ValidationError(origin + ": expected " + std::to_string(ny) + " rows, found " +
                            std::to_string(lines.size() - 1));
    out.snapshot.values.resize(nx, ny);
    for (int j = 0; j < ny; ++j) {
      const std::string where = origin + ":" + std::to_string(j + 2);
      const auto cells = split_line(lines[static_cast<std::size_t>(j) + 1]);
      if (static_cast<int>(cells.size()) != nx)
        throw ValidationError(where + ": expected " + std::to_string(nx) + " values, found " + std::to_string(cells.size()));
      for (int i = 0; i < nx; ++i) out.snapshot.values(i, j) = parse_value(cells[static_cast<std::size_t>(i)], where);
    }
    return out;
  }

  for (const auto& h : head)
    if (h.empty()) throw ValidationError(origin + ":1: empty column name");
  out.table = CsvTable(head);
  if (lines.size() == 1) throw ValidationError(origin + ": no data");
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::string where = origin + ":" + std::to_string(r + 1);
    const auto cells = split_line(lines[r]);
    if (cells.size() != head.size())
      throw ValidationError(where + ": expected " + std::to_string(head.size()) + " values, found " +
                            std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_value(c, where));
    out.table.add_row(std::move(row));
  }
  return out;
}

std::string read_text(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ParsedCsv read_csv(const fs::path& path) { return parse_csv(read_text(path), path.string()); }

std::vector<fs::path> write_atomically(const fs::path& dir, const FileSet& files)
{
  std::error_code ec;
  const bool existed = fs::exists(dir, ec);
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));

  std::vector<fs::path> temps, finals;
  auto discard = [&] {
    std::error_code ignore;
    for (const auto& t : temps) fs::remove(t, ignore);
    if (!existed) fs::remove(dir, ignore);
  };
  const std::string tag = ".tmp-" + std::to_string(::getpid()) + "-";
  for (std::size_t k = 0; k < files.size(); ++k) {
    const fs::path final_path = dir / files[k].first;
    const fs::path temp = dir / ("." + files[k].first + tag + std::to_string(k));
    temps.push_back(temp);
    finals.push_back(final_path);
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (out) out.write(files[k].second.data(), static_cast<std::streamsize>(files[k].second.size()));
    if (out) out.close();
    if (!out) {
      discard();
      throw std::runtime_error("cannot write " + final_path.string());
    }
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    fs::rename(temps[k], finals[k], ec);
    if (ec) {
      // Files already moved stay complete; the rest are dropped.
      for (std::size_t r = k; r < temps.size(); ++r) {
        std::error_code ignore;
        fs::remove(temps[r], ignore);
      }
      throw std::runtime_error("cannot rename into " + finals[k].string() + ": " + ec.message());
    }
  }
  return finals;
}

}  // namespace epaut::cli
