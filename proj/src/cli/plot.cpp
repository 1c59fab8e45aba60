#include "epaut/cli/plot.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "epaut/errors.hpp"

namespace fs = std::filesystem;

namespace epaut::cli {

namespace {

constexpr int kWidth = 760, kHeight = 460;
constexpr int kLeft = 90, kRight = 170, kTop = 44, kBottom = 56;

const std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v)
{
  if (std::abs(v) < 1e-300) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

struct Range
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v)
  {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void pad()
  {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi == lo) {
      const double d = lo == 0.0 ? 0.5 : 0.05 * std::abs(lo);
      lo -= d;
      hi += d;
    }
  }
};

double nice_step(double span)
{
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0) * mag;
}

std::vector<double> ticks(const Range& r)
{
  const double step = nice_step(r.hi - r.lo);
  std::vector<double> out;
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

std::string header(const std::string& title)
{
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
                  std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " +
                  std::to_string(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    s += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  return s;
}

// Frame, ticks and axis labels for the plot rectangle; returns the coordinate maps.
struct Axes
{
  Range x, y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }

  std::string draw(const std::string& xlabel) const
  {
    std::string s;
    const int w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
    s += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kTop) + "\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(x)) {
      const std::string xp = fixed(px(t));
      s += "<line x1=\"" + xp + "\" y1=\"" + std::to_string(kHeight - kBottom) + "\" x2=\"" + xp + "\" y2=\"" +
           std::to_string(kHeight - kBottom + 5) + "\" stroke=\"black\"/>\n";
      s += "<text x=\"" + xp + "\" y=\"" + std::to_string(kHeight - kBottom + 19) + "\" text-anchor=\"middle\">" +
           label(t) + "</text>\n";
    }
    for (double t : ticks(y)) {
      const std::string yp = fixed(py(t));
      s += "<line x1=\"" + std::to_string(kLeft - 5) + "\" y1=\"" + yp + "\" x2=\"" + std::to_string(kLeft) +
           "\" y2=\"" + yp + "\" stroke=\"black\"/>\n";
      s += "<text x=\"" + std::to_string(kLeft - 8) + "\" y=\"" + fixed(py(t) + 4) + "\" text-anchor=\"end\">" +
           label(t) + "</text>\n";
    }
    s += "<text x=\"" + std::to_string(kLeft + w / 2) + "\" y=\"" + std::to_string(kHeight - 14) +
         "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
    return s;
  }
};

// --- PNG -------------------------------------------------------------------

void put32(std::string& out, std::uint32_t v)
{
  for (int s = 24; s >= 0; s -= 8) out += static_cast<char>((v >> s) & 0xff);
}

void chunk(std::string& out, const char* type, const std::string& data)
{
  put32(out, static_cast<std::uint32_t>(data.size()));
  const std::string body = std::string(type, 4) + data;
  out += body;
  put32(out, static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

/// 8-bit RGB PNG from row-major pixels (3 bytes each).
std::string encode_png(int w, int h, const std::vector<std::uint8_t>& rgb)
{
  std::string raw;
  raw.reserve(static_cast<std::size_t>(h) * (3 * w + 1));
  for (int r = 0; r < h; ++r) {
    raw += '\0';
    raw.append(reinterpret_cast<const char*>(rgb.data()) + static_cast<std::size_t>(r) * 3 * w, static_cast<std::size_t>(3 * w));
  }
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(len, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &len, reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw std::runtime_error("plot: PNG compression failed");
  packed.resize(len);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put32(ihdr, static_cast<std::uint32_t>(w));
  put32(ihdr, static_cast<std::uint32_t>(h));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // depth 8, RGB, deflate, no filter, no interlace
  chunk(png, "IHDR", ihdr);
  chunk(png, "IDAT", packed);
  chunk(png, "IEND", "");
  return png;
}

std::string base64(const std::string& bytes)
{
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

/// Diverging blue-white-red map on [-1, 1].
std::array<std::uint8_t, 3> diverging(double s)
{
  s = std::clamp(s, -1.0, 1.0);
  const std::array<double, 3> cold{59, 76, 192}, warm{180, 4, 38};
  const auto& end = s < 0 ? cold : warm;
  const double a = std::abs(s);
  std::array<std::uint8_t, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = static_cast<std::uint8_t>(std::lround(255.0 + a * (end[k] - 255.0)));
  return c;
}

}  // namespace

std::string line_plot(const CsvTable& table, int x, std::vector<int> ys, const std::string& title)
{
  if (table.size() == 0) throw ValidationError("plot: no data");
  const int nc = static_cast<int>(table.columns().size());
  if (x < 0 || x >= nc) throw ValidationError("plot: x column out of range");
  if (ys.empty())
    for (int c = 0; c < nc; ++c)
      if (c != x) ys.push_back(c);
  if (ys.empty()) throw ValidationError("plot: nothing to plot against " + table.columns()[x]);

  Axes ax;
  for (const auto& r : table.rows()) {
    ax.x.add(r[x]);
    for (int c : ys) ax.y.add(r[c]);
  }
  ax.x.pad();
  ax.y.pad();

  std::string s = header(title) + ax.draw(table.columns()[x]);
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const char* colour = kPalette[k % kPalette.size()];
    std::string pts;
    for (const auto& r : table.rows()) {
      if (!std::isfinite(r[x]) || !std::isfinite(r[ys[k]])) continue;
      pts += fixed(ax.px(r[x])) + "," + fixed(ax.py(r[ys[k]])) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const int ly = kTop + 14 + 18 * static_cast<int>(k);
    const int lx = kWidth - kRight + 14;
    s += "<line x1=\"" + std::to_string(lx) + "\" y1=\"" + std::to_string(ly - 4) + "\" x2=\"" + std::to_string(lx + 20) +
         "\" y2=\"" + std::to_string(ly - 4) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + std::to_string(lx + 26) + "\" y=\"" + std::to_string(ly) + "\">" +
         escape(table.columns()[ys[k]]) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string heatmap(const Snapshot& snap, const std::string& title)
{
  const auto& v = snap.values;
  if (v.size() == 0) throw ValidationError("plot: no data");
  const std::string name = title.empty() ? snap.field + " at t = " + label(snap.t) : title;
  if (v.cols() == 1) {
    CsvTable t({"index", snap.field});
    for (Eigen::Index i = 0; i < v.rows(); ++i) t.add_row({static_cast<double>(i), v(i, 0)});
    return line_plot(t, 0, {1}, name);
  }

  const int nx = static_cast<int>(v.rows()), ny = static_cast<int>(v.cols());
  double m = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (std::isfinite(v.data()[k])) m = std::max(m, std::abs(v.data()[k]));

  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(nx) * ny * 3);
  for (int r = 0; r < ny; ++r)
    for (int i = 0; i < nx; ++i) {
      const double val = v(i, ny - 1 - r);  // y increases upwards
      const auto c = diverging(m > 0.0 && std::isfinite(val) ? val / m : 0.0);
      std::copy(c.begin(), c.end(), rgb.begin() + 3 * (static_cast<std::ptrdiff_t>(r) * nx + i));
    }

  const int h = kHeight - kTop - kBottom;
  const int w = std::min(kWidth - kLeft - kRight, h * nx / ny);
  std::string s = header(name);
  s += "<image x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kTop) + "\" width=\"" + std::to_string(w) +
       "\" height=\"" + std::to_string(h) + "\" preserveAspectRatio=\"none\" style=\"image-rendering:pixelated\" " +
       "href=\"data:image/png;base64," + base64(encode_png(nx, ny, rgb)) + "\"/>\n";
  s += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kTop) + "\" width=\"" + std::to_string(w) +
       "\" height=\"" + std::to_string(h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + std::to_string(kLeft + w / 2) + "\" y=\"" + std::to_string(kHeight - 30) +
       "\" text-anchor=\"middle\">" + std::to_string(nx) + " x " + std::to_string(ny) + "</text>\n";

  // Colour bar from -m (bottom) to +m (top).
  const int bx = kLeft + w + 30, steps = 64;
  for (int k = 0; k < steps; ++k) {
    const auto c = diverging(1.0 - 2.0 * (k + 0.5) / steps);
    char fill[8];
    std::snprintf(fill, sizeof fill, "#%02x%02x%02x", c[0], c[1], c[2]);
    s += "<rect x=\"" + std::to_string(bx) + "\" y=\"" + fixed(kTop + k * double(h) / steps) +
         "\" width=\"18\" height=\"" + fixed(double(h) / steps + 0.5) + "\" fill=\"" + fill + "\"/>\n";
  }
  s += "<rect x=\"" + std::to_string(bx) + "\" y=\"" + std::to_string(kTop) + "\" width=\"18\" height=\"" +
       std::to_string(h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  const std::array<std::pair<double, int>, 3> marks{{{m, kTop + 4}, {0.0, kTop + h / 2 + 4}, {-m, kTop + h + 4}}};
  for (const auto& [val, y] : marks)
    s += "<text x=\"" + std::to_string(bx + 24) + "\" y=\"" + std::to_string(y) + "\">" + label(val) + "</text>\n";
  return s + "</svg>\n";
}

std::string plot(const ParsedCsv& csv, const std::string& title)
{
  return csv.is_snapshot ? heatmap(csv.snapshot) : line_plot(csv.table, 0, {}, title);
}

fs::path plot_file(const fs::path& csv, const fs::path& out_dir)
{
  const auto parsed = read_csv(csv);
  const fs::path dir = out_dir.empty() ? (csv.has_parent_path() ? csv.parent_path() : fs::path(".")) : out_dir;
  const std::string name = csv.stem().string() + ".svg";
  write_atomically(dir, {{name, plot(parsed, csv.stem().string())}});
  return dir / name;
}

}  // namespace epaut::cli
