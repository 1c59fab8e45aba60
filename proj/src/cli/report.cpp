#include "epaut/cli/report.hpp"

#include <algorithm>
#include <cstdio>

#include "epaut/cli/output.hpp"

namespace epaut::cli {

bool RunReport::passed() const
{
  return std::all_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.pass(); });
}

std::string RunReport::text() const
{
  std::size_t width = 8;
  for (const auto& d : diagnostics) width = std::max(width, d.quantity.size());
  std::string out;
  char buf[512];
  for (const auto& d : diagnostics) {
    const char* status = !d.checked() ? "info" : d.pass() ? "PASS" : "FAIL";
    if (d.checked())
      std::snprintf(buf, sizeof buf, "  %-4s %-5s %-*s %12.4e %s %.1e\n", status, d.id.c_str(), static_cast<int>(width),
                    d.quantity.c_str(), d.value, d.at_least ? ">=" : "< ", d.threshold);
    else
      std::snprintf(buf, sizeof buf, "  %-4s %-5s %-*s %12.4e\n", status, "", static_cast<int>(width), d.quantity.c_str(),
                    d.value);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%s: %s (%.1f s)\n", name.c_str(), passed() ? "pass" : "FAIL", wall_seconds);
  return out + buf;
}

std::string RunReport::csv() const
{
  std::string out = "id,quantity,value,threshold,status\n";
  for (const auto& d : diagnostics) {
    out += d.id + "," + d.quantity + "," + format_number(d.value) + "," +
           (d.checked() ? std::string(d.at_least ? ">=" : "<") + format_number(d.threshold) : "") + "," +
           (!d.checked() ? "info" : d.pass() ? "pass" : "fail") + "\n";
  }
  return out;
}

Diagnostic check_below(std::string id, std::string quantity, double value, double threshold)
{
  return {std::move(id), std::move(quantity), value, threshold, false};
}

Diagnostic info(std::string quantity, double value) { return {"", std::move(quantity), value}; }

}  // namespace epaut::cli
