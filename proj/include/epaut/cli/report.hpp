#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace epaut::cli {

/// One measured quantity; `id` names the acceptance criterion it is held to.
struct Diagnostic
{
  std::string id;
  std::string quantity;
  double value = 0.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();  // NaN: informational
  bool at_least = false;                                         // pass when value >= threshold

  bool checked() const { return !std::isnan(threshold); }
  bool pass() const
  {
    if (!checked()) return true;
    return at_least ? value >= threshold : value < threshold;
  }
};

struct RunReport
{
  std::string name;
  double wall_seconds = 0.0;
  std::vector<Diagnostic> diagnostics;
  std::vector<std::string> files;

  bool passed() const;
  /// Human-readable table.
  std::string text() const;
  /// Deterministic CSV (no timing).
  std::string csv() const;
};

/// Running maximum that keeps a NaN once one is seen.
inline void track(double& acc, double v) { acc = (std::isnan(acc) || std::isnan(v)) ? std::nan("") : std::max(acc, v); }

Diagnostic check_below(std::string id, std::string quantity, double value, double threshold);
Diagnostic info(std::string quantity, double value);

}  // namespace epaut::cli
