#pragma once

// Property suites behind `verify` and the acceptance binary. Criterion n
// returns every quantity it measured, each held to its own threshold.

#include <string>
#include <vector>

#include "report.hpp"

namespace epaut::cli {

inline constexpr int kCriteria = 11;

std::string criterion_title(int n);
std::vector<Diagnostic> run_criterion(int n);

/// Criteria owned by a module ("all" gives 1..11; "cli" gives none).
std::vector<int> criteria_for(const std::string& suite);

}  // namespace epaut::cli
