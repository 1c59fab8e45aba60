#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "output.hpp"
#include "report.hpp"
#include "scenario.hpp"

namespace epaut::cli {

struct RunOutput
{
  RunReport report;
  FileSet files;
};

/// Runs a scenario without touching the filesystem. Module errors are rethrown
/// with the scenario name prepended (ValidationError stays a ValidationError).
RunOutput execute(const Scenario& s, int threads = 1);

/// execute() followed by an atomic write into s.output_directory().
RunReport run_scenario(const Scenario& s, int threads = 1);

/// Property suites of one module, or "all"; criteria run on up to `threads` threads.
RunReport verify(const std::string& suite, int threads = 1);

/// Checks of the front end itself: schema round trip, determinism, error aggregation.
std::vector<Diagnostic> cli_self_checks();

/// One small scenario of every kind, as INI text.
const std::vector<std::string>& sample_scenarios();

/// Runs f(0..n-1) on up to `threads` threads; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

}  // namespace epaut::cli
