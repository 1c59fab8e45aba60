// acceptance [n ...]: one PASS/FAIL line per criterion (all 11 when no arguments).
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "epaut/cli/output.hpp"
#include "epaut/cli/suites.hpp"

int main(int argc, char** argv)
{
  using namespace epaut::cli;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > kCriteria) {
      std::fprintf(stderr, "acceptance: criterion must be 1..%d (got '%s')\n", kCriteria, argv[i]);
      return 2;
    }
    ids.push_back(n);
  }
  if (ids.empty())
    for (int n = 1; n <= kCriteria; ++n) ids.push_back(n);

  int failed = 0;
  for (const int n : ids) {
    std::string details;
    bool pass = true;
    try {
      const auto diags = run_criterion(n);
      for (const auto& d : diags) {
        if (!details.empty()) details += "; ";
        details += d.quantity + " = " + format_number(d.value);
        if (d.checked()) {
          details += std::string(d.at_least ? " >= " : " < ") + format_number(d.threshold);
          if (!d.pass()) details += " (violated)";
        }
        pass = pass && d.pass();
      }
      if (diags.empty()) {
        pass = false;
        details = "nothing measured";
      }
    } catch (const std::exception& e) {
      pass = false;
      details = std::string("error: ") + e.what();
    }
    std::printf("%s AC%d %s: %s\n", pass ? "PASS" : "FAIL", n, criterion_title(n).c_str(), details.c_str());
    std::fflush(stdout);
    failed += !pass;
  }
  return failed ? 1 : 0;
}
