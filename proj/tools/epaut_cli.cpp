#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "epaut/cli/plot.hpp"
#include "epaut/cli/runner.hpp"
#include "epaut/cli/scenario.hpp"

namespace {

// 0 pass, 1 run failure, 2 validation failure, 3 acceptance-threshold failure.
enum Exit { ok = 0, run_failure = 1, invalid = 2, threshold = 3 };

struct Overrides
{
  std::string out;
  std::optional<int> stride;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

int worst(int a, int b)
{
  // A run failure hides nothing worse than itself; validation beats thresholds.
  auto rank = [](int e) { return e == run_failure ? 3 : e == invalid ? 2 : e == threshold ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

int run_files(const std::vector<std::string>& files, const Overrides& o)
{
  using namespace epaut::cli;
  int status = ok;
  for (const auto& f : files) {
    try {
      auto s = parse_scenario_file(f);
      if (!o.out.empty()) s.output.directory = files.size() == 1 ? o.out : (std::filesystem::path(o.out) / s.name).string();
      if (o.stride) {
        if (*o.stride < 1) throw epaut::ValidationError("--stride must be at least 1");
        s.output.stride = *o.stride;
      }
      if (o.seed) s.seed = *o.seed;
      const auto r = run_scenario(s, o.threads);
      std::cout << r.text();
      for (const auto& p : r.files) std::cout << "  wrote " << p << "\n";
      if (!r.passed()) status = worst(status, threshold);
    } catch (const epaut::ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = worst(status, invalid);
    } catch (const std::exception& e) {
      std::cerr << "run failed: " << e.what() << "\n";
      status = worst(status, run_failure);
    }
  }
  return status;
}

int run_verify(const std::string& suite, const Overrides& o)
{
  using namespace epaut::cli;
  const auto& names = verify_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    std::cerr << "error: unknown module '" << suite << "'\n";
    return invalid;
  }
  try {
    const auto r = verify(suite, o.threads);
    std::cout << r.text();
    if (!o.out.empty()) {
      FileSet files{{"report.csv", r.csv()}};
      for (const auto& p : write_atomically(o.out, files)) std::cout << "  wrote " << p.string() << "\n";
    }
    return r.passed() ? ok : threshold;
  } catch (const epaut::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return run_failure;
  }
}

int run_plot(const std::vector<std::string>& files, const Overrides& o)
{
  int status = ok;
  for (const auto& f : files) {
    try {
      const auto svg = epaut::cli::plot_file(f, o.out);
      std::cout << "wrote " << svg.string() << "\n";
    } catch (const epaut::ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = worst(status, invalid);
    } catch (const std::exception& e) {
      std::cerr << "plot failed: " << e.what() << "\n";
      status = worst(status, run_failure);
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Euler-Poincare flows on bundle automorphism groups"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--out", o.out, "output directory")->type_name("DIR");
  app.add_option("--stride", o.stride, "samples every N steps")->type_name("N");
  app.add_option("--seed", o.seed, "random seed for presets")->type_name("K");
  app.add_option("--threads", o.threads, "worker threads for verify")->type_name("N")->check(CLI::PositiveNumber);

  std::vector<std::string> scenario_files, csv_files;
  std::string suite = "all";
  auto* run = app.add_subcommand("run", "run scenario files");
  run->add_option("file", scenario_files, "scenario INI files")->required();
  auto* ver = app.add_subcommand("verify", "property suites of one module or all");
  ver->add_option("module", suite, "all, lie, kernels, singular, epaut1d, epaut2d, clebsch or cli");
  auto* plt = app.add_subcommand("plot", "render CSV output as SVG");
  plt->add_option("csv", csv_files, "CSV files")->required();
  for (auto* sub : {run, ver, plt}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : invalid;
  }
  if (*run) return run_files(scenario_files, o);
  if (*ver) return run_verify(suite, o);
  return run_plot(csv_files, o);
}
