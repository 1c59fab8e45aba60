#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "epaut/cli/expression.hpp"
#include "epaut/cli/output.hpp"
#include "epaut/cli/plot.hpp"
#include "epaut/cli/report.hpp"
#include "epaut/cli/runner.hpp"
#include "epaut/cli/scenario.hpp"

using namespace epaut;
using namespace epaut::cli;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> problems_of(const std::string& text)
{
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle)
{
  for (const auto& p : problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("epaut_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

void put(const fs::path& p, const std::string& text)
{
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

int run_cli(const std::string& args)
{
  const std::string cmd = std::string(EPAUT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kMinimal = "[scenario]\nname = mini\nkind = peakons\n";

}  // namespace

// ---- schema -----------------------------------------------------------------------

TEST(Scenario, MinimalPeakonFileGetsDefaults)
{
  const auto s = parse_scenario(kMinimal);
  EXPECT_EQ(s.name, "mini");
  EXPECT_EQ(s.kind, Kind::peakons);
  const auto& p = std::get<PeakonParams>(s.params);
  EXPECT_EQ(p.preset, "two-peakon");
  EXPECT_EQ(p.count, 2);
  EXPECT_DOUBLE_EQ(p.alpha1, 1.0);
  EXPECT_EQ(s.output_directory(), fs::path("out") / "mini");
}

TEST(Scenario, NegativeAlphaNamesTheField)
{
  const auto problems = problems_of(std::string(kMinimal) + "[peakons]\nalpha1 = -1\n");
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_TRUE(mentions(problems, "peakons.alpha1")) << problems[0];
  EXPECT_TRUE(mentions(problems, "positive"));
}

TEST(Scenario, PresetAndExplicitDataConflict)
{
  const auto problems = problems_of(std::string(kMinimal) + "[peakons]\npreset = two-peakon\nQ = 0, 1\nP = 1, 1\n");
  EXPECT_TRUE(mentions(problems, "conflict"));
}

TEST(Scenario, UnknownKeysAndSectionsAreReported)
{
  const auto problems = problems_of(std::string(kMinimal) + "[peakons]\nalhpa1 = 2\n[extras]\nx = 1\n");
  EXPECT_TRUE(mentions(problems, "peakons.alhpa1: unknown key"));
  EXPECT_TRUE(mentions(problems, "[extras]"));
}

TEST(Scenario, SectionOfAnotherKindIsRejected)
{
  EXPECT_FALSE(problems_of(std::string(kMinimal) + "[field2d]\nnx = 32\n").empty());
}

TEST(Scenario, TypeMismatchesQuoteTheValue)
{
  const auto problems = problems_of(std::string(kMinimal) + "[peakons]\ncount = two\ndt = fast\n");
  EXPECT_TRUE(mentions(problems, "peakons.count: expected an integer, got 'two'"));
  EXPECT_TRUE(mentions(problems, "peakons.dt: expected a number, got 'fast'"));
}

TEST(Scenario, EveryProblemIsCollected)
{
  const auto problems = problems_of("[scenario]\nkind = euler2d\n[field2d]\nnx = 7\nny = 9\ndt = -1\nsigma = x\n");
  // name missing, nx and ny odd (nx also < 8), dt negative, sigma forbidden for euler2d
  EXPECT_GE(problems.size(), 5u);
  EXPECT_TRUE(mentions(problems, "scenario.name"));
  EXPECT_TRUE(mentions(problems, "field2d.nx"));
  EXPECT_TRUE(mentions(problems, "field2d.ny"));
  EXPECT_TRUE(mentions(problems, "field2d.dt"));
  EXPECT_TRUE(mentions(problems, "field2d.sigma"));
}

TEST(Scenario, ErrorMessageCountsProblems)
{
  try {
    parse_scenario("[scenario]\nkind = verify\n[verify]\nsuite = nothing\n", "f.ini");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("f.ini: 2 problems", 0), 0u) << e.what();
  }
}

TEST(Scenario, ConstantExpressionsAreAccepted)
{
  const auto s = parse_scenario("[scenario]\nname = e\nkind = euler2d\n[field2d]\nlx = 4*pi\nT = 1/8\n");
  const auto& p = std::get<Field2DParams>(s.params);
  EXPECT_DOUBLE_EQ(p.lx, 4 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(p.T, 0.125);
}

TEST(Scenario, SerializationRoundTripsEverySample)
{
  for (const auto& text : sample_scenarios()) {
    const auto once = serialize(parse_scenario(text));
    EXPECT_EQ(serialize(parse_scenario(once)), once) << text;
  }
}

TEST(Scenario, RoundTripPreservesExplicitData)
{
  const auto s = parse_scenario(std::string(kMinimal) + "[peakons]\nQ = -1, 1\nP = 0.5, -0.25\nT = 0.3\n");
  const auto back = parse_scenario(serialize(s));
  const auto& p = std::get<PeakonParams>(back.params);
  EXPECT_EQ(p.preset, "");
  EXPECT_EQ(p.Q, (std::vector<double>{-1, 1}));
  EXPECT_EQ(p.P, (std::vector<double>{0.5, -0.25}));
  EXPECT_DOUBLE_EQ(p.T, 0.3);
}

// ---- algebras -------------------------------------------------------------------

TEST(Algebra, BuiltinNames)
{
  EXPECT_EQ(load_group("abelian3").dim(), 3);
  EXPECT_EQ(load_group("so3").dim(), 3);
  EXPECT_THROW(load_group("abelian0"), ValidationError);
  EXPECT_THROW(load_group("su2"), ValidationError);
}

TEST(Algebra, FileMatchingSo3)
{
  const auto dir = scratch("algebra");
  put(dir / "so3.ini",
      "[algebra]\nname = so3-file\ndim = 3\nrep_dim = 3\n"
      "structure_constants = 0,0,0, 0,0,1, 0,-1,0,  0,0,-1, 0,0,0, 1,0,0,  0,1,0, -1,0,0, 0,0,0\n"
      "rep_basis = 0,0,0,0,0,-1,0,1,0,  0,0,1,0,0,0,-1,0,0,  0,-1,0,1,0,0,0,0,0\nad_invariant = true\n");
  const auto a = load_group("file:so3.ini", dir);
  EXPECT_EQ(a.dim(), 3);
  EXPECT_EQ(a.rep_dim(), 3);
  EXPECT_FALSE(a.is_abelian());
}

TEST(Algebra, JacobiViolationIsRejected)
{
  // [e1, e2] = e2, [e1, e3] = e2 + e3 satisfies Jacobi; swapping one sign on [e2, e3] does not.
  EXPECT_THROW(parse_algebra("[algebra]\ndim = 2\nrep_dim = 1\nstructure_constants = 0, 0, 0, 0, 0, 0, 0, 0\n"
                             "rep_basis = 1\n"),
               ValidationError);
  EXPECT_THROW(parse_algebra("[algebra]\ndim = 3\nrep_dim = 1\n"
                             "structure_constants = 0,0,0, 0,0,1, 0,1,0,  0,0,-1, 0,0,0, 1,0,0,  0,-1,0, -1,0,0, 0,0,0\n"
                             "rep_basis = 0, 0, 0\n"),
               ValidationError);
}

TEST(Algebra, MissingFileIsAValidationError)
{
  EXPECT_THROW(load_group("file:does_not_exist.ini", scratch("nofile")), ValidationError);
}

// ---- expressions ----------------------------------------------------------------

TEST(Expression, PrecedenceAndFunctions)
{
  EXPECT_DOUBLE_EQ(evaluate_constant("1 + 2*3"), 7.0);
  EXPECT_DOUBLE_EQ(evaluate_constant("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(evaluate_constant("-2^2"), -4.0);
  EXPECT_DOUBLE_EQ(evaluate_constant("(1 + 2)*3"), 9.0);
  EXPECT_DOUBLE_EQ(evaluate_constant("max(1, 4) + min(2, -3)"), 1.0);
  EXPECT_NEAR(evaluate_constant("cos(pi) + exp(0) + sech(0)"), 1.0, 1e-15);
  EXPECT_NEAR(evaluate_constant("atan2(1, 1)"), std::numbers::pi / 4, 1e-15);
  EXPECT_DOUBLE_EQ(evaluate_constant("1.5e-3*1e3"), 1.5);
}

TEST(Expression, Variables)
{
  const auto e = Expression::parse("sin(x)*L + y", {"x", "y", "L"});
  EXPECT_TRUE(e.uses_variables());
  const double v[3] = {std::numbers::pi / 2, 0.25, 2.0};
  EXPECT_DOUBLE_EQ(e(v), 2.25);
}

TEST(Expression, ErrorsGiveAColumn)
{
  for (const char* bad : {"1 +", "foo(1)", "(1", "2 ** 3", "sin(1, 2)", "x"}) {
    try {
      evaluate_constant(bad);
      ADD_FAILURE() << bad;
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find("column"), std::string::npos) << e.what();
    }
  }
}

// ---- CSV and plots --------------------------------------------------------------

TEST(Csv, NumbersRoundTripExactly)
{
  CsvTable t({"t", "v"});
  t.add_row({0.1, 1.0 / 3.0});
  t.add_row({-0.0, 1e-300});
  const auto back = parse_csv(t.str());
  ASSERT_FALSE(back.is_snapshot);
  ASSERT_EQ(back.table.size(), 2u);
  EXPECT_EQ(back.table.rows()[0][1], 1.0 / 3.0);
  EXPECT_EQ(back.table.rows()[1][1], 1e-300);
  EXPECT_EQ(format_number(-0.0), "0");
}

TEST(Csv, SnapshotLayout)
{
  Snapshot s{"w", 0.5, Eigen::ArrayXXd(3, 2)};
  s.values << 1, 2, 3, 4, 5, 6;
  const auto text = s.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "snapshot,w,3,2,0.5");
  const auto back = parse_csv(text);
  ASSERT_TRUE(back.is_snapshot);
  EXPECT_TRUE((back.snapshot.values == s.values).all());
  EXPECT_EQ(back.snapshot.t, 0.5);
}

TEST(Csv, EmptyAndMalformedInput)
{
  for (const char* text : {"", "t,H\n"}) {
    try {
      parse_csv(text, "e.csv");
      ADD_FAILURE();
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find("no data"), std::string::npos) << e.what();
    }
  }
  try {
    parse_csv("t,H\n0,1\n1,oops\n", "m.csv");
    ADD_FAILURE();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("m.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_csv("t,H\n0,1,2\n"), ValidationError);
}

TEST(Plot, LinePlotIsDeterministic)
{
  CsvTable t({"t", "a", "b"});
  for (int i = 0; i <= 20; ++i) t.add_row({0.1 * i, std::sin(0.1 * i), std::cos(0.1 * i)});
  const auto svg = line_plot(t, 0, {}, "demo");
  EXPECT_EQ(svg, line_plot(t, 0, {}, "demo"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find(">a<"), std::string::npos);
  EXPECT_NE(svg.find(">b<"), std::string::npos);
}

TEST(Plot, HeatmapEmbedsPng)
{
  Snapshot s{"varpi", 1.0, Eigen::ArrayXXd(16, 8)};
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 16; ++i) s.values(i, j) = std::sin(i * 0.4) * std::cos(j * 0.7);
  const auto svg = heatmap(s);
  EXPECT_NE(svg.find("data:image/png;base64,iVBORw0KGgo"), std::string::npos);
  EXPECT_EQ(svg, heatmap(s));
}

TEST(Plot, PlotFileRejectsEmptyCsv)
{
  const auto dir = scratch("plot");
  put(dir / "empty.csv", "t,H\n");
  EXPECT_THROW(plot_file(dir / "empty.csv"), ValidationError);
  EXPECT_FALSE(fs::exists(dir / "empty.svg"));
  put(dir / "ok.csv", "t,H\n0,1\n1,2\n");
  EXPECT_EQ(plot_file(dir / "ok.csv"), dir / "ok.svg");
  EXPECT_TRUE(fs::exists(dir / "ok.svg"));
}

// ---- output directory -----------------------------------------------------------

TEST(Output, WritesAllFiles)
{
  const auto dir = scratch("write") / "nested";
  const auto paths = write_atomically(dir, {{"a.csv", "1\n"}, {"b.csv", "2\n"}});
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(read_text(dir / "b.csv"), "2\n");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 2);
}

TEST(Output, UnwritableDirectoryLeavesNothing)
{
  const auto root = scratch("blocked");
  put(root / "file.txt", "x");
  EXPECT_THROW(write_atomically(root / "file.txt" / "sub", {{"a.csv", "1\n"}}), std::runtime_error);
  EXPECT_EQ(std::distance(fs::directory_iterator(root), fs::directory_iterator()), 1);
}

TEST(Output, FailedRenameRemovesTemporaries)
{
  const auto dir = scratch("collide");
  fs::create_directories(dir / "b.csv" / "occupied");  // a non-empty directory cannot be replaced by a file
  EXPECT_THROW(write_atomically(dir, {{"a.csv", "1\n"}, {"b.csv", "2\n"}}), std::exception);
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos);
}

// ---- runs -----------------------------------------------------------------------

TEST(Run, TwoPeakonColumns)
{
  auto s = parse_scenario(std::string(kMinimal) + "[output]\nstride = 100\n[peakons]\nT = 0.5\n");
  const auto out = execute(s);
  ASSERT_FALSE(out.files.empty());
  EXPECT_EQ(out.files[0].first, "trajectory.csv");
  const auto& text = out.files[0].second;
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,Q1,Q2,P1,P2,H");
  const auto table = parse_csv(text).table;
  EXPECT_EQ(table.size(), 6u);  // t = 0, 0.1, ..., 0.5
  EXPECT_EQ(table.rows()[0][1], -4.0);
  EXPECT_TRUE(out.report.passed());
}

TEST(Run, FilesAreDeterministic)
{
  const auto s = parse_scenario(sample_scenarios()[2]);
  EXPECT_EQ(execute(s).files, execute(s).files);
}

TEST(Run, EveryKindRunsAndWritesReport)
{
  for (const auto& text : sample_scenarios()) {
    const auto s = parse_scenario(text);
    const auto out = execute(s);
    bool has_report = false, has_ini = false;
    for (const auto& [name, body] : out.files) {
      has_report |= name == "report.csv";
      has_ini |= name == "scenario.ini";
    }
    EXPECT_TRUE(has_report && has_ini) << s.name;
    EXPECT_TRUE(out.report.passed()) << s.name << "\n" << out.report.text();
  }
}

TEST(Run, NonFiniteEnergyIsARunFailure)
{
  const auto s = parse_scenario(std::string(kMinimal) + "[peakons]\nQ = 0, 1\nP = 1e200, 1\nT = 0.1\n");
  try {
    execute(s);
    FAIL();
  } catch (const ValidationError&) {
    FAIL() << "reported as invalid input";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("not finite"), std::string::npos) << e.what();
  }
}

TEST(Run, ModuleValidationErrorsKeepTheirType)
{
  // 30 points passes the schema (even) but not the 1D grid (power of two).
  const auto s = parse_scenario("[scenario]\nname = odd\nkind = ch2\n[field1d]\npoints = 30\n");
  try {
    execute(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'odd'"), std::string::npos) << e.what();
  }
}

TEST(Report, NaNNeverPasses)
{
  EXPECT_FALSE(check_below("x", "q", std::nan(""), 1.0).pass());
  double acc = 0.0;
  track(acc, std::nan(""));
  track(acc, 1.0);
  EXPECT_TRUE(std::isnan(acc));
}

TEST(Report, CsvHasNoTiming)
{
  RunReport a{"r", 1.0, {check_below("AC1", "q", 0.5, 1.0), info("n", 3)}, {}};
  RunReport b = a;
  b.wall_seconds = 99.0;
  EXPECT_EQ(a.csv(), b.csv());
  EXPECT_EQ(a.csv(), "id,quantity,value,threshold,status\nAC1,q,0.5,<1,pass\n,n,3,,info\n");
}

TEST(Threads, ParallelForCoversEveryIndexAndRethrows)
{
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](int i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

// ---- exit codes -----------------------------------------------------------------

TEST(Exit, CodesFollowTheOutcome)
{
  const auto dir = scratch("exit");
  put(dir / "good.ini", std::string(kMinimal) + "[peakons]\nT = 0.2\n");
  put(dir / "invalid.ini", std::string(kMinimal) + "[peakons]\nalpha1 = -1\n");
  put(dir / "blowup.ini", std::string(kMinimal) + "[peakons]\nQ = 0, 1\nP = 1e200, 1\nT = 0.1\n");
  // dt far beyond stability: RK4 stays finite but energy is not conserved to 1e-8.
  put(dir / "drift.ini", std::string(kMinimal) + "[peakons]\ndt = 0.5\nT = 5\n");
  put(dir / "data.csv", "t,H\n0,1\n");

  EXPECT_EQ(run_cli("run " + (dir / "good.ini").string() + " --out " + (dir / "o1").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o1" / "trajectory.csv"));
  EXPECT_EQ(run_cli("run " + (dir / "invalid.ini").string() + " --out " + (dir / "o2").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "o2"));
  EXPECT_EQ(run_cli("run " + (dir / "blowup.ini").string() + " --out " + (dir / "o3").string()), 1);
  EXPECT_FALSE(fs::exists(dir / "o3"));
  EXPECT_EQ(run_cli("run " + (dir / "drift.ini").string() + " --out " + (dir / "o4").string()), 3);
  EXPECT_TRUE(fs::exists(dir / "o4" / "report.csv"));
  EXPECT_EQ(run_cli("run " + (dir / "good.ini").string() + " --out " + (dir / "data.csv" / "x").string()), 1);
  EXPECT_EQ(run_cli("verify nonsense"), 2);
  EXPECT_EQ(run_cli("verify cli"), 0);
  EXPECT_EQ(run_cli("plot " + (dir / "data.csv").string()), 0);
  EXPECT_EQ(run_cli("plot " + (dir / "missing.csv").string()), 2);
  EXPECT_EQ(run_cli("--bogus"), 2);
  EXPECT_EQ(run_cli(""), 2);
}

TEST(Exit, OverridesApply)
{
  const auto dir = scratch("override");
  put(dir / "s.ini", "[scenario]\nname = r\nkind = peakons\n[peakons]\ncount = 3\npreset = random\nT = 0.1\n");
  ASSERT_EQ(run_cli("run " + (dir / "s.ini").string() + " --out " + (dir / "a").string() + " --seed 5 --stride 7"), 0);
  const auto ini = parse_scenario(read_text(dir / "a" / "scenario.ini"));
  EXPECT_EQ(ini.seed, 5u);
  EXPECT_EQ(ini.output.stride, 7);
  EXPECT_EQ(run_cli("run " + (dir / "s.ini").string() + " --out " + (dir / "b").string() + " --stride 0"), 2);
}
