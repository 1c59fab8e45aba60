#pragma once

// Scenario files: flat INI sections with typed keys.
//
//   [scenario]  name, kind, seed
//   [output]    directory, stride, formats
//   one block matching the kind: [peakons], [field1d] (ch2, mch2),
//   [field2d] (euler2d, rmhd2d), [clebsch] (clebsch-check), [verify]
//
// Numeric values accept constant expressions ("2*pi"). Lists are comma
// separated; expression lists (one entry per algebra component) are separated
// by ';'. Every problem in a file is collected before anything is reported.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "epaut/errors.hpp"
#include "epaut/lie.hpp"

namespace epaut::cli {

/// All problems found in one scenario file.
class ScenarioError : public ValidationError
{
public:
  ScenarioError(std::string origin, std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  std::vector<std::string> problems_;
};

enum class Kind { peakons, ch2, mch2, euler2d, rmhd2d, clebsch_check, verify };

std::string to_string(Kind k);
std::optional<Kind> kind_from_string(std::string_view s);

struct OutputSpec
{
  std::string directory;  // empty: out/<name>
  int stride = 10;
  bool csv = true;
  bool svg = false;
};

struct PeakonParams
{
  std::string group = "abelian1";
  int count = 2;
  int space_dim = 1;
  std::string kernel1 = "helmholtz";  // helmholtz | gaussian
  double alpha1 = 1.0;
  std::string kernel2 = "helmholtz";
  double alpha2 = 1.0;
  double dt = 1e-3;
  double T = 10.0;
  std::string preset = "two-peakon";  // two-peakon | random | empty for explicit Q, P, mu
  std::vector<double> Q, P, mu;       // row-major per particle
  std::string potential = "zero";     // zero | constant | sinusoidal
  std::vector<double> potential_amplitude, potential_k, potential_phase;
  bool reconstruct_theta = false;
};

struct Field1DParams
{
  std::string group = "abelian1";
  double length = 6.283185307179586;
  int points = 256;
  double alpha1 = 1.0;
  double alpha2 = 0.0;
  double dt = 1e-3;
  double T = 1.0;
  std::string preset = "smooth";  // smooth | peakon | empty for expressions
  std::string m;
  std::vector<std::string> sigma;
  std::vector<std::string> A;  // potential, empty means zero
  int markers = 0;             // Lagrangian markers for the Kelvin-Noether diagnostic
  std::string density = "one"; // one | sigma (abelian only)
};

struct Field2DParams
{
  std::string group = "abelian1";
  double lx = 6.283185307179586;
  double ly = 6.283185307179586;
  int nx = 64;
  int ny = 64;
  double dt = 1e-3;
  double T = 1.0;
  std::string preset = "random";  // random | empty for expressions
  int kmax = 4;
  double amplitude = 2.0;
  std::string varpi;
  std::vector<std::string> sigma;
  double loop_radius = 0.0;  // 0 disables the material loop
  std::vector<double> loop_centre = {3.141592653589793, 3.141592653589793};
  int loop_markers = 128;
};

struct ClebschParams
{
  std::string group = "so3";
  int points = 64;
  double dt = 1e-3;
  double T = 0.5;
  std::string preset = "shear";  // shear | random | pure-gauge
  int kmax = 3;
  double amplitude = 0.5;
  double charge_amplitude = 0.0;
};

struct VerifyParams
{
  std::string suite = "all";
};

using ModuleParams = std::variant<PeakonParams, Field1DParams, Field2DParams, ClebschParams, VerifyParams>;

struct Scenario
{
  std::string name;
  Kind kind = Kind::peakons;
  std::uint64_t seed = 1;
  OutputSpec output;
  ModuleParams params;
  std::filesystem::path base_dir;  // resolves relative algebra files; not serialized

  std::filesystem::path output_directory() const;
};

Scenario parse_scenario(std::string_view text, const std::string& origin = "scenario",
                        const std::filesystem::path& base_dir = {});
Scenario parse_scenario_file(const std::filesystem::path& path);

/// Canonical text; parse(serialize(s)) reproduces s.
std::string serialize(const Scenario& s);

/// "abelianK", "so3" or "file:<path>" (an INI with an [algebra] section).
lie::LieAlgebraSpec load_group(const std::string& value, const std::filesystem::path& base_dir = {});
lie::LieAlgebraSpec parse_algebra(std::string_view text, const std::string& origin = "algebra");

/// Names accepted by verify.
const std::vector<std::string>& verify_suites();

}  // namespace epaut::cli
