#include "epaut/cli/scenario.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "epaut/cli/expression.hpp"
#include "epaut/cli/output.hpp"

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace epaut::cli {

namespace {

std::string join_problems(const std::string& origin, const std::vector<std::string>& problems)
{
  std::string s = origin + ": " + std::to_string(problems.size()) + " problem" + (problems.size() == 1 ? "" : "s");
  for (const auto& p : problems) s += "\n  " + p;
  return s;
}

}  // namespace

ScenarioError::ScenarioError(std::string origin, std::vector<std::string> problems)
  : ValidationError(join_problems(origin, problems)), problems_(std::move(problems))
{}

std::string to_string(Kind k)
{
  switch (k) {
    case Kind::peakons: return "peakons";
    case Kind::ch2: return "ch2";
    case Kind::mch2: return "mch2";
    case Kind::euler2d: return "euler2d";
    case Kind::rmhd2d: return "rmhd2d";
    case Kind::clebsch_check: return "clebsch-check";
    case Kind::verify: return "verify";
  }
  return "?";
}

std::optional<Kind> kind_from_string(std::string_view s)
{
  for (Kind k : {Kind::peakons, Kind::ch2, Kind::mch2, Kind::euler2d, Kind::rmhd2d, Kind::clebsch_check, Kind::verify})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

const std::vector<std::string>& verify_suites()
{
  static const std::vector<std::string> names = {"all",     "lie",     "kernels", "singular",
                                                  "epaut1d", "epaut2d", "clebsch", "cli"};
  return names;
}

fs::path Scenario::output_directory() const
{
  return output.directory.empty() ? fs::path("out") / name : fs::path(output.directory);
}

namespace {

std::vector<std::string> split_list(const std::string& s, const char* sep)
{
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::is_any_of(sep));
  for (auto& p : parts) boost::algorithm::trim(p);
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

// Typed access to one INI section; every key read is remembered so the
// leftovers can be reported as unknown.
class Section
{
public:
  Section(const pt::ptree* tree, std::string name, std::vector<std::string>& errors)
    : tree_(tree), name_(std::move(name)), errors_(errors)
  {}

  void error(const std::string& key, const std::string& what) { errors_.push_back(name_ + "." + key + ": " + what); }
  void note(const std::string& what) { errors_.push_back("[" + name_ + "] " + what); }

  std::optional<std::string> raw(const std::string& key)
  {
    known_.insert(key);
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return boost::algorithm::trim_copy(*v);
  }

  bool has(const std::string& key) { return raw(key).has_value(); }

  // Marks a key as recognized but not allowed here.
  void forbid(const std::string& key, const std::string& why)
  {
    if (raw(key)) error(key, why);
  }

  double number(const std::string& key, double def, const std::function<std::string(double)>& check = {})
  {
    const auto v = raw(key);
    if (!v) return def;
    double x = def;
    try {
      x = evaluate_constant(*v);
    } catch (const ValidationError&) {
      error(key, "expected a number, got '" + *v + "'");
      return def;
    }
    if (!std::isfinite(x)) {
      error(key, "must be finite (got '" + *v + "')");
      return def;
    }
    if (check) {
      const std::string problem = check(x);
      if (!problem.empty()) error(key, problem + " (got " + *v + ")");
    }
    return x;
  }

  int integer(const std::string& key, int def, int min)
  {
    const auto v = raw(key);
    if (!v) return def;
    int x = 0;
    const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
    if (ec != std::errc() || end != v->data() + v->size()) {
      error(key, "expected an integer, got '" + *v + "'");
      return def;
    }
    if (x < min) {
      error(key, "must be at least " + std::to_string(min) + " (got " + *v + ")");
      return def;
    }
    return x;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def)
  {
    const auto v = raw(key);
    if (!v) return def;
    std::uint64_t x = 0;
    const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
    if (ec != std::errc() || end != v->data() + v->size()) {
      error(key, "expected a non-negative integer, got '" + *v + "'");
      return def;
    }
    return x;
  }

  bool flag(const std::string& key, bool def)
  {
    const auto v = raw(key);
    if (!v) return def;
    const std::string s = boost::algorithm::to_lower_copy(*v);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    error(key, "expected true or false, got '" + *v + "'");
    return def;
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& options)
  {
    const auto v = raw(key);
    if (!v) return def;
    for (const auto& o : options)
      if (*v == o) return *v;
    error(key, "must be one of " + boost::algorithm::join(options, ", ") + " (got '" + *v + "')");
    return def;
  }

  std::string text(const std::string& key, const std::string& def)
  {
    const auto v = raw(key);
    return v ? *v : def;
  }

  std::vector<double> numbers(const std::string& key)
  {
    const auto v = raw(key);
    if (!v) return {};
    std::vector<double> out;
    for (const auto& part : split_list(*v, ",")) {
      try {
        out.push_back(evaluate_constant(part));
      } catch (const ValidationError&) {
        error(key, "expected a list of numbers, got '" + part + "'");
        return {};
      }
    }
    return out;
  }

  /// ';'-separated expressions in `vars`, each checked for syntax.
  std::vector<std::string> expressions(const std::string& key, const std::vector<std::string>& vars)
  {
    const auto v = raw(key);
    if (!v) return {};
    auto parts = split_list(*v, ";");
    for (const auto& p : parts) {
      try {
        Expression::parse(p, vars);
      } catch (const ValidationError& e) {
        error(key, e.what());
      }
    }
    return parts;
  }

  void finish()
  {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_)
      if (!known_.count(key)) error(key, "unknown key");
  }

  bool present() const { return tree_ != nullptr; }

private:
  const pt::ptree* tree_;
  std::string name_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

std::string positive(double x) { return x > 0.0 ? "" : "must be positive"; }
std::string non_negative(double x) { return x >= 0.0 ? "" : "must be non-negative"; }

// Loads the group for a module block; reports problems under `sec`.
std::optional<lie::LieAlgebraSpec> group_of(Section& sec, const std::string& value, const fs::path& base)
{
  try {
    return load_group(value, base);
  } catch (const ValidationError& e) {
    sec.error("group", e.what());
  }
  return std::nullopt;
}

PeakonParams read_peakons(Section& sec, const fs::path& base)
{
  PeakonParams p;
  p.group = sec.text("group", p.group);
  const auto spec = group_of(sec, p.group, base);
  p.count = sec.integer("count", p.count, 1);
  p.space_dim = sec.integer("space_dim", p.space_dim, 1);
  const std::vector<std::string> kernels = {"helmholtz", "gaussian"};
  p.kernel1 = sec.choice("kernel1", p.kernel1, kernels);
  p.alpha1 = sec.number("alpha1", p.alpha1, positive);
  p.kernel2 = sec.choice("kernel2", p.kernel2, kernels);
  p.alpha2 = sec.number("alpha2", p.alpha2, positive);
  p.dt = sec.number("dt", p.dt, positive);
  p.T = sec.number("T", p.T, non_negative);
  p.reconstruct_theta = sec.flag("reconstruct_theta", p.reconstruct_theta);

  const bool explicit_data = sec.has("Q") || sec.has("P") || sec.has("mu");
  const auto preset = sec.raw("preset");
  if (preset && explicit_data) sec.note("conflict: both preset and explicit initial data (Q, P, mu) are given");
  if (preset) p.preset = sec.choice("preset", "two-peakon", {"two-peakon", "random"});
  else p.preset = explicit_data ? "" : (p.count == 2 && p.space_dim == 1 ? "two-peakon" : "random");
  if (p.preset == "two-peakon" && (p.count != 2 || p.space_dim != 1))
    sec.error("preset", "two-peakon needs count = 2 and space_dim = 1");

  const int dim = spec ? spec->dim() : 0;
  p.Q = sec.numbers("Q");
  p.P = sec.numbers("P");
  p.mu = sec.numbers("mu");
  if (!preset && explicit_data) {
    const std::size_t n = static_cast<std::size_t>(p.count * p.space_dim);
    if (p.Q.size() != n) sec.error("Q", "needs count * space_dim = " + std::to_string(n) + " values");
    if (p.P.size() != n) sec.error("P", "needs count * space_dim = " + std::to_string(n) + " values");
    if (spec && !p.mu.empty() && p.mu.size() != static_cast<std::size_t>(p.count * dim))
      sec.error("mu", "needs count * dim = " + std::to_string(p.count * dim) + " values");
  }

  p.potential = sec.choice("potential", p.potential, {"zero", "constant", "sinusoidal"});
  p.potential_amplitude = sec.numbers("potential_amplitude");
  p.potential_k = sec.numbers("potential_k");
  p.potential_phase = sec.numbers("potential_phase");
  const std::size_t na = static_cast<std::size_t>(p.space_dim * dim);
  if (p.potential == "zero") {
    for (const char* k : {"potential_amplitude", "potential_k", "potential_phase"})
      if (sec.has(k)) sec.error(k, "not used with potential = zero");
  } else if (spec) {
    if (p.potential_amplitude.size() != na)
      sec.error("potential_amplitude", "needs space_dim * dim = " + std::to_string(na) + " values");
    if (p.potential == "sinusoidal") {
      if (p.potential_k.size() != static_cast<std::size_t>(p.space_dim))
        sec.error("potential_k", "needs space_dim values");
      if (!p.potential_phase.empty() && p.potential_phase.size() != na)
        sec.error("potential_phase", "needs space_dim * dim values");
    } else {
      for (const char* k : {"potential_k", "potential_phase"})
        if (sec.has(k)) sec.error(k, "only used with potential = sinusoidal");
    }
  }
  return p;
}

Field1DParams read_field1d(Section& sec, Kind kind, const fs::path& base)
{
  Field1DParams p;
  p.group = sec.text("group", p.group);
  const auto spec = group_of(sec, p.group, base);
  p.length = sec.number("length", p.length, positive);
  p.points = sec.integer("points", p.points, 8);
  p.alpha1 = sec.number("alpha1", p.alpha1, non_negative);
  if (kind == Kind::ch2) {
    p.alpha2 = sec.number("alpha2", 0.0, [](double a) {
      return a == 0.0 ? "" : "must be 0 for ch2 (use kind = mch2 for a smoothed charge)";
    });
  } else {
    p.alpha2 = sec.number("alpha2", 1.0, [](double a) { return a > 0.0 ? "" : "must be positive for mch2"; });
  }
  p.dt = sec.number("dt", p.dt, positive);
  p.T = sec.number("T", p.T, non_negative);

  const std::vector<std::string> vars = {"x", "L"};
  const bool explicit_data = sec.has("m") || sec.has("sigma");
  const auto preset = sec.raw("preset");
  if (preset && explicit_data) sec.note("conflict: both preset and expression initial data (m, sigma) are given");
  if (preset) p.preset = sec.choice("preset", "smooth", {"smooth", "peakon"});
  else p.preset = explicit_data ? "" : "smooth";
  p.m = sec.text("m", "");
  if (!p.m.empty()) {
    try {
      Expression::parse(p.m, vars);
    } catch (const ValidationError& e) {
      sec.error("m", e.what());
    }
  }
  if (!preset && explicit_data && p.m.empty()) sec.error("m", "required when sigma is given without a preset");
  p.sigma = sec.expressions("sigma", vars);
  p.A = sec.expressions("A", vars);
  if (spec) {
    const auto d = static_cast<std::size_t>(spec->dim());
    if (!p.sigma.empty() && p.sigma.size() != d) sec.error("sigma", "needs " + std::to_string(d) + " ';'-separated expressions");
    if (!p.A.empty() && p.A.size() != d) sec.error("A", "needs " + std::to_string(d) + " ';'-separated expressions");
  }
  p.markers = sec.integer("markers", p.markers, 0);
  if (p.markers > 0 && p.markers < 8) sec.error("markers", "must be 0 or at least 8");
  p.density = sec.choice("density", p.density, {"one", "sigma"});
  if (p.density == "sigma" && spec && !(spec->dim() == 1 && spec->is_abelian()))
    sec.error("density", "sigma as the advected density needs the abelian1 group");
  return p;
}

Field2DParams read_field2d(Section& sec, Kind kind, const fs::path& base)
{
  Field2DParams p;
  std::optional<lie::LieAlgebraSpec> spec;
  if (kind == Kind::euler2d) {
    sec.forbid("group", "not used by euler2d (no charges)");
    sec.forbid("sigma", "not used by euler2d (no charges)");
    spec = lie::LieAlgebraSpec::abelian(1);
  } else {
    p.group = sec.text("group", p.group);
    spec = group_of(sec, p.group, base);
  }
  p.lx = sec.number("lx", p.lx, positive);
  p.ly = sec.number("ly", p.ly, positive);
  auto even = [&](const char* key, int def) {
    const int n = sec.integer(key, def, 8);
    if (n % 2) sec.error(key, "must be even");
    return n;
  };
  p.nx = even("nx", p.nx);
  p.ny = even("ny", p.ny);
  p.dt = sec.number("dt", p.dt, positive);
  p.T = sec.number("T", p.T, non_negative);
  p.kmax = sec.integer("kmax", p.kmax, 1);
  p.amplitude = sec.number("amplitude", p.amplitude, non_negative);

  const std::vector<std::string> vars = {"x", "y", "Lx", "Ly"};
  const bool explicit_data = sec.has("varpi") || (kind != Kind::euler2d && sec.has("sigma"));
  const auto preset = sec.raw("preset");
  if (preset && explicit_data) sec.note("conflict: both preset and expression initial data (varpi, sigma) are given");
  if (preset) p.preset = sec.choice("preset", "random", {"random"});
  else p.preset = explicit_data ? "" : "random";
  p.varpi = sec.text("varpi", "");
  if (!p.varpi.empty()) {
    try {
      Expression::parse(p.varpi, vars);
    } catch (const ValidationError& e) {
      sec.error("varpi", e.what());
    }
  }
  if (!preset && explicit_data && p.varpi.empty()) sec.error("varpi", "required when sigma is given without a preset");
  if (kind != Kind::euler2d) {
    p.sigma = sec.expressions("sigma", vars);
    if (spec && !p.sigma.empty() && p.sigma.size() != static_cast<std::size_t>(spec->dim()))
      sec.error("sigma", "needs " + std::to_string(spec->dim()) + " ';'-separated expressions");
  }
  p.loop_radius = sec.number("loop_radius", p.loop_radius, non_negative);
  if (sec.has("loop_centre")) {
    p.loop_centre = sec.numbers("loop_centre");
    if (p.loop_centre.size() != 2) sec.error("loop_centre", "needs two values x, y");
  }
  p.loop_markers = sec.integer("loop_markers", p.loop_markers, 32);
  return p;
}

ClebschParams read_clebsch(Section& sec, const fs::path& base)
{
  ClebschParams p;
  p.group = sec.text("group", p.group);
  group_of(sec, p.group, base);
  p.points = sec.integer("points", p.points, 8);
  if (p.points % 2) sec.error("points", "must be even");
  p.dt = sec.number("dt", p.dt, positive);
  p.T = sec.number("T", p.T, non_negative);
  p.preset = sec.choice("preset", p.preset, {"shear", "random", "pure-gauge"});
  p.kmax = sec.integer("kmax", p.kmax, 1);
  p.amplitude = sec.number("amplitude", p.amplitude, non_negative);
  p.charge_amplitude = sec.number("charge_amplitude", p.charge_amplitude, non_negative);
  if (p.preset != "shear" && sec.has("charge_amplitude")) sec.error("charge_amplitude", "only used with preset = shear");
  return p;
}

const char* section_for(Kind k)
{
  switch (k) {
    case Kind::peakons: return "peakons";
    case Kind::ch2:
    case Kind::mch2: return "field1d";
    case Kind::euler2d:
    case Kind::rmhd2d: return "field2d";
    case Kind::clebsch_check: return "clebsch";
    case Kind::verify: return "verify";
  }
  return "";
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& origin, const fs::path& base_dir)
{
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(origin, {"line " + std::to_string(e.line()) + ": " + e.message()});
  }

  std::vector<std::string> errors;
  Scenario s;
  s.base_dir = base_dir;

  static const std::set<std::string> module_sections = {"peakons", "field1d", "field2d", "clebsch", "verify"};
  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty()) errors.push_back(name + ": key outside any section");
    else if (name != "scenario" && name != "output" && !module_sections.count(name))
      errors.push_back("[" + name + "]: unknown section");
  }

  Section head(tree.get_child_optional("scenario").get_ptr(), "scenario", errors);
  if (!head.present()) errors.push_back("[scenario]: missing section");
  const auto name = head.raw("name");
  if (!name || name->empty()) head.error("name", "missing required field");
  else if (name->find_first_of("/\\") != std::string::npos) head.error("name", "must not contain path separators");
  else s.name = *name;
  const auto kind = head.raw("kind");
  std::optional<Kind> k;
  if (!kind) head.error("kind", "missing required field");
  else if (!(k = kind_from_string(*kind)))
    head.error("kind", "must be one of peakons, ch2, mch2, euler2d, rmhd2d, clebsch-check, verify (got '" + *kind + "')");
  s.seed = head.unsigned_integer("seed", s.seed);
  head.finish();

  Section out(tree.get_child_optional("output").get_ptr(), "output", errors);
  s.output.directory = out.text("directory", "");
  s.output.stride = out.integer("stride", s.output.stride, 1);
  if (const auto f = out.raw("formats")) {
    s.output.csv = s.output.svg = false;
    for (const auto& fmt : split_list(*f, ",")) {
      if (fmt == "csv") s.output.csv = true;
      else if (fmt == "svg") s.output.svg = true;
      else out.error("formats", "unknown format '" + fmt + "' (csv, svg)");
    }
    if (!s.output.csv && !s.output.svg) out.error("formats", "needs at least one of csv, svg");
  }
  out.finish();

  if (k) {
    s.kind = *k;
    const std::string own = section_for(*k);
    for (const auto& m : module_sections)
      if (m != own && tree.get_child_optional(m)) errors.push_back("[" + m + "]: not used by kind " + to_string(*k));
    Section sec(tree.get_child_optional(own).get_ptr(), own, errors);
    switch (*k) {
      case Kind::peakons: s.params = read_peakons(sec, base_dir); break;
      case Kind::ch2:
      case Kind::mch2: s.params = read_field1d(sec, *k, base_dir); break;
      case Kind::euler2d:
      case Kind::rmhd2d: s.params = read_field2d(sec, *k, base_dir); break;
      case Kind::clebsch_check: s.params = read_clebsch(sec, base_dir); break;
      case Kind::verify: s.params = VerifyParams{sec.choice("suite", "all", verify_suites())}; break;
    }
    sec.finish();
  }

  if (!errors.empty()) throw ScenarioError(origin, std::move(errors));
  return s;
}

Scenario parse_scenario_file(const fs::path& path)
{
  std::string text;
  try {
    text = read_text(path);
  } catch (const ValidationError&) {
    throw ScenarioError(path.string(), {"cannot read file"});
  }
  return parse_scenario(text, path.string(), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

namespace {

class Writer
{
public:
  void section(const std::string& name)
  {
    if (!out_.empty()) out_ += "\n";
    out_ += "[" + name + "]\n";
  }
  void put(const std::string& key, const std::string& value) { out_ += key + " = " + value + "\n"; }
  void num(const std::string& key, double v) { put(key, format_number(v)); }
  void integer(const std::string& key, long long v) { put(key, std::to_string(v)); }
  void flag(const std::string& key, bool v) { put(key, v ? "true" : "false"); }
  void list(const std::string& key, const std::vector<double>& v)
  {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(format_number(x));
    put(key, boost::algorithm::join(parts, ", "));
  }
  void exprs(const std::string& key, const std::vector<std::string>& v)
  {
    if (!v.empty()) put(key, boost::algorithm::join(v, "; "));
  }
  std::string str() const { return out_; }

private:
  std::string out_;
};

}  // namespace

std::string serialize(const Scenario& s)
{
  Writer w;
  w.section("scenario");
  w.put("name", s.name);
  w.put("kind", to_string(s.kind));
  w.put("seed", std::to_string(s.seed));

  w.section("output");
  if (!s.output.directory.empty()) w.put("directory", s.output.directory);
  w.integer("stride", s.output.stride);
  std::vector<std::string> formats;
  if (s.output.csv) formats.push_back("csv");
  if (s.output.svg) formats.push_back("svg");
  w.put("formats", boost::algorithm::join(formats, ", "));

  w.section(section_for(s.kind));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PeakonParams>) {
          w.put("group", p.group);
          w.integer("count", p.count);
          w.integer("space_dim", p.space_dim);
          w.put("kernel1", p.kernel1);
          w.num("alpha1", p.alpha1);
          w.put("kernel2", p.kernel2);
          w.num("alpha2", p.alpha2);
          w.num("dt", p.dt);
          w.num("T", p.T);
          if (!p.preset.empty()) w.put("preset", p.preset);
          else {
            w.list("Q", p.Q);
            w.list("P", p.P);
            if (!p.mu.empty()) w.list("mu", p.mu);
          }
          w.put("potential", p.potential);
          if (p.potential != "zero") w.list("potential_amplitude", p.potential_amplitude);
          if (p.potential == "sinusoidal") {
            w.list("potential_k", p.potential_k);
            if (!p.potential_phase.empty()) w.list("potential_phase", p.potential_phase);
          }
          w.flag("reconstruct_theta", p.reconstruct_theta);
        } else if constexpr (std::is_same_v<T, Field1DParams>) {
          w.put("group", p.group);
          w.num("length", p.length);
          w.integer("points", p.points);
          w.num("alpha1", p.alpha1);
          w.num("alpha2", p.alpha2);
          w.num("dt", p.dt);
          w.num("T", p.T);
          if (!p.preset.empty()) w.put("preset", p.preset);
          else {
            w.put("m", p.m);
            w.exprs("sigma", p.sigma);
          }
          w.exprs("A", p.A);
          w.integer("markers", p.markers);
          w.put("density", p.density);
        } else if constexpr (std::is_same_v<T, Field2DParams>) {
          if (s.kind != Kind::euler2d) w.put("group", p.group);
          w.num("lx", p.lx);
          w.num("ly", p.ly);
          w.integer("nx", p.nx);
          w.integer("ny", p.ny);
          w.num("dt", p.dt);
          w.num("T", p.T);
          w.integer("kmax", p.kmax);
          w.num("amplitude", p.amplitude);
          if (!p.preset.empty()) w.put("preset", p.preset);
          else {
            w.put("varpi", p.varpi);
            if (s.kind != Kind::euler2d) w.exprs("sigma", p.sigma);
          }
          w.num("loop_radius", p.loop_radius);
          w.list("loop_centre", p.loop_centre);
          w.integer("loop_markers", p.loop_markers);
        } else if constexpr (std::is_same_v<T, ClebschParams>) {
          w.put("group", p.group);
          w.integer("points", p.points);
          w.num("dt", p.dt);
          w.num("T", p.T);
          w.put("preset", p.preset);
          w.integer("kmax", p.kmax);
          w.num("amplitude", p.amplitude);
          if (p.preset == "shear") w.num("charge_amplitude", p.charge_amplitude);
        } else {
          w.put("suite", p.suite);
        }
      },
      s.params);
  return w.str();
}

lie::LieAlgebraSpec parse_algebra(std::string_view text, const std::string& origin)
{
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(origin, {"line " + std::to_string(e.line()) + ": " + e.message()});
  }
  std::vector<std::string> errors;
  for (const auto& [name, child] : tree)
    if (name != "algebra") errors.push_back("[" + name + "]: unknown section");
  Section sec(tree.get_child_optional("algebra").get_ptr(), "algebra", errors);
  if (!sec.present()) throw ScenarioError(origin, {"[algebra]: missing section"});

  const std::string name = sec.text("name", "custom");
  const int dim = sec.integer("dim", 0, 1);
  const int rep = sec.integer("rep_dim", 0, 1);
  if (!sec.has("dim")) sec.error("dim", "missing required field");
  if (!sec.has("rep_dim")) sec.error("rep_dim", "missing required field");
  const auto c = sec.numbers("structure_constants");
  const auto g = sec.numbers("gamma");
  const auto basis = sec.numbers("rep_basis");
  const bool ad_invariant = sec.flag("ad_invariant", false);
  sec.finish();
  if (dim > 0 && rep > 0) {
    if (c.size() != static_cast<std::size_t>(dim * dim * dim))
      sec.error("structure_constants", "needs dim^3 = " + std::to_string(dim * dim * dim) + " values");
    if (!g.empty() && g.size() != static_cast<std::size_t>(dim * dim))
      sec.error("gamma", "needs dim^2 = " + std::to_string(dim * dim) + " values");
    if (basis.size() != static_cast<std::size_t>(dim * rep * rep))
      sec.error("rep_basis", "needs dim * rep_dim^2 = " + std::to_string(dim * rep * rep) + " values");
  }
  if (!errors.empty()) throw ScenarioError(origin, std::move(errors));

  Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(dim, dim);
  if (!g.empty())
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) gamma(i, j) = g[static_cast<std::size_t>(i * dim + j)];
  std::vector<Eigen::MatrixXd> mats(static_cast<std::size_t>(dim), Eigen::MatrixXd(rep, rep));
  for (int a = 0; a < dim; ++a)
    for (int i = 0; i < rep; ++i)
      for (int j = 0; j < rep; ++j) mats[static_cast<std::size_t>(a)](i, j) = basis[static_cast<std::size_t>((a * rep + i) * rep + j)];

  std::optional<lie::LieAlgebraSpec> spec;
  try {
    spec.emplace(dim, c, gamma, rep, mats, ad_invariant, name);
  } catch (const ValidationError& e) {
    throw ScenarioError(origin, {e.what()});
  }
  const auto r = lie::validate(*spec);
  constexpr double tol = 1e-12;
  if (r.antisymmetry > tol) errors.push_back("structure constants are not antisymmetric");
  if (r.jacobi > tol) errors.push_back("structure constants violate the Jacobi identity");
  if (r.gamma_symmetry > tol) errors.push_back("gamma is not symmetric");
  if (r.ad_invariance > tol) errors.push_back("gamma is not Ad-invariant although ad_invariant = true");
  if (r.rep_commutator > tol) errors.push_back("rep_basis commutators do not match the structure constants");
  if (!errors.empty()) throw ScenarioError(origin, std::move(errors));
  return *spec;
}

lie::LieAlgebraSpec load_group(const std::string& value, const fs::path& base_dir)
{
  if (value == "so3") return lie::LieAlgebraSpec::so3();
  if (value.rfind("abelian", 0) == 0) {
    int k = 0;
    const char* first = value.data() + 7;
    const auto [end, ec] = std::from_chars(first, value.data() + value.size(), k);
    if (ec == std::errc() && end == value.data() + value.size() && k >= 1 && k <= 16) return lie::LieAlgebraSpec::abelian(k);
  }
  if (value.rfind("file:", 0) == 0) {
    fs::path p = value.substr(5);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    std::string text;
    try {
      text = read_text(p);
    } catch (const ValidationError&) {
      throw ValidationError("cannot read algebra file " + p.string());
    }
    return parse_algebra(text, p.string());
  }
  throw ValidationError("unknown group '" + value + "' (abelianK with 1 <= K <= 16, so3, or file:<path>)");
}

}  // namespace epaut::cli
