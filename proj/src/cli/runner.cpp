#include "epaut/cli/runner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "epaut/clebsch.hpp"
#include "epaut/cli/expression.hpp"
#include "epaut/cli/plot.hpp"
#include "epaut/cli/suites.hpp"
#include "epaut/epaut1d.hpp"
#include "epaut/epaut2d.hpp"
#include "epaut/singular.hpp"

namespace fs = std::filesystem;

namespace epaut::cli {

void parallel_for(int n, int threads, const std::function<void(int)>& f)
{
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double relative(double now, double ref) { return std::abs(now - ref) / std::max(std::abs(ref), 1e-300); }

void require_finite(double v, const char* what)
{
  if (!std::isfinite(v)) throw IntegrationError(std::string("initial ") + what + " is not finite", 0.0);
}

Diagnostic property(std::string quantity, double value, double threshold)
{
  return check_below("prop", std::move(quantity), value, threshold);
}

// Output accumulator honouring the requested formats.
struct Files
{
  const OutputSpec& spec;
  FileSet files;

  void csv(const std::string& name, std::string text)
  {
    if (spec.csv) files.emplace_back(name, std::move(text));
  }
  void svg(const std::string& name, const std::function<std::string()>& make)
  {
    if (spec.svg) files.emplace_back(name, make());
  }
  void table(const std::string& stem, const CsvTable& t, std::vector<int> ys = {}, const std::string& svg_stem = "")
  {
    csv(stem + ".csv", t.str());
    svg((svg_stem.empty() ? stem : svg_stem) + ".svg", [&] { return line_plot(t, 0, ys, stem); });
  }
  void snapshot(const Snapshot& s, bool with_svg = false)
  {
    csv(s.field + ".csv", s.str());
    if (with_svg) svg(s.field + ".svg", [&] { return heatmap(s); });
  }
};

std::vector<int> columns_with_prefix(const CsvTable& t, const std::string& prefix)
{
  std::vector<int> out;
  for (std::size_t c = 0; c < t.columns().size(); ++c)
    if (t.columns()[c].rfind(prefix, 0) == 0) out.push_back(static_cast<int>(c));
  return out;
}

std::string indexed(const std::string& base, int i, int c, int n)
{
  return n == 1 ? base + std::to_string(i + 1) : base + std::to_string(i + 1) + "_" + std::to_string(c + 1);
}

// ---- peakons -----------------------------------------------------------------

Eigen::MatrixXd reshape(const std::vector<double>& v, int rows, int cols)
{
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
  return m;
}

kernels::Kernel peakon_kernel(const std::string& kind, double alpha)
{
  return kind == "gaussian" ? kernels::gaussian_kernel(alpha) : kernels::helmholtz_green_line(alpha);
}

void run_peakons(const Scenario& sc, const PeakonParams& p, RunReport& rep, Files& out)
{
  const auto spec = load_group(p.group, sc.base_dir);
  const int N = p.count, n = p.space_dim, d = spec.dim();
  singular::MagneticPotential potential = singular::MagneticPotential::zero(n, d);
  if (p.potential == "constant") potential = singular::MagneticPotential::constant(reshape(p.potential_amplitude, n, d));
  if (p.potential == "sinusoidal") {
    const Eigen::MatrixXd phase = p.potential_phase.empty() ? Eigen::MatrixXd::Zero(n, d) : reshape(p.potential_phase, n, d);
    potential = singular::MagneticPotential::sinusoidal(reshape(p.potential_amplitude, n, d),
                                                        Eigen::Map<const Eigen::VectorXd>(p.potential_k.data(), n), phase);
  }
  const singular::PeakonModel model{peakon_kernel(p.kernel1, p.alpha1), peakon_kernel(p.kernel2, p.alpha2), potential, spec};

  auto s = singular::ParticleState::zeros(N, n, d);
  if (p.preset == "two-peakon") {
    s.Q << -4.0, 0.0;
    s.P << 2.0, 0.5;
  } else if (p.preset == "random") {
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < n; ++c) {
        s.Q(i, c) = 2.0 * i + 0.3 * u(rng);
        s.P(i, c) = u(rng);
      }
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < d; ++a) s.mu(i, a) = 0.5 * u(rng);
  } else {
    s.Q = reshape(p.Q, N, n);
    s.P = reshape(p.P, N, n);
    if (!p.mu.empty()) s.mu = reshape(p.mu, N, d);
  }
  if (p.reconstruct_theta) s = singular::with_identity_theta(s, spec);

  std::vector<std::string> cols{"t"};
  for (const char* base : {"Q", "P"})
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < n; ++c) cols.push_back(indexed(base, i, c, n));
  const bool moving_charges = !spec.is_abelian();
  if (moving_charges)
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < d; ++a) cols.push_back("mu" + std::to_string(i + 1) + "_" + std::to_string(a + 1));
  if (p.reconstruct_theta)
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < d; ++a) cols.push_back("J" + std::to_string(i + 1) + "_" + std::to_string(a + 1));
  cols.push_back("H");
  CsvTable table(cols);

  const double h0 = singular::collective_hamiltonian(s, model);
  require_finite(h0, "energy");
  const Eigen::VectorXd p0 = s.P.colwise().sum().transpose();
  const Eigen::MatrixXd j0 = p.reconstruct_theta ? singular::noether_charges(s, spec) : Eigen::MatrixXd();
  double dh = 0.0, dp = 0.0, dj = 0.0;
  singular::run(s, model, p.dt, p.T, sc.output.stride, {[&](double t, const singular::ParticleState& x) {
                  const double h = singular::collective_hamiltonian(x, model);
                  track(dh, relative(h, h0));
                  track(dp, (x.P.colwise().sum().transpose() - p0).cwiseAbs().maxCoeff());
                  std::vector<double> row{t};
                  for (const auto* m : {&x.Q, &x.P})
                    for (int i = 0; i < N; ++i)
                      for (int c = 0; c < n; ++c) row.push_back((*m)(i, c));
                  if (moving_charges)
                    for (int i = 0; i < N; ++i)
                      for (int a = 0; a < d; ++a) row.push_back(x.mu(i, a));
                  if (p.reconstruct_theta) {
                    const Eigen::MatrixXd j = singular::noether_charges(x, spec);
                    track(dj, (j - j0).cwiseAbs().maxCoeff());
                    for (int i = 0; i < N; ++i)
                      for (int a = 0; a < d; ++a) row.push_back(j(i, a));
                  }
                  row.push_back(h);
                  table.add_row(std::move(row));
                }});

  rep.diagnostics.push_back(check_below("AC4", "relative H drift", dh, 1e-8));
  if (p.potential == "zero") rep.diagnostics.push_back(check_below("AC4", "total momentum drift", dp, 1e-10));
  if (p.reconstruct_theta) rep.diagnostics.push_back(check_below("AC5", "max drift of Ad*_theta mu", dj, 1e-6));
  rep.diagnostics.push_back(info("samples", static_cast<double>(table.size())));

  out.csv("trajectory.csv", table.str());
  out.svg("positions.svg", [&] { return line_plot(table, 0, columns_with_prefix(table, "Q"), "positions"); });
  out.svg("energy.svg", [&] { return line_plot(table, 0, {table.column("H")}, "H"); });
}

// ---- 1D fields -----------------------------------------------------------------

Eigen::VectorXd sample_1d(const std::string& expr, const kernels::Grid1D& g)
{
  const auto e = Expression::parse(expr, {"x", "L"});
  Eigen::VectorXd f(g.points);
  for (int i = 0; i < g.points; ++i) {
    const double v[2] = {g.x(i), g.length};
    f[i] = e(v);
  }
  return f;
}

Eigen::VectorXd smooth_1d(std::mt19937_64& rng, const kernels::Grid1D& g, int kmax, double amp)
{
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(g.points);
  for (int k = 1; k <= kmax; ++k) {
    const double a = amp * std::exp(-k / 4.0) * nd(rng), b = amp * std::exp(-k / 4.0) * nd(rng);
    for (int i = 0; i < g.points; ++i) {
      const double x = 2 * kPi * k * g.x(i) / g.length;
      f[i] += a * std::cos(x) + b * std::sin(x);
    }
  }
  return f;
}

Snapshot snap_1d(const std::string& field, double t, const Eigen::VectorXd& v)
{
  return {field, t, Eigen::ArrayXXd(v.array())};
}

void run_field1d(const Scenario& sc, const Field1DParams& p, RunReport& rep, Files& out)
{
  const auto spec = load_group(p.group, sc.base_dir);
  const int d = spec.dim();
  const kernels::Grid1D g(p.length, p.points);
  Eigen::MatrixXd A;
  if (!p.A.empty()) {
    A.resize(g.points, d);
    for (int a = 0; a < d; ++a) A.col(a) = sample_1d(p.A[static_cast<std::size_t>(a)], g);
  }
  const epaut1d::Solver1D solver(g, spec, epaut1d::Model1D{p.alpha1, p.alpha2, A, kernels::ConvolutionMode::spectral});

  auto st = solver.zero_state();
  if (p.preset == "smooth") {
    std::mt19937_64 rng(sc.seed);
    st.m = smooth_1d(rng, g, 4, 0.5);
    for (int a = 0; a < d; ++a)
      st.sigma.col(a) = (d == 1 && spec.is_abelian()) ? Eigen::VectorXd(1.0 + smooth_1d(rng, g, 3, 0.2).array())
                                                      : smooth_1d(rng, g, 4, 0.5);
  } else if (p.preset == "peakon") {
    st.m = solver.mollified_delta(g.length / 4, 1.0);
  } else {
    st.m = sample_1d(p.m, g);
    for (std::size_t a = 0; a < p.sigma.size(); ++a) st.sigma.col(static_cast<Eigen::Index>(a)) = sample_1d(p.sigma[a], g);
  }

  std::optional<epaut1d::FlowMap1D> flow;
  if (p.markers > 0) {
    if (p.density == "sigma") {
      const Eigen::VectorXd s0 = st.sigma.col(0);
      if (s0.minCoeff() <= 0.0) throw ValidationError("field1d.density = sigma needs a positive charge density");
      flow = solver.identity_flow(p.markers, [&](double a) { return solver.interpolate(s0, Eigen::VectorXd::Constant(1, a))[0]; });
    } else {
      flow = solver.identity_flow(p.markers);
    }
  }

  const double h0 = solver.hamiltonian(st);
  require_finite(h0, "energy");
  const Eigen::VectorXd q0 = solver.total_charge(st);
  const auto samples = solver.run(st, p.dt, p.T, sc.output.stride, flow);

  std::vector<std::string> cols{"t", "H"};
  for (int a = 0; a < d; ++a) cols.push_back("charge" + std::to_string(a + 1));
  if (flow) cols.push_back("circulation");
  CsvTable series(cols);
  double dh = 0.0, dq = 0.0, dI = 0.0;
  const double i0 = flow ? solver.circulation(st, *flow) : 0.0;
  for (const auto& smp : samples) {
    const double h = solver.hamiltonian(smp.state);
    const Eigen::VectorXd q = solver.total_charge(smp.state);
    track(dh, relative(h, h0));
    track(dq, (q - q0).cwiseAbs().maxCoeff());
    std::vector<double> row{smp.t, h};
    for (int a = 0; a < d; ++a) row.push_back(q[a]);
    if (flow) {
      const double I = solver.circulation(smp.state, *smp.flow);
      track(dI, std::abs(I - i0));
      row.push_back(I);
    }
    series.add_row(std::move(row));
  }
  rep.diagnostics.push_back(property("relative H drift", dh, 1e-6));
  if (spec.is_abelian()) rep.diagnostics.push_back(property("total charge drift", dq, 1e-10));
  else rep.diagnostics.push_back(info("total charge change", dq));
  out.table("timeseries", series, {series.column("H")}, "energy");

  if (flow) {
    const auto kn = epaut1d::kelvin_noether_residual(solver, samples);
    CsvTable t({"t", "I", "dI_dt", "source", "residual"});
    double worst = 0.0, scale = 1.0;
    for (const auto& k : kn) {
      t.add_row({k.t, k.circulation, k.dI_dt, k.source, k.residual()});
      track(worst, k.residual());
      scale = std::max(scale, std::abs(k.circulation));
    }
    if (!kn.empty()) {
      rep.diagnostics.push_back(check_below("AC8", "|dI/dt - RHS| / max(|I|;1)", worst / scale, 1e-3));
      out.table("kelvin_noether", t, {t.column("dI_dt"), t.column("source")});
    }
    if (p.density == "sigma")
      rep.diagnostics.push_back(check_below("AC8", "circulation drift / max(|I|;1)", dI / std::max(std::abs(i0), 1.0), 1e-4));
  }

  const auto& first = samples.front();
  const auto& last = samples.back();
  out.snapshot(snap_1d("m_initial", first.t, first.state.m));
  out.snapshot(snap_1d("m_final", last.t, last.state.m), true);
  for (int a = 0; a < d; ++a) out.snapshot(snap_1d("sigma" + std::to_string(a + 1) + "_final", last.t, last.state.sigma.col(a)));
  out.snapshot(snap_1d("u_final", last.t, solver.velocities(last.state).u), true);
}

// ---- 2D fields ------------------------------------------------------------------

spectral::Field2D sample_2d(const std::string& expr, const epaut2d::Grid2D& g)
{
  const auto e = Expression::parse(expr, {"x", "y", "Lx", "Ly"});
  return g.sample([&](double x, double y) {
    const double v[4] = {x, y, g.lx, g.ly};
    return e(v);
  });
}

void run_field2d(const Scenario& sc, const Field2DParams& p, RunReport& rep, Files& out)
{
  const bool euler = sc.kind == Kind::euler2d;
  const auto spec = euler ? lie::LieAlgebraSpec::abelian(1) : load_group(p.group, sc.base_dir);
  const int d = spec.dim();
  const epaut2d::Grid2D g(p.lx, p.ly, p.nx, p.ny);
  const epaut2d::Solver2D solver(g, spec);

  auto st = solver.zero_state();
  if (p.preset == "random") {
    std::mt19937_64 rng(sc.seed);
    st.varpi = clebsch::band_limited(g, rng, p.kmax, p.amplitude);
    if (!euler)
      for (auto& f : st.sigma) f = clebsch::band_limited(g, rng, p.kmax, 0.5 * p.amplitude);
  } else {
    st.varpi = sample_2d(p.varpi, g);
    for (std::size_t a = 0; a < p.sigma.size(); ++a) st.sigma[a] = sample_2d(p.sigma[a], g);
    double removed = std::abs(st.varpi.mean());
    for (const auto& f : st.sigma) removed = std::max(removed, std::abs(f.mean()));
    st.varpi -= st.varpi.mean();
    for (auto& f : st.sigma) f -= f.mean();
    rep.diagnostics.push_back(info("mean removed from initial data", removed));
  }

  std::optional<epaut2d::MaterialLoop> loop;
  if (p.loop_radius > 0.0)
    loop = epaut2d::MaterialLoop::circle({p.loop_centre[0], p.loop_centre[1]}, p.loop_radius, p.loop_markers);

  std::vector<std::string> cols{"t", "energy", "enstrophy", "total_vorticity"};
  if (!euler) {
    for (int a = 0; a < d; ++a) cols.push_back("total_sigma" + std::to_string(a + 1));
    if (spec.is_abelian())
      for (int a = 0; a < d; ++a) cols.push_back("sigma_squares" + std::to_string(a + 1));
    else cols.push_back("gamma_norm");
  }
  if (loop) cols.push_back("circulation");
  CsvTable series(cols);

  const double e0 = solver.energy(st), z0 = solver.enstrophy(st);
  require_finite(e0 + z0, "energy");
  const auto c0 = solver.casimirs(st);
  const double i0 = loop ? solver.circulation(st, *loop) : 0.0;
  double de = 0.0, dz = 0.0, dsq = 0.0, dg = 0.0, worst_mean = 0.0, dI = 0.0;
  epaut2d::FieldState2D last = st;
  double t_last = 0.0;
  solver.run(st, p.dt, p.T, sc.output.stride, loop, [&](const epaut2d::Solver2D::Sample& smp) {
    const auto& x = smp.state;
    const double e = solver.energy(x), z = solver.enstrophy(x);
    const auto c = solver.casimirs(x);
    track(de, relative(e, e0));
    track(dz, relative(z, z0));
    track(worst_mean, std::abs(x.varpi.mean()));
    for (const auto& f : x.sigma) track(worst_mean, std::abs(f.mean()));
    std::vector<double> row{smp.t, e, z, c.total_vorticity};
    if (!euler) {
      for (int a = 0; a < d; ++a) row.push_back(c.total_sigma[a]);
      if (spec.is_abelian())
        for (int a = 0; a < d; ++a) {
          row.push_back(c.sigma_squares[a]);
          track(dsq, relative(c.sigma_squares[a], c0.sigma_squares[a]));
        }
      else {
        row.push_back(c.gamma_norm);
        track(dg, relative(c.gamma_norm, c0.gamma_norm));
      }
    }
    if (loop) {
      const double I = solver.circulation(x, *smp.loop);
      track(dI, std::abs(I - i0));
      row.push_back(I);
    }
    series.add_row(std::move(row));
    last = x;
    t_last = smp.t;
  }, false);

  rep.diagnostics.push_back(check_below("AC9", "relative energy drift", de, 1e-6));
  if (euler) rep.diagnostics.push_back(check_below("AC9", "relative enstrophy drift", dz, 1e-6));
  else if (spec.is_abelian()) rep.diagnostics.push_back(check_below("AC9", "relative sigma^2 drift", dsq, 1e-6));
  else rep.diagnostics.push_back(property("relative gamma-norm drift", dg, 1e-6));
  rep.diagnostics.push_back(property("max |mean| of any field", worst_mean, 1e-12));
  if (loop) {
    if (euler) rep.diagnostics.push_back(property("circulation drift / max(|I|;1)", dI / std::max(std::abs(i0), 1.0), 1e-3));
    else rep.diagnostics.push_back(info("circulation change", dI));
  }

  out.table("timeseries", series, {series.column("energy")}, "energy");
  out.snapshot({"varpi_initial", 0.0, st.varpi});
  out.snapshot({"varpi_final", t_last, last.varpi}, true);
  if (!euler)
    for (int a = 0; a < d; ++a)
      out.snapshot({"sigma" + std::to_string(a + 1) + "_final", t_last, last.sigma[static_cast<std::size_t>(a)]}, a == 0);
}

// ---- Clebsch ----------------------------------------------------------------------

void run_clebsch(const Scenario& sc, const ClebschParams& p, RunReport& rep, Files& out)
{
  const auto spec = load_group(p.group, sc.base_dir);
  const clebsch::ClebschSystem sys(epaut2d::Grid2D(2 * kPi, 2 * kPi, p.points, p.points), spec);
  clebsch::ClebschState s0;
  if (p.preset == "shear") s0 = clebsch::shear_seed(sys, sc.seed, p.kmax, p.amplitude, p.charge_amplitude);
  else if (p.preset == "random") s0 = clebsch::random_seed(sys, sc.seed, 2, p.kmax, p.amplitude);
  else s0 = clebsch::pure_gauge_seed(sys, sc.seed, p.kmax);

  CsvTable series({"t", "mismatch", "equivariance", "energy_clebsch", "energy_direct"});
  double mismatch = 0.0, equiv = 0.0;
  const auto r = sys.collective_evolve(s0, p.dt, p.T, sc.output.stride, [&](const clebsch::ConsistencyPoint& q) {
    series.add_row({q.t, q.mismatch, q.equivariance, q.energy_clebsch, q.energy_direct});
    track(mismatch, q.mismatch);
    track(equiv, q.equivariance);
  });
  for (const auto* s : std::array<const clebsch::ClebschState*, 2>{&s0, &r.final_state}) {
    track(equiv, sys.equivariance_residual(*s, clebsch::Symmetry::translation, 5, -3));
    track(equiv, sys.equivariance_residual(*s, clebsch::Symmetry::rotation90));
  }
  rep.diagnostics.push_back(check_below("AC10", "relative L2 mismatch", mismatch, 1e-3));
  rep.diagnostics.push_back(check_below("AC10", "equivariance residual", equiv, 1e-12));
  rep.diagnostics.push_back(property("theta defect at the end", sys.theta_defect(r.final_state), 1e-8));

  out.table("timeseries", series, {series.column("mismatch")}, "mismatch");
  out.snapshot({"varpi_clebsch_final", p.T, sys.j_right(r.final_state).varpi}, true);
  out.snapshot({"varpi_direct_final", p.T, r.final_direct.varpi}, true);
}

}  // namespace

RunOutput execute(const Scenario& s, int threads)
{
  const auto t0 = Clock::now();
  RunOutput result;
  result.report.name = s.name;
  Files out{s.output, {}};
  try {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, PeakonParams>) run_peakons(s, p, result.report, out);
          else if constexpr (std::is_same_v<T, Field1DParams>) run_field1d(s, p, result.report, out);
          else if constexpr (std::is_same_v<T, Field2DParams>) run_field2d(s, p, result.report, out);
          else if constexpr (std::is_same_v<T, ClebschParams>) run_clebsch(s, p, result.report, out);
          else {
            const auto v = verify(p.suite, threads);
            result.report.diagnostics = v.diagnostics;
          }
        },
        s.params);
  } catch (const ValidationError& e) {
    throw ValidationError("scenario '" + s.name + "': " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("scenario '" + s.name + "': " + e.what());
  }
  out.files.emplace_back("scenario.ini", serialize(s));
  out.files.emplace_back("report.csv", result.report.csv());
  result.files = std::move(out.files);
  result.report.wall_seconds = seconds_since(t0);
  return result;
}

RunReport run_scenario(const Scenario& s, int threads)
{
  auto r = execute(s, threads);
  for (const auto& p : write_atomically(s.output_directory(), r.files)) r.report.files.push_back(p.string());
  return r.report;
}

RunReport verify(const std::string& suite, int threads)
{
  const auto t0 = Clock::now();
  const auto ids = criteria_for(suite);
  std::vector<std::vector<Diagnostic>> parts(ids.size() + 1);
  parallel_for(static_cast<int>(ids.size()) + 1, threads, [&](int k) {
    if (k < static_cast<int>(ids.size())) parts[static_cast<std::size_t>(k)] = run_criterion(ids[static_cast<std::size_t>(k)]);
    else if (suite == "all" || suite == "cli") parts.back() = cli_self_checks();
  });
  RunReport r;
  r.name = "verify " + suite;
  for (auto& p : parts) r.diagnostics.insert(r.diagnostics.end(), p.begin(), p.end());
  r.wall_seconds = seconds_since(t0);
  return r;
}

const std::vector<std::string>& sample_scenarios()
{
  static const std::vector<std::string> samples = {
      "[scenario]\nname = two-peakon\nkind = peakons\n\n[peakons]\nT = 2\n",
      "[scenario]\nname = charged\nkind = peakons\nseed = 3\n[peakons]\ngroup = so3\ncount = 3\nspace_dim = 2\n"
      "preset = random\npotential = sinusoidal\npotential_amplitude = 0.3, 0, 0, 0, 0.2, 0\npotential_k = 1, 0.5\n"
      "reconstruct_theta = true\nT = 0.5\n",
      "[scenario]\nname = ch2-bump\nkind = ch2\n[output]\nformats = csv, svg\n[field1d]\npoints = 64\nT = 0.05\n"
      "m = 0\nsigma = 1 + 0.5*exp(-((x - pi)/0.5)^2)\nmarkers = 64\ndensity = sigma\n",
      "[scenario]\nname = mch2-so3\nkind = mch2\n[field1d]\ngroup = so3\npoints = 64\nalpha2 = 0.5\nT = 0.05\n"
      "A = 0.1*sin(x); 0; 0.2*cos(2*x)\n",
      "[scenario]\nname = euler\nkind = euler2d\n[output]\nstride = 5\n[field2d]\nnx = 32\nny = 32\nT = 0.05\n"
      "varpi = cos(x) + 0.5*sin(2*y)\nloop_radius = 1\n",
      "[scenario]\nname = rmhd\nkind = rmhd2d\n[field2d]\nnx = 32\nny = 32\nT = 0.05\namplitude = 1\n",
      "[scenario]\nname = clebsch\nkind = clebsch-check\n[clebsch]\npoints = 32\nT = 0.02\ncharge_amplitude = 0.2\n",
      "[scenario]\nname = verify-lie\nkind = verify\n[verify]\nsuite = lie\n",
  };
  return samples;
}

std::vector<Diagnostic> cli_self_checks()
{
  std::vector<Diagnostic> out;
  int unstable = 0, nondeterministic = 0;
  for (const auto& text : sample_scenarios()) {
    const auto once = serialize(parse_scenario(text));
    if (serialize(parse_scenario(once)) != once) ++unstable;
  }
  out.push_back(check_below("CLI", "non-idempotent schema round trips", unstable, 1));

  for (std::size_t k : {0u, 4u}) {
    const auto s = parse_scenario(sample_scenarios()[k]);
    const auto a = execute(s).files, b = execute(s).files;
    if (a != b) ++nondeterministic;
  }
  out.push_back(check_below("CLI", "runs with differing output bytes", nondeterministic, 1));

  std::size_t reported = 0;
  try {
    parse_scenario("[scenario]\nkind = peakons\n[peakons]\nalpha1 = -1\nbogus = 2\n");
  } catch (const ScenarioError& e) {
    reported = e.problems().size();
  }
  out.push_back(check_below("CLI", "problems missing from an aggregated report", std::abs(3.0 - static_cast<double>(reported)), 1));
  return out;
}

}  // namespace epaut::cli
