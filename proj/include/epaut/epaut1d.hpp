#pragma once

// Periodic 1D solver for the compressible Lie-Poisson system in (m, sigma):
//
//   u  = G1 * (m - sigma.A),    nu = G2 * gamma^{-1} sigma - A u,
//   m_t     = -(u m_x + 2 u_x m) - <sigma, nu_x>,
//   sigma_t = -(u sigma)_x - ad*_nu sigma,
//
// with m a one-form density and sigma a coalgebra-valued density. alpha2 = 0
// selects the Dirac kernel for G2 (two-component CH); alpha2 > 0 gives MCH2.
//
// Also: the same evolution written in curvature variables (M = m - sigma.A,
// omega = nu + A u), Lagrangian markers for the Kelvin-Noether circulation,
// and mollified deltas for comparisons against peakons.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "lie.hpp"
#include "spectral.hpp"

namespace epaut::epaut1d {

using kernels::ConvolutionMode;
using kernels::Grid1D;
using lie::LieAlgebraSpec;

struct FieldState1D
{
  Eigen::VectorXd m;      // N
  Eigen::MatrixXd sigma;  // N x dim
};

struct Model1D
{
  double alpha1 = 1.0;
  double alpha2 = 0.0;
  Eigen::MatrixXd A;  // N x dim samples of the potential; empty means zero
  ConvolutionMode green_mode = ConvolutionMode::spectral;
};

struct Velocities
{
  Eigen::VectorXd u;
  Eigen::MatrixXd nu;
};

/// Lagrangian markers eta(a) (unwrapped, eta(a + L) = eta(a) + L) with their
/// Jacobian d eta / d a; the advected density is rho0 / jac.
struct FlowMap1D
{
  Eigen::VectorXd labels;
  Eigen::VectorXd eta;
  Eigen::VectorXd jac;
  Eigen::VectorXd rho0;

  Eigen::VectorXd rho() const { return rho0.cwiseQuotient(jac); }
  double spacing(double length) const { return length / static_cast<double>(labels.size()); }
};

namespace detail {
using Vec = Eigen::VectorXd;
inline std::span<const double> view(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }
}  // namespace detail

class Solver1D
{
public:
  Solver1D(Grid1D grid, LieAlgebraSpec spec, Model1D model)
    : grid_(grid), spec_(std::move(spec)), model_(std::move(model)), t_(grid_.points, grid_.length)
  {
    if (model_.alpha1 < 0.0 || model_.alpha2 < 0.0) throw ValidationError("epaut1d: alpha must be non-negative");
    if (model_.A.size() == 0) model_.A = Eigen::MatrixXd::Zero(grid_.points, spec_.dim());
    if (model_.A.rows() != grid_.points || model_.A.cols() != spec_.dim())
      throw ValidationError("epaut1d: potential must be sampled as N x dim");
    if (!model_.A.allFinite()) throw ValidationError("epaut1d: potential has non-finite samples");
    sym1_ = symbol_table(model_.alpha1);
    sym2_ = symbol_table(model_.alpha2);
  }

  const Grid1D& grid() const noexcept { return grid_; }
  const LieAlgebraSpec& spec() const noexcept { return spec_; }
  const Model1D& model() const noexcept { return model_; }
  const spectral::Transform1D& transform() const noexcept { return t_; }
  double dx() const { return grid_.dx(); }

  FieldState1D zero_state() const
  {
    return {Eigen::VectorXd::Zero(grid_.points), Eigen::MatrixXd::Zero(grid_.points, spec_.dim())};
  }

  void check(const FieldState1D& s) const
  {
    if (s.m.size() != grid_.points || s.sigma.rows() != grid_.points || s.sigma.cols() != spec_.dim())
      throw ValidationError("epaut1d: state shape does not match grid (" + std::to_string(grid_.points) +
                            ") and algebra (" + std::to_string(spec_.dim()) + ")");
  }

  Eigen::VectorXd convolve1(const Eigen::VectorXd& f) const { return apply_table(sym1_, f); }
  Eigen::VectorXd convolve2(const Eigen::VectorXd& f) const { return apply_table(sym2_, f); }
  Eigen::VectorXd derivative(const Eigen::VectorXd& f) const { return detail::to_vec(t_.derivative(detail::view(f))); }
  Eigen::VectorXd dealias(const Eigen::VectorXd& f) const { return detail::to_vec(t_.dealias(detail::view(f))); }

  /// sigma . A pointwise.
  Eigen::VectorXd contract_potential(const Eigen::MatrixXd& sigma) const
  {
    return (sigma.array() * model_.A.array()).rowwise().sum();
  }

  /// G2 * gamma^{-1} sigma, column by column.
  Eigen::MatrixXd raise(const Eigen::MatrixXd& sigma) const
  {
    const Eigen::MatrixXd g = sigma * spec_.gamma_inv();
    Eigen::MatrixXd out(g.rows(), g.cols());
    for (int b = 0; b < g.cols(); ++b) out.col(b) = convolve2(g.col(b));
    return out;
  }

  Velocities velocities(const FieldState1D& s) const
  {
    check(s);
    Velocities v;
    v.u = convolve1(s.m - contract_potential(s.sigma));
    v.nu = raise(s.sigma) - (model_.A.array().colwise() * v.u.array()).matrix();
    return v;
  }

  FieldState1D rhs(const FieldState1D& s) const
  {
    const auto v = velocities(s);
    const int n = grid_.points, d = spec_.dim();
    const Eigen::VectorXd ux = derivative(v.u);
    const Eigen::VectorXd mx = derivative(s.m);
    Eigen::VectorXd mt = -(v.u.array() * mx.array() + 2.0 * ux.array() * s.m.array()).matrix();
    Eigen::MatrixXd nux(n, d), st(n, d);
    for (int b = 0; b < d; ++b) {
      nux.col(b) = derivative(v.nu.col(b));
      st.col(b) = -derivative(v.u.cwiseProduct(s.sigma.col(b)));
    }
    mt -= (s.sigma.array() * nux.array()).rowwise().sum().matrix();
    if (!spec_.is_abelian()) st -= ad_star_field(v.nu, s.sigma);
    return filtered({mt, st});
  }

  /// The same vector field computed through the curvature variables
  /// M = m - sigma.A and omega = nu + A u = G2 * gamma^{-1} sigma.
  FieldState1D rhs_curvature(const FieldState1D& s) const
  {
    check(s);
    const int n = grid_.points, d = spec_.dim();
    const Eigen::VectorXd big_m = s.m - contract_potential(s.sigma);
    const Eigen::VectorXd u = convolve1(big_m);
    const Eigen::MatrixXd omega = raise(s.sigma);
    const Eigen::VectorXd ux = derivative(u);
    Eigen::VectorXd mt = -(u.array() * derivative(big_m).array() + 2.0 * ux.array() * big_m.array()).matrix();
    Eigen::MatrixXd domega(n, d);
    for (int b = 0; b < d; ++b) domega.col(b) = derivative(omega.col(b));
    if (!spec_.is_abelian()) domega += bracket_field(model_.A, omega);
    mt -= (s.sigma.array() * domega.array()).rowwise().sum().matrix();

    const Eigen::MatrixXd nu = omega - (model_.A.array().colwise() * u.array()).matrix();
    Eigen::MatrixXd st(n, d);
    for (int b = 0; b < d; ++b) st.col(b) = -derivative(u.cwiseProduct(s.sigma.col(b)));
    if (!spec_.is_abelian()) st -= ad_star_field(nu, s.sigma);
    mt += contract_potential(st);
    return filtered({mt, st});
  }

  double hamiltonian(const FieldState1D& s) const
  {
    check(s);
    const Eigen::VectorXd big_m = s.m - contract_potential(s.sigma);
    const double kinetic = big_m.dot(convolve1(big_m));
    const double charge = (s.sigma.array() * raise(s.sigma).array()).sum();
    return 0.5 * dx() * (kinetic + charge);
  }

  /// dx * sum sigma, one entry per algebra component.
  Eigen::VectorXd total_charge(const FieldState1D& s) const
  {
    check(s);
    return dx() * s.sigma.colwise().sum().transpose();
  }

  /// dx * sum over the grid of ad*_nu sigma.
  Eigen::VectorXd total_coadjoint_source(const FieldState1D& s) const
  {
    const auto v = velocities(s);
    return dx() * ad_star_field(v.nu, s.sigma).colwise().sum().transpose();
  }

  double max_speed(const FieldState1D& s) const { return velocities(s).u.cwiseAbs().maxCoeff(); }

  /// Largest dt allowed by the CFL guard dt <= 0.5 dx / max|u|.
  double cfl_limit(const FieldState1D& s) const
  {
    const double c = max_speed(s);
    return c > 0.0 ? 0.5 * dx() / c : std::numeric_limits<double>::infinity();
  }

  // ---- Lagrangian markers --------------------------------------------------

  /// Identity flow map with `markers` equally spaced labels and initial density rho0(label).
  FlowMap1D identity_flow(int markers, const std::function<double(double)>& rho0 = {}) const
  {
    if (markers < 8) throw ValidationError("epaut1d: need at least 8 markers");
    FlowMap1D f;
    f.labels.resize(markers);
    for (int i = 0; i < markers; ++i) f.labels[i] = grid_.length * i / markers;
    f.eta = f.labels;
    f.jac = Eigen::VectorXd::Ones(markers);
    f.rho0 = Eigen::VectorXd::Ones(markers);
    if (rho0)
      for (int i = 0; i < markers; ++i) f.rho0[i] = rho0(f.labels[i]);
    if ((f.rho0.array() <= 0.0).any()) throw ValidationError("epaut1d: marker density must be positive");
    return f;
  }

  /// Trigonometric interpolant of grid data f at arbitrary points.
  Eigen::VectorXd interpolate(const Eigen::VectorXd& f, const Eigen::VectorXd& points) const
  {
    const auto c = t_.forward(detail::view(f));
    return evaluate_spectrum(c, points);
  }

  /// Circulation I = int (m / rho)(eta) eta_a da.
  double circulation(const FieldState1D& s, const FlowMap1D& f) const
  {
    check(s);
    const Eigen::VectorXd m_eta = interpolate(s.m, f.eta);
    return f.spacing(grid_.length) * (m_eta.array() * f.jac.array().square() / f.rho0.array()).sum();
  }

  /// Source term -int (<sigma, nu_x> / rho)(eta) eta_a da of the circulation.
  double circulation_source(const FieldState1D& s, const FlowMap1D& f) const
  {
    const auto v = velocities(s);
    Eigen::VectorXd src = Eigen::VectorXd::Zero(grid_.points);
    for (int b = 0; b < spec_.dim(); ++b) src += s.sigma.col(b).cwiseProduct(derivative(v.nu.col(b)));
    const Eigen::VectorXd src_eta = interpolate(src, f.eta);
    return -f.spacing(grid_.length) * (src_eta.array() * f.jac.array().square() / f.rho0.array()).sum();
  }

  // ---- time stepping -------------------------------------------------------

  /// One RK4 step; markers, when given, ride along with the same stages.
  FieldState1D step(const FieldState1D& s, double dt, FlowMap1D* flow = nullptr, double t = 0.0) const
  {
    if (!(dt > 0.0)) throw ValidationError("epaut1d: dt must be positive");
    if (dt > cfl_limit(s))
      throw IntegrationError("epaut1d: CFL violation, dt = " + std::to_string(dt) + " exceeds " +
                                 std::to_string(cfl_limit(s)),
                             t);
    struct Stage
    {
      FieldState1D d;
      Eigen::VectorXd deta, djac;
    };
    auto eval = [&](const FieldState1D& x, const Eigen::VectorXd& eta, const Eigen::VectorXd& jac) {
      Stage st{rhs(x), {}, {}};
      if (flow) {
        const Eigen::VectorXd u = convolve1(x.m - contract_potential(x.sigma));
        const auto cu = t_.forward(detail::view(u));
        const auto cux = t_.forward(detail::view(derivative(u)));
        st.deta = evaluate_spectrum(cu, eta);
        st.djac = evaluate_spectrum(cux, eta).cwiseProduct(jac);
      }
      return st;
    };
    auto add = [](const FieldState1D& x, double a, const FieldState1D& y) {
      return FieldState1D{x.m + a * y.m, x.sigma + a * y.sigma};
    };
    const Eigen::VectorXd e0 = flow ? flow->eta : Eigen::VectorXd();
    const Eigen::VectorXd j0 = flow ? flow->jac : Eigen::VectorXd();
    auto shift = [&](const Eigen::VectorXd& base, double a, const Eigen::VectorXd& d) {
      return flow ? Eigen::VectorXd(base + a * d) : base;
    };
    const auto k1 = eval(s, e0, j0);
    const auto k2 = eval(add(s, 0.5 * dt, k1.d), shift(e0, 0.5 * dt, k1.deta), shift(j0, 0.5 * dt, k1.djac));
    const auto k3 = eval(add(s, 0.5 * dt, k2.d), shift(e0, 0.5 * dt, k2.deta), shift(j0, 0.5 * dt, k2.djac));
    const auto k4 = eval(add(s, dt, k3.d), shift(e0, dt, k3.deta), shift(j0, dt, k3.djac));
    FieldState1D out{s.m + dt / 6.0 * (k1.d.m + 2.0 * k2.d.m + 2.0 * k3.d.m + k4.d.m),
                     s.sigma + dt / 6.0 * (k1.d.sigma + 2.0 * k2.d.sigma + 2.0 * k3.d.sigma + k4.d.sigma)};
    if (!out.m.allFinite() || !out.sigma.allFinite()) throw IntegrationError("epaut1d: non-finite field values", t + dt);
    if (flow) {
      flow->eta = e0 + dt / 6.0 * (k1.deta + 2.0 * k2.deta + 2.0 * k3.deta + k4.deta);
      flow->jac = j0 + dt / 6.0 * (k1.djac + 2.0 * k2.djac + 2.0 * k3.djac + k4.djac);
      check_flow(*flow, t + dt);
    }
    return out;
  }

  struct Sample
  {
    double t;
    FieldState1D state;
    std::optional<FlowMap1D> flow;
  };

  /// Integrate to T with step dt (last step shortened), sampling every `stride` steps and at T.
  std::vector<Sample> run(FieldState1D s, double dt, double T, int stride = 1, std::optional<FlowMap1D> flow = {},
                          const std::function<void(const Sample&)>& observer = {}) const
  {
    check(s);
    if (!(dt > 0.0)) throw ValidationError("epaut1d: dt must be positive");
    if (T < 0.0) throw ValidationError("epaut1d: final time must be non-negative");
    if (stride < 1) throw ValidationError("epaut1d: stride must be at least 1");
    std::vector<Sample> out;
    auto record = [&](double t) {
      out.push_back({t, s, flow});
      if (observer) observer(out.back());
    };
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    double t = 0.0;
    record(t);
    for (long k = 1; k <= steps; ++k) {
      const double h = std::min(dt, T - t);
      s = step(s, h, flow ? &*flow : nullptr, t);
      t = (k == steps) ? T : t + h;
      if (k % stride == 0 || k == steps) record(t);
    }
    return out;
  }

  /// Periodic Gaussian of standard deviation `width` centred at x0 with total mass `mass`.
  Eigen::VectorXd mollified_delta(double x0, double mass, double width) const
  {
    if (!(width > 0.0)) throw ValidationError("epaut1d: mollifier width must be positive");
    Eigen::VectorXd f(grid_.points);
    for (int i = 0; i < grid_.points; ++i) {
      double r = grid_.x(i) - x0;
      r -= grid_.length * std::round(r / grid_.length);
      f[i] = std::exp(-0.5 * r * r / (width * width));
    }
    return f * (mass / (dx() * f.sum()));
  }

  /// Default mollifier of width 3 dx.
  Eigen::VectorXd mollified_delta(double x0, double mass) const { return mollified_delta(x0, mass, 3.0 * dx()); }

private:
  std::vector<double> symbol_table(double alpha) const
  {
    const auto kernel = kernels::helmholtz_or_identity(alpha, grid_.length);
    std::vector<double> sym(t_.modes(), 1.0);
    if (kernel.kind() == kernels::KernelKind::identity) return sym;
    if (model_.green_mode == ConvolutionMode::sampled) return kernels::sampled_symbol(t_, kernel);
    for (int j = 0; j < t_.modes(); ++j) sym[j] = kernel.symbol(t_.wavenumber(j));
    return sym;
  }

  Eigen::VectorXd apply_table(const std::vector<double>& sym, const Eigen::VectorXd& f) const
  {
    return detail::to_vec(t_.apply(detail::view(f), [&](int j, double) { return sym[j]; }));
  }

  FieldState1D filtered(FieldState1D d) const
  {
    d.m = dealias(d.m);
    for (int b = 0; b < d.sigma.cols(); ++b) d.sigma.col(b) = dealias(d.sigma.col(b));
    return d;
  }

  Eigen::MatrixXd ad_star_field(const Eigen::MatrixXd& xi, const Eigen::MatrixXd& mu) const
  {
    const int n = static_cast<int>(xi.rows()), d = spec_.dim();
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd a(d), b(d), r(d);
    for (int i = 0; i < n; ++i) {
      a = xi.row(i).transpose();
      b = mu.row(i).transpose();
      spec_.ad_star_into(detail::view(a), detail::view(b), {r.data(), static_cast<std::size_t>(d)});
      out.row(i) = r.transpose();
    }
    return out;
  }

  Eigen::MatrixXd bracket_field(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const
  {
    const int n = static_cast<int>(x.rows()), d = spec_.dim();
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd a(d), b(d), r(d);
    for (int i = 0; i < n; ++i) {
      a = x.row(i).transpose();
      b = y.row(i).transpose();
      spec_.bracket_into(detail::view(a), detail::view(b), {r.data(), static_cast<std::size_t>(d)});
      out.row(i) = r.transpose();
    }
    return out;
  }

  // Real trigonometric interpolant from the half spectrum (Nyquist mode taken as cosine).
  Eigen::VectorXd evaluate_spectrum(const std::vector<spectral::Complex>& c, const Eigen::VectorXd& points) const
  {
    const int n = grid_.points;
    const double k0 = 2.0 * std::numbers::pi / grid_.length;
    Eigen::VectorXd out(points.size());
    for (Eigen::Index p = 0; p < points.size(); ++p) {
      const spectral::Complex step = std::polar(1.0, k0 * points[p]);
      spectral::Complex w(1.0, 0.0);
      double acc = c[0].real();
      for (int j = 1; j < t_.modes(); ++j) {
        w *= step;
        if (2 * j == n)
          acc += c[j].real() * w.real();
        else
          acc += 2.0 * (c[j] * w).real();
      }
      out[p] = acc / n;
    }
    return out;
  }

  void check_flow(const FlowMap1D& f, double t) const
  {
    const Eigen::Index m = f.eta.size();
    bool ok = (f.jac.array() > 0.0).all() && f.jac.allFinite();
    for (Eigen::Index i = 0; ok && i < m; ++i) {
      const double next = (i + 1 < m) ? f.eta[i + 1] : f.eta[0] + grid_.length;
      ok = next > f.eta[i];
    }
    if (!ok) throw FlowMapDegeneracy("epaut1d: Lagrangian markers lost monotonicity", t);
  }

  Grid1D grid_;
  LieAlgebraSpec spec_;
  Model1D model_;
  spectral::Transform1D t_;
  std::vector<double> sym1_, sym2_;
};

/// Centered-difference dI/dt against the source term along a sampled run.
struct KelvinNoetherPoint
{
  double t;
  double circulation;
  double dI_dt;
  double source;
  double residual() const { return std::abs(dI_dt - source); }
};

inline std::vector<KelvinNoetherPoint> kelvin_noether_residual(const Solver1D& solver,
                                                               const std::vector<Solver1D::Sample>& samples)
{
  std::vector<double> t, circ;
  for (const auto& s : samples) {
    if (!s.flow) throw ValidationError("epaut1d: Kelvin-Noether diagnostic needs co-evolved markers");
    t.push_back(s.t);
    circ.push_back(solver.circulation(s.state, *s.flow));
  }
  std::vector<KelvinNoetherPoint> out;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const double d = (circ[i + 1] - circ[i - 1]) / (t[i + 1] - t[i - 1]);
    out.push_back({t[i], circ[i], d, solver.circulation_source(samples[i].state, *samples[i].flow)});
  }
  return out;
}

}  // namespace epaut::epaut1d
