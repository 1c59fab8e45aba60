#pragma once

// Pseudospectral solver on the flat torus for the incompressible system
//
//   varpi_t = -{varpi, psi} - sum_i {sigma_i, nu_i},
//   sigma_t = -{sigma, psi} - ad*_nu sigma,
//
// with varpi = -Lap psi, nu = (-Lap)^{-1} gamma^{-1} sigma, u = (psi_y, -psi_x)
// and {f, g} = f_x g_y - f_y g_x. Abelian charges give the low-beta reduced MHD
// family; sigma = 0 is 2D Euler. Fields live in the zero-mean sector.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lie.hpp"
#include "spectral.hpp"

namespace epaut::epaut2d {

using lie::LieAlgebraSpec;
using spectral::Complex;
using spectral::Field2D;

struct Grid2D
{
  double lx, ly;
  int nx, ny;

  Grid2D(double lx_, double ly_, int nx_, int ny_)
    : lx(lx_), ly(ly_), nx(nx_), ny(ny_)
  {
    if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("epaut2d: domain lengths must be positive");
    if (nx < 8 || ny < 8 || nx % 2 || ny % 2) throw ValidationError("epaut2d: grid sizes must be even and >= 8");
  }

  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  double cell() const { return dx() * dy(); }
  double x(int i) const { return i * dx(); }
  double y(int j) const { return j * dy(); }

  /// Samples f(x, y) at the nodes.
  Field2D sample(const std::function<double(double, double)>& f) const
  {
    Field2D out(nx, ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) out(i, j) = f(x(i), y(j));
    return out;
  }
};

struct FieldState2D
{
  Field2D varpi;
  std::vector<Field2D> sigma;
};

struct Velocity
{
  Field2D u1, u2;
};

struct Casimirs
{
  double total_vorticity = 0.0;
  Eigen::VectorXd total_sigma;
  Eigen::VectorXd sigma_squares;  // int sigma_i^2
  double gamma_norm = 0.0;        // int gamma^{-1}(sigma, sigma)
};

/// Closed polyline of markers advected with the flow (coordinates are not wrapped).
struct MaterialLoop
{
  std::vector<Eigen::Vector2d> markers;

  static MaterialLoop circle(Eigen::Vector2d centre, double radius, int count)
  {
    MaterialLoop l;
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * i / count;
      l.markers.push_back(centre + radius * Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
    return l;
  }

  /// Counter-clockwise axis-aligned rectangle with corners as markers and
  /// `per_side` markers on each side.
  static MaterialLoop rectangle(Eigen::Vector2d lo, Eigen::Vector2d hi, int per_side)
  {
    MaterialLoop l;
    const std::array<Eigen::Vector2d, 4> c{lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
    for (int s = 0; s < 4; ++s)
      for (int i = 0; i < per_side; ++i) {
        const double t = static_cast<double>(i) / per_side;
        l.markers.push_back((1 - t) * c[s] + t * c[(s + 1) % 4]);
      }
    return l;
  }
};

class Solver2D
{
public:
  Solver2D(Grid2D grid, LieAlgebraSpec spec)
    : grid_(grid), spec_(std::move(spec)), t_(grid_.nx, grid_.ny, grid_.lx, grid_.ly)
  {}

  const Grid2D& grid() const noexcept { return grid_; }
  const LieAlgebraSpec& spec() const noexcept { return spec_; }
  const spectral::Transform2D& transform() const noexcept { return t_; }

  FieldState2D zero_state() const
  {
    return {Field2D::Zero(grid_.nx, grid_.ny), std::vector<Field2D>(spec_.dim(), Field2D::Zero(grid_.nx, grid_.ny))};
  }

  void check(const FieldState2D& s) const
  {
    auto ok = [&](const Field2D& f) { return f.rows() == grid_.nx && f.cols() == grid_.ny; };
    bool good = ok(s.varpi) && static_cast<int>(s.sigma.size()) == spec_.dim();
    for (const auto& f : s.sigma) good = good && ok(f);
    if (!good)
      throw ValidationError("epaut2d: state must hold " + std::to_string(grid_.nx) + "x" + std::to_string(grid_.ny) +
                            " fields and " + std::to_string(spec_.dim()) + " charge components");
  }

  double mean(const Field2D& f) const { return f.mean(); }

  /// Removes the mean of every field (projection onto the zero-mean sector).
  FieldState2D project_zero_mean(FieldState2D s) const
  {
    s.varpi -= s.varpi.mean();
    for (auto& f : s.sigma) f -= f.mean();
    return s;
  }

  /// psi = (-Lap)^{-1} varpi; varpi must have zero mean.
  Field2D stream(const Field2D& varpi) const
  {
    check_mean(varpi);
    return t_.inverse_neg_laplacian(varpi);
  }

  Velocity velocity(const Field2D& psi) const { return {t_.dy(psi), -t_.dx(psi)}; }

  Field2D divergence(const Velocity& u) const { return t_.dx(u.u1) + t_.dy(u.u2); }

  /// {f, g} = f_x g_y - f_y g_x with the 2/3 rule applied to the product.
  Field2D poisson_bracket(const Field2D& f, const Field2D& g) const
  {
    return t_.dealias(t_.dx(f) * t_.dy(g) - t_.dy(f) * t_.dx(g));
  }

  /// nu_i = (-Lap)^{-1} (gamma^{-1} sigma)_i.
  std::vector<Field2D> potentials(const std::vector<Field2D>& sigma) const
  {
    const auto raised = raise(sigma);
    std::vector<Field2D> nu;
    nu.reserve(raised.size());
    for (const auto& f : raised) nu.push_back(t_.inverse_neg_laplacian(f));
    return nu;
  }

  FieldState2D rhs(const FieldState2D& s) const
  {
    check(s);
    check_mean(s.varpi);
    const int dim = spec_.dim();
    const auto cw = t_.forward(s.varpi);
    const Gradient gp = gradient(inverse_laplace(cw));
    FieldState2D d;
    d.varpi = bracket_with(gradient(cw), gp);

    std::vector<std::vector<Complex>> cs;
    for (const auto& f : s.sigma) cs.push_back(t_.forward(f));
    const auto& gi = spec_.gamma_inv();
    std::vector<Field2D> nu;
    for (int a = 0; a < dim; ++a) {
      std::vector<Complex> cn(cw.size(), Complex(0.0));
      for (int b = 0; b < dim; ++b)
        if (gi(a, b) != 0.0)
          for (std::size_t m = 0; m < cn.size(); ++m) cn[m] += gi(a, b) * cs[b][m];
      cn = inverse_laplace(std::move(cn));
      const Gradient gs = gradient(cs[a]);
      d.varpi += bracket_with(gs, gradient(cn));
      d.sigma.push_back(bracket_with(gs, gp));
      if (!spec_.is_abelian()) nu.push_back(t_.backward(cn));
    }
    if (!spec_.is_abelian()) {
      const auto ad = ad_star_field(nu, s.sigma);
      for (int a = 0; a < dim; ++a) d.sigma[a] += ad[a];
    }
    d.varpi = -t_.dealias(d.varpi);
    for (auto& f : d.sigma) f = -t_.dealias(f);
    return d;
  }

  /// 1/2 int psi varpi + 1/2 int nu . sigma.
  double energy(const FieldState2D& s) const
  {
    check(s);
    double e = (stream(s.varpi) * s.varpi).sum();
    const auto nu = potentials(s.sigma);
    for (int i = 0; i < spec_.dim(); ++i) e += (nu[i] * s.sigma[i]).sum();
    return 0.5 * grid_.cell() * e;
  }

  /// 1/2 int varpi^2.
  double enstrophy(const FieldState2D& s) const { return 0.5 * grid_.cell() * s.varpi.square().sum(); }

  double total_vorticity(const FieldState2D& s) const { return grid_.cell() * s.varpi.sum(); }

  Casimirs casimirs(const FieldState2D& s) const
  {
    check(s);
    Casimirs c;
    c.total_vorticity = total_vorticity(s);
    const int d = spec_.dim();
    c.total_sigma.resize(d);
    c.sigma_squares.resize(d);
    for (int i = 0; i < d; ++i) {
      c.total_sigma[i] = grid_.cell() * s.sigma[i].sum();
      c.sigma_squares[i] = grid_.cell() * s.sigma[i].square().sum();
    }
    const auto raised = raise(s.sigma);
    for (int i = 0; i < d; ++i) c.gamma_norm += grid_.cell() * (raised[i] * s.sigma[i]).sum();
    return c;
  }

  double max_speed(const FieldState2D& s) const
  {
    check_mean(s.varpi);
    const Gradient g = gradient(inverse_laplace(t_.forward(s.varpi)));
    return std::sqrt((g.x.square() + g.y.square()).maxCoeff());
  }

  double cfl_limit(const FieldState2D& s) const
  {
    const double c = max_speed(s);
    return c > 0.0 ? 0.5 * std::min(grid_.dx(), grid_.dy()) / c : std::numeric_limits<double>::infinity();
  }

  // ---- loops ---------------------------------------------------------------

  /// Periodic bicubic (4x4 Lagrange) interpolation of a grid field.
  double interpolate(const Field2D& f, const Eigen::Vector2d& p) const
  {
    const double gx = p.x() / grid_.dx(), gy = p.y() / grid_.dy();
    const double fx = std::floor(gx), fy = std::floor(gy);
    const auto wx = cubic_weights(gx - fx), wy = cubic_weights(gy - fy);
    const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
      const int j = wrap(iy - 1 + b, grid_.ny);
      double row = 0.0;
      for (int a = 0; a < 4; ++a) row += wx[a] * f(wrap(ix - 1 + a, grid_.nx), j);
      acc += wy[b] * row;
    }
    return acc;
  }

  /// Trapezoid rule for the line integral of u along the closed polyline.
  double circulation(const FieldState2D& s, const MaterialLoop& loop) const
  {
    check_loop(loop);
    const auto u = velocity(stream(s.varpi));
    return circulation(u, loop);
  }

  double circulation(const Velocity& u, const MaterialLoop& loop) const
  {
    const std::size_t n = loop.markers.size();
    std::vector<Eigen::Vector2d> vel(n);
    for (std::size_t i = 0; i < n; ++i) vel[i] = {interpolate(u.u1, loop.markers[i]), interpolate(u.u2, loop.markers[i])};
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = (i + 1) % n;
      acc += 0.5 * (vel[i] + vel[k]).dot(loop.markers[k] - loop.markers[i]);
    }
    return acc;
  }

  void check_loop(const MaterialLoop& loop) const
  {
    if (loop.markers.size() < 32) throw ValidationError("epaut2d: a material loop needs at least 32 markers");
    for (std::size_t i = 0; i < loop.markers.size(); ++i) {
      const auto& a = loop.markers[i];
      const auto& b = loop.markers[(i + 1) % loop.markers.size()];
      if (!a.allFinite() || (a - b).norm() == 0.0) throw ValidationError("epaut2d: degenerate material loop");
    }
  }

  // ---- time stepping -------------------------------------------------------

  FieldState2D step(const FieldState2D& s, double dt, MaterialLoop* loop = nullptr, double t = 0.0) const
  {
    if (!(dt > 0.0)) throw ValidationError("epaut2d: dt must be positive");
    if (dt > cfl_limit(s))
      throw IntegrationError("epaut2d: CFL violation, dt = " + std::to_string(dt) + " exceeds " +
                                 std::to_string(cfl_limit(s)),
                             t);
    using Markers = std::vector<Eigen::Vector2d>;
    auto marker_velocity = [&](const FieldState2D& x, const Markers& m) {
      Markers v(m.size());
      if (m.empty()) return v;
      check_mean(x.varpi);
      const Gradient g = gradient(inverse_laplace(t_.forward(x.varpi)));
      for (std::size_t i = 0; i < m.size(); ++i) v[i] = {interpolate(g.y, m[i]), -interpolate(g.x, m[i])};
      return v;
    };
    auto add = [&](const FieldState2D& x, double a, const FieldState2D& y) {
      FieldState2D r{x.varpi + a * y.varpi, {}};
      for (std::size_t i = 0; i < x.sigma.size(); ++i) r.sigma.push_back(x.sigma[i] + a * y.sigma[i]);
      return r;
    };
    auto shift = [](const Markers& m, double a, const Markers& v) {
      Markers r(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) r[i] = m[i] + a * v[i];
      return r;
    };
    const Markers m0 = loop ? loop->markers : Markers{};
    const auto k1 = rhs(s);
    const auto v1 = marker_velocity(s, m0);
    const auto s2 = add(s, 0.5 * dt, k1);
    const auto m2 = shift(m0, 0.5 * dt, v1);
    const auto k2 = rhs(s2);
    const auto v2 = marker_velocity(s2, m2);
    const auto s3 = add(s, 0.5 * dt, k2);
    const auto m3 = shift(m0, 0.5 * dt, v2);
    const auto k3 = rhs(s3);
    const auto v3 = marker_velocity(s3, m3);
    const auto s4 = add(s, dt, k3);
    const auto m4 = shift(m0, dt, v3);
    const auto k4 = rhs(s4);
    const auto v4 = marker_velocity(s4, m4);

    FieldState2D out{s.varpi + dt / 6.0 * (k1.varpi + 2.0 * k2.varpi + 2.0 * k3.varpi + k4.varpi), {}};
    for (int i = 0; i < spec_.dim(); ++i)
      out.sigma.push_back(s.sigma[i] + dt / 6.0 * (k1.sigma[i] + 2.0 * k2.sigma[i] + 2.0 * k3.sigma[i] + k4.sigma[i]));
    bool finite = out.varpi.allFinite();
    for (const auto& f : out.sigma) finite = finite && f.allFinite();
    if (!finite) throw IntegrationError("epaut2d: non-finite field values", t + dt);
    if (loop)
      for (std::size_t i = 0; i < m0.size(); ++i)
        loop->markers[i] = m0[i] + dt / 6.0 * (v1[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
    return out;
  }

  struct Sample
  {
    double t;
    FieldState2D state;
    std::optional<MaterialLoop> loop;
  };

  std::vector<Sample> run(FieldState2D s, double dt, double T, int stride = 1, std::optional<MaterialLoop> loop = {},
                          const std::function<void(const Sample&)>& observer = {}, bool keep = true) const
  {
    check(s);
    if (loop) check_loop(*loop);
    if (!(dt > 0.0)) throw ValidationError("epaut2d: dt must be positive");
    if (T < 0.0) throw ValidationError("epaut2d: final time must be non-negative");
    if (stride < 1) throw ValidationError("epaut2d: stride must be at least 1");
    std::vector<Sample> out;
    auto record = [&](double t) {
      Sample smp{t, s, loop};
      if (observer) observer(smp);
      if (keep) out.push_back(std::move(smp));
    };
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    double t = 0.0;
    record(t);
    for (long k = 1; k <= steps; ++k) {
      const double h = std::min(dt, T - t);
      s = step(s, h, loop ? &*loop : nullptr, t);
      t = (k == steps) ? T : t + h;
      if (k % stride == 0 || k == steps) record(t);
    }
    return out;
  }

private:
  struct Gradient
  {
    Field2D x, y;
  };

  void check_mean(const Field2D& varpi) const
  {
    const double scale = std::max(1.0, varpi.abs().maxCoeff());
    if (std::abs(varpi.mean()) > 1e-10 * scale)
      throw ValidationError("epaut2d: vorticity must have zero mean (got " + std::to_string(varpi.mean()) + ")");
  }

  std::vector<Complex> inverse_laplace(std::vector<Complex> c) const
  {
    t_.apply_in_place(c, [](int jx, int jy, double kx, double ky) {
      return (jx == 0 && jy == 0) ? 0.0 : 1.0 / (kx * kx + ky * ky);
    });
    return c;
  }

  Gradient gradient(const Field2D& f) const { return gradient(t_.forward(f)); }

  Gradient gradient(std::vector<Complex> c) const
  {
    auto cy = c;
    t_.apply_in_place(c, [&](int jx, int, double kx, double) {
      return t_.nyquist_x(jx) ? Complex(0.0) : Complex(0.0, kx);
    });
    t_.apply_in_place(cy, [&](int, int jy, double, double ky) {
      return t_.nyquist_y(jy) ? Complex(0.0) : Complex(0.0, ky);
    });
    return {t_.backward(c), t_.backward(cy)};
  }

  static Field2D bracket_with(const Gradient& f, const Gradient& g) { return f.x * g.y - f.y * g.x; }

  std::vector<Field2D> raise(const std::vector<Field2D>& sigma) const
  {
    const auto& gi = spec_.gamma_inv();
    std::vector<Field2D> out;
    for (int a = 0; a < spec_.dim(); ++a) {
      Field2D f = Field2D::Zero(grid_.nx, grid_.ny);
      for (int b = 0; b < spec_.dim(); ++b)
        if (gi(a, b) != 0.0) f += gi(a, b) * sigma[b];
      out.push_back(std::move(f));
    }
    return out;
  }

  std::vector<Field2D> ad_star_field(const std::vector<Field2D>& xi, const std::vector<Field2D>& mu) const
  {
    const int d = spec_.dim();
    std::vector<Field2D> out(d, Field2D::Zero(grid_.nx, grid_.ny));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          const double c = spec_.c(i, j, k);
          if (c != 0.0) out[j] += c * xi[i] * mu[k];
        }
    return out;
  }

  static int wrap(long i, int n)
  {
    const long r = i % n;
    return static_cast<int>(r < 0 ? r + n : r);
  }

  // Cubic Lagrange weights for nodes -1, 0, 1, 2 at offset t in [0, 1).
  static std::array<double, 4> cubic_weights(double t)
  {
    return {-t * (t - 1) * (t - 2) / 6.0, (t + 1) * (t - 1) * (t - 2) / 2.0, -(t + 1) * t * (t - 2) / 2.0,
            (t + 1) * t * (t - 1) / 6.0};
  }

  Grid2D grid_;
  LieAlgebraSpec spec_;
  spectral::Transform2D t_;
};

}  // namespace epaut::epaut2d
