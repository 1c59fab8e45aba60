#pragma once

// Clebsch variables (Q, P, sigma, theta) on the 2D torus and their momentum maps.
//
// Q^a = slope_a . x + (periodic part) so that shear seeds such as Q = x are
// representable; P, sigma and theta are periodic. theta is stored entrywise,
// entry (r, c) of the rep_dim x rep_dim matrix in field r + rep_dim * c.
//
// Right momentum map:  varpi = curl alpha,  sigma_bar = Ad*_theta sigma, with
//   alpha = sum_a P_a grad Q^a + <sigma, (grad theta) theta^{-1}> - <sigma_bar, A_S>.
//
// The dynamics that reproduce the incompressible solver are the infinitesimal
// action scaled by a sign s, with zeta built from sigma_bar; s and the frame
// of zeta are fixed by calibrate() and frozen in kCalibrated.

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "epaut2d.hpp"
#include "errors.hpp"
#include "lie.hpp"
#include "spectral.hpp"

namespace epaut::clebsch {

using epaut2d::Grid2D;
using lie::LieAlgebraSpec;
using spectral::Field2D;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ClebschState
{
  std::vector<Eigen::Vector2d> slope;
  std::vector<Field2D> Q, P;     // periodic parts of Q; P
  std::vector<Field2D> sigma;    // dim components
  std::vector<Field2D> theta;    // rep_dim^2 entry fields
  Field2D w;                     // volume density

  int pairs() const { return static_cast<int>(Q.size()); }
};

/// o-valued one-form on the torus, one field per basis direction and component.
struct ConnectionForm
{
  std::vector<Field2D> ax, ay;
};

struct RightMomentum
{
  Field2D varpi;
  std::vector<Field2D> sigma_bar;
};

/// h(q, p, zeta) with analytic partials.
struct TestHamiltonian
{
  using Fn = std::function<double(const VectorXd&, const VectorXd&, const VectorXd&)>;
  using Grad = std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)>;
  Fn value;
  Grad dq, dp, dzeta;

  /// 1/2 |p|^2
  static TestHamiltonian kinetic()
  {
    return {[](const VectorXd&, const VectorXd& p, const VectorXd&) { return 0.5 * p.squaredNorm(); },
            [](const VectorXd& q, const VectorXd&, const VectorXd&) { return VectorXd::Zero(q.size()).eval(); },
            [](const VectorXd&, const VectorXd& p, const VectorXd&) { return p; },
            [](const VectorXd&, const VectorXd&, const VectorXd& z) { return VectorXd::Zero(z.size()).eval(); }};
  }

  /// <c, zeta>
  static TestHamiltonian linear_charge(VectorXd c)
  {
    return {[c](const VectorXd&, const VectorXd&, const VectorXd& z) { return c.dot(z); },
            [](const VectorXd& q, const VectorXd&, const VectorXd&) { return VectorXd::Zero(q.size()).eval(); },
            [](const VectorXd&, const VectorXd& p, const VectorXd&) { return VectorXd::Zero(p.size()).eval(); },
            [c](const VectorXd&, const VectorXd&, const VectorXd&) { return c; }};
  }

  /// 1/2 <zeta, zeta>
  static TestHamiltonian quadratic_charge()
  {
    return {[](const VectorXd&, const VectorXd&, const VectorXd& z) { return 0.5 * z.squaredNorm(); },
            [](const VectorXd& q, const VectorXd&, const VectorXd&) { return VectorXd::Zero(q.size()).eval(); },
            [](const VectorXd&, const VectorXd& p, const VectorXd&) { return VectorXd::Zero(p.size()).eval(); },
            [](const VectorXd&, const VectorXd&, const VectorXd& z) { return z; }};
  }

  /// 1/2 |p|^2 + sum_a cos(q_a) + 1/2 <zeta, zeta> + (sum_a p_a) <c, zeta>
  static TestHamiltonian coupled(VectorXd c)
  {
    return {[c](const VectorXd& q, const VectorXd& p, const VectorXd& z) {
              return 0.5 * p.squaredNorm() + q.array().cos().sum() + 0.5 * z.squaredNorm() + p.sum() * c.dot(z);
            },
            [](const VectorXd& q, const VectorXd&, const VectorXd&) { return (-q.array().sin()).matrix().eval(); },
            [c](const VectorXd&, const VectorXd& p, const VectorXd& z) {
              return (p.array() + c.dot(z)).matrix().eval();
            },
            [c](const VectorXd&, const VectorXd& p, const VectorXd& z) { return (z + p.sum() * c).eval(); }};
  }
};

/// Largest relative mismatch between the analytic partials and central differences.
inline double partials_mismatch(const TestHamiltonian& h, const VectorXd& q, const VectorXd& p, const VectorXd& z,
                                double eps = 1e-6)
{
  double worst = 0.0;
  auto probe = [&](const VectorXd& analytic, int slot, int n) {
    for (int i = 0; i < n; ++i) {
      VectorXd qp = q, pp = p, zp = z, qm = q, pm = p, zm = z;
      VectorXd* plus[] = {&qp, &pp, &zp};
      VectorXd* minus[] = {&qm, &pm, &zm};
      (*plus[slot])[i] += eps;
      (*minus[slot])[i] -= eps;
      const double fd = (h.value(qp, pp, zp) - h.value(qm, pm, zm)) / (2 * eps);
      worst = std::max(worst, std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i])));
    }
  };
  probe(h.dq(q, p, z), 0, static_cast<int>(q.size()));
  probe(h.dp(q, p, z), 1, static_cast<int>(p.size()));
  probe(h.dzeta(q, p, z), 2, static_cast<int>(z.size()));
  return worst;
}

/// Functional derivatives (densities with respect to dx dy), shaped like a state.
struct Variation
{
  std::vector<Field2D> Q, P, sigma, theta;
};

struct Functional
{
  std::function<double(const ClebschState&)> value;
  std::function<Variation(const ClebschState&)> variation;
};

enum class ZetaFrame
{
  direct,       // zeta = nu(sigma_bar)
  pulled_back,  // zeta = Ad_{theta^{-1}} nu(sigma_bar)
};

struct Convention
{
  int sign;
  ZetaFrame frame;
};

inline constexpr Convention kCalibrated{-1, ZetaFrame::direct};

inline std::string to_string(const Convention& c)
{
  return std::string(c.sign > 0 ? "+1" : "-1") + (c.frame == ZetaFrame::direct ? "/direct" : "/pulled_back");
}

enum class Symmetry
{
  identity,
  translation,
  rotation90,
};

struct ConsistencyPoint
{
  double t;
  double mismatch;      // relative L2 distance between J_R(state) and the direct solution
  double equivariance;  // translation residual of J_R at this time
  double energy_clebsch;
  double energy_direct;
};

struct CollectiveResult
{
  std::vector<ConsistencyPoint> report;
  std::vector<std::pair<double, RightMomentum>> trajectory;
  ClebschState final_state;
  epaut2d::FieldState2D final_direct;
};

class ClebschSystem
{
public:
  ClebschSystem(Grid2D grid, LieAlgebraSpec spec) : solver_(grid, std::move(spec)) {}

  const Grid2D& grid() const noexcept { return solver_.grid(); }
  const LieAlgebraSpec& spec() const noexcept { return solver_.spec(); }
  const epaut2d::Solver2D& solver() const noexcept { return solver_; }
  int nodes() const { return grid().nx * grid().ny; }

  /// k zero canonical pairs, zero charge, theta = identity, w = 1.
  ClebschState make_state(int k) const
  {
    if (k < 0) throw ValidationError("clebsch: canonical-pair count must be non-negative");
    const auto z = zero();
    ClebschState s;
    s.slope.assign(k, Eigen::Vector2d::Zero());
    s.Q.assign(k, z);
    s.P.assign(k, z);
    s.sigma.assign(spec().dim(), z);
    const int r = spec().rep_dim();
    for (int c = 0; c < r; ++c)
      for (int row = 0; row < r; ++row) s.theta.push_back(row == c ? Field2D::Ones(grid().nx, grid().ny) : z);
    s.w = Field2D::Ones(grid().nx, grid().ny);
    return s;
  }

  void check(const ClebschState& s) const
  {
    const int k = s.pairs();
    const int r = spec().rep_dim();
    bool ok = static_cast<int>(s.slope.size()) == k && static_cast<int>(s.P.size()) == k &&
              static_cast<int>(s.sigma.size()) == spec().dim() && static_cast<int>(s.theta.size()) == r * r &&
              shape_ok(s.w);
    for (const auto* group : {&s.Q, &s.P, &s.sigma, &s.theta})
      for (const auto& f : *group) ok = ok && shape_ok(f);
    if (!ok)
      throw ValidationError("clebsch: state shape mismatch (expected " + std::to_string(grid().nx) + "x" +
                            std::to_string(grid().ny) + " fields, " + std::to_string(spec().dim()) +
                            " charge components and " + std::to_string(r * r) + " theta entries)");
    bool finite = s.w.allFinite();
    for (const auto* group : {&s.Q, &s.P, &s.sigma, &s.theta})
      for (const auto& f : *group) finite = finite && f.allFinite();
    for (const auto& b : s.slope) finite = finite && b.allFinite();
    if (!finite) throw ValidationError("clebsch: state contains non-finite values");
    if (!(s.w.minCoeff() > 0.0)) throw ValidationError("clebsch: volume density w must be positive");
  }

  /// Q^a at the nodes including the linear part.
  Field2D full_Q(const ClebschState& s, int a) const
  {
    Field2D q = s.Q[a];
    for (int j = 0; j < grid().ny; ++j)
      for (int i = 0; i < grid().nx; ++i) q(i, j) += s.slope[a].x() * grid().x(i) + s.slope[a].y() * grid().y(j);
    return q;
  }

  MatrixXd theta_at(const ClebschState& s, int node) const
  {
    const int r = spec().rep_dim();
    MatrixXd m(r, r);
    for (int e = 0; e < r * r; ++e) m.data()[e] = s.theta[e].data()[node];
    return m;
  }

  void set_theta(ClebschState& s, int node, const MatrixXd& m) const
  {
    for (int e = 0; e < m.size(); ++e) s.theta[e].data()[node] = m.data()[e];
  }

  /// Fills theta with exp(hat(phi)) from dim phase fields.
  void set_theta_exp(ClebschState& s, const std::vector<Field2D>& phi) const
  {
    if (static_cast<int>(phi.size()) != spec().dim()) throw ValidationError("clebsch: need one phase field per generator");
    VectorXd xi(spec().dim());
    for (int n = 0; n < nodes(); ++n) {
      for (int a = 0; a < spec().dim(); ++a) xi[a] = phi[a].data()[n];
      set_theta(s, n, lie::expm(spec().hat(lie::detail::view(xi))));
    }
  }

  /// Largest pointwise distance of theta from the group.
  double theta_defect(const ClebschState& s) const
  {
    double worst = 0.0;
    for (int n = 0; n < nodes(); ++n) worst = std::max(worst, lie::membership_defect(spec(), theta_at(s, n)));
    return worst;
  }

  /// Pulls theta back to the group by polar projection (orthogonal representations only).
  void reproject(ClebschState& s) const
  {
    if (!spec().orthogonal()) return;
    for (int n = 0; n < nodes(); ++n) set_theta(s, n, lie::polar_project(theta_at(s, n)));
  }

  // ---- momentum maps -------------------------------------------------------

  RightMomentum j_right(const ClebschState& s, const ConnectionForm* connection = nullptr) const
  {
    check(s);
    const int d = spec().dim(), r = spec().rep_dim();
    if (connection && (static_cast<int>(connection->ax.size()) != d || static_cast<int>(connection->ay.size()) != d))
      throw ValidationError("clebsch: connection form needs dim components per direction");
    const auto& t = solver_.transform();
    Field2D ax = Field2D::Zero(grid().nx, grid().ny), ay = ax;
    for (int a = 0; a < s.pairs(); ++a) {
      const auto [qx, qy] = t.gradient(s.Q[a]);
      ax += s.P[a] * (qx + s.slope[a].x());
      ay += s.P[a] * (qy + s.slope[a].y());
    }
    std::vector<Field2D> tx, ty;
    for (const auto& e : s.theta) {
      auto [gx, gy] = t.gradient(e);
      tx.push_back(std::move(gx));
      ty.push_back(std::move(gy));
    }
    RightMomentum out{Field2D(), std::vector<Field2D>(d, zero())};
    MatrixXd dx(r, r), dy(r, r);
    VectorXd sig(d);
    for (int n = 0; n < nodes(); ++n) {
      const MatrixXd th = theta_at(s, n);
      const MatrixXd inv = checked_inverse(th, n);
      for (int e = 0; e < r * r; ++e) {
        dx.data()[e] = tx[e].data()[n];
        dy.data()[e] = ty[e].data()[n];
      }
      for (int a = 0; a < d; ++a) sig[a] = s.sigma[a].data()[n];
      ax.data()[n] += sig.dot(spec().vee_projected(dx * inv));
      ay.data()[n] += sig.dot(spec().vee_projected(dy * inv));
      const VectorXd bar = ad_star(th, inv, sig);
      for (int a = 0; a < d; ++a) {
        out.sigma_bar[a].data()[n] = bar[a];
        if (connection) {
          ax.data()[n] -= bar[a] * connection->ax[a].data()[n];
          ay.data()[n] -= bar[a] * connection->ay[a].data()[n];
        }
      }
    }
    out.varpi = t.dx(ay) - t.dy(ax);
    return out;
  }

  /// <J_L, h> = int h(Q, P, sigma) w dx.
  double j_left_pair(const ClebschState& s, const TestHamiltonian& h) const
  {
    check(s);
    if (!h.value) throw ValidationError("clebsch: test Hamiltonian has no value");
    const auto q = full_Qs(s);
    double acc = 0.0;
    for (int n = 0; n < nodes(); ++n) {
      const auto [qv, pv, zv] = point(s, q, n);
      acc += h.value(qv, pv, zv) * s.w.data()[n];
    }
    return acc * grid().cell();
  }

  /// The collective functional int h(Q, P, sigma) w dx with its variation.
  Functional collective_functional(const TestHamiltonian& h) const
  {
    require_partials(h);
    return {[this, h](const ClebschState& s) { return j_left_pair(s, h); },
            [this, h](const ClebschState& s) {
              const auto q = full_Qs(s);
              Variation v{std::vector<Field2D>(s.pairs(), zero()), std::vector<Field2D>(s.pairs(), zero()),
                          std::vector<Field2D>(spec().dim(), zero()), std::vector<Field2D>(s.theta.size(), zero())};
              for (int n = 0; n < nodes(); ++n) {
                const auto [qv, pv, zv] = point(s, q, n);
                const double wn = s.w.data()[n];
                const VectorXd gq = h.dq(qv, pv, zv), gp = h.dp(qv, pv, zv), gz = h.dzeta(qv, pv, zv);
                for (int a = 0; a < s.pairs(); ++a) {
                  v.Q[a].data()[n] = wn * gq[a];
                  v.P[a].data()[n] = wn * gp[a];
                }
                for (int a = 0; a < spec().dim(); ++a) v.sigma[a].data()[n] = wn * gz[a];
              }
              return v;
            }};
  }

  /// Clebsch bracket of two functionals.
  double bracket(const Functional& F, const Functional& G, const ClebschState& s) const
  {
    check(s);
    const Variation f = F.variation(s), g = G.variation(s);
    check_variation(f, s);
    check_variation(g, s);
    const int d = spec().dim(), r = spec().rep_dim();
    double acc = 0.0;
    VectorXd sig(d), fs(d), gs(d), br(d);
    MatrixXd fth(r, r), gth(r, r);
    for (int n = 0; n < nodes(); ++n) {
      double local = 0.0;
      for (int a = 0; a < s.pairs(); ++a)
        local += f.Q[a].data()[n] * g.P[a].data()[n] - g.Q[a].data()[n] * f.P[a].data()[n];
      for (int a = 0; a < d; ++a) {
        sig[a] = s.sigma[a].data()[n];
        fs[a] = f.sigma[a].data()[n];
        gs[a] = g.sigma[a].data()[n];
      }
      spec().bracket_into(lie::detail::view(fs), lie::detail::view(gs), {br.data(), static_cast<size_t>(d)});
      local += sig.dot(br);
      const MatrixXd th = theta_at(s, n);
      for (int e = 0; e < r * r; ++e) {
        fth.data()[e] = f.theta[e].data()[n];
        gth.data()[e] = g.theta[e].data()[n];
      }
      local += (fth.transpose() * spec().hat(lie::detail::view(gs)) * th).trace();
      local -= (gth.transpose() * spec().hat(lie::detail::view(fs)) * th).trace();
      acc += local / s.w.data()[n];
    }
    return acc * grid().cell();
  }

  /// dF(state)[X] from the variation of F.
  double directional(const Functional& F, const ClebschState& s, const ClebschState& x) const
  {
    const Variation v = F.variation(s);
    double acc = 0.0;
    auto add = [&](const std::vector<Field2D>& a, const std::vector<Field2D>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] * b[i]).sum();
    };
    add(v.Q, x.Q);
    add(v.P, x.P);
    add(v.sigma, x.sigma);
    add(v.theta, x.theta);
    return acc * grid().cell();
  }

  // ---- vector fields -------------------------------------------------------

  /// Hamiltonian vector field of the collective functional of h.
  ClebschState canonical_rhs(const ClebschState& s, const TestHamiltonian& h) const
  {
    check(s);
    require_partials(h);
    const int d = spec().dim();
    const auto q = full_Qs(s);
    ClebschState out = derivative_shell(s);
    VectorXd ad(d);
    for (int n = 0; n < nodes(); ++n) {
      const auto [qv, pv, zv] = point(s, q, n);
      const VectorXd gq = h.dq(qv, pv, zv), gp = h.dp(qv, pv, zv), gz = h.dzeta(qv, pv, zv);
      for (int a = 0; a < s.pairs(); ++a) {
        out.Q[a].data()[n] = gp[a];
        out.P[a].data()[n] = -gq[a];
      }
      spec().ad_star_into(lie::detail::view(gz), lie::detail::view(zv), {ad.data(), static_cast<size_t>(d)});
      for (int a = 0; a < d; ++a) out.sigma[a].data()[n] = -ad[a];
      set_theta(out, n, spec().hat(lie::detail::view(gz)) * theta_at(s, n));
    }
    return out;
  }

  /// sign * ((u.grad) Q, (u.grad) P, (u.grad) sigma, (u.grad) theta + theta zeta), dealiased.
  ClebschState advective_rhs(const ClebschState& s, const epaut2d::Velocity& u, const std::vector<Field2D>& zeta,
                             int sign = kCalibrated.sign) const
  {
    check(s);
    if (!shape_ok(u.u1) || !shape_ok(u.u2)) throw ValidationError("clebsch: velocity shape mismatch");
    if (static_cast<int>(zeta.size()) != spec().dim()) throw ValidationError("clebsch: zeta needs dim components");
    const auto& t = solver_.transform();
    const double scale = std::max(1.0, std::max(u.u1.abs().maxCoeff(), u.u2.abs().maxCoeff()));
    if (solver_.divergence(u).abs().maxCoeff() > 1e-10 * scale)
      throw ValidationError("clebsch: velocity is not divergence-free");

    auto transport = [&](const Field2D& f, double bx, double by) {
      const auto [fx, fy] = t.gradient(f);
      return Field2D(u.u1 * (fx + bx) + u.u2 * (fy + by));
    };
    ClebschState out = derivative_shell(s);
    for (int a = 0; a < s.pairs(); ++a) {
      out.Q[a] = transport(s.Q[a], s.slope[a].x(), s.slope[a].y());
      out.P[a] = transport(s.P[a], 0.0, 0.0);
    }
    for (int a = 0; a < spec().dim(); ++a) out.sigma[a] = transport(s.sigma[a], 0.0, 0.0);
    for (std::size_t e = 0; e < s.theta.size(); ++e) out.theta[e] = transport(s.theta[e], 0.0, 0.0);
    VectorXd z(spec().dim());
    for (int n = 0; n < nodes(); ++n) {
      for (int a = 0; a < spec().dim(); ++a) z[a] = zeta[a].data()[n];
      const MatrixXd tz = theta_at(s, n) * spec().hat(lie::detail::view(z));
      for (int e = 0; e < tz.size(); ++e) out.theta[e].data()[n] += tz.data()[e];
    }
    for (auto* group : {&out.Q, &out.P, &out.sigma, &out.theta})
      for (auto& f : *group) f = static_cast<double>(sign) * t.dealias(f);
    return out;
  }

  /// Advective vector field driven by the incompressible Hamiltonian evaluated on J_R(state).
  ClebschState collective_rhs(const ClebschState& s, Convention c = kCalibrated) const
  {
    const RightMomentum jr = j_right(s);
    const auto u = solver_.velocity(solver_.stream(jr.varpi));
    auto zeta = solver_.potentials(jr.sigma_bar);
    if (c.frame == ZetaFrame::pulled_back) {
      VectorXd z(spec().dim());
      for (int n = 0; n < nodes(); ++n) {
        const MatrixXd th = theta_at(s, n);
        const MatrixXd inv = checked_inverse(th, n);
        for (int a = 0; a < spec().dim(); ++a) z[a] = zeta[a].data()[n];
        const VectorXd pulled = spec().vee_projected(inv * spec().hat(lie::detail::view(z)) * th);
        for (int a = 0; a < spec().dim(); ++a) zeta[a].data()[n] = pulled[a];
      }
    }
    return advective_rhs(s, u, zeta, c.sign);
  }

  /// s + h * d (slopes and w are carried from s).
  ClebschState axpy(const ClebschState& s, double h, const ClebschState& d) const
  {
    ClebschState out = s;
    for (int a = 0; a < s.pairs(); ++a) {
      out.Q[a] += h * d.Q[a];
      out.P[a] += h * d.P[a];
    }
    for (std::size_t a = 0; a < s.sigma.size(); ++a) out.sigma[a] += h * d.sigma[a];
    for (std::size_t e = 0; e < s.theta.size(); ++e) out.theta[e] += h * d.theta[e];
    return out;
  }

  ClebschState step(const ClebschState& s, double dt, const std::function<ClebschState(const ClebschState&)>& f,
                    double t = 0.0) const
  {
    const auto k1 = f(s);
    const auto k2 = f(axpy(s, 0.5 * dt, k1));
    const auto k3 = f(axpy(s, 0.5 * dt, k2));
    const auto k4 = f(axpy(s, dt, k3));
    ClebschState out = axpy(axpy(axpy(axpy(s, dt / 6.0, k1), dt / 3.0, k2), dt / 3.0, k3), dt / 6.0, k4);
    bool finite = true;
    for (const auto* group : {&out.Q, &out.P, &out.sigma, &out.theta})
      for (const auto& x : *group) finite = finite && x.allFinite();
    if (!finite) throw IntegrationError("clebsch: non-finite state", t + dt);
    return out;
  }

  /// RK4 of the canonical flow of h; returns <J_L, h> at every step (first entry at t = 0).
  std::vector<double> canonical_evolve(ClebschState& s, const TestHamiltonian& h, double dt, int steps) const
  {
    std::vector<double> pairing{j_left_pair(s, h)};
    for (int k = 0; k < steps; ++k) {
      s = step(s, dt, [&](const ClebschState& x) { return canonical_rhs(x, h); }, k * dt);
      pairing.push_back(j_left_pair(s, h));
    }
    return pairing;
  }

  /// Evolves the Clebsch state with collective_rhs and, alongside, the direct
  /// incompressible solution from J_R(state(0)); compares them every `stride` steps.
  CollectiveResult collective_evolve(ClebschState s, double dt, double T, int stride = 1,
                                     const std::function<void(const ConsistencyPoint&)>& observer = {},
                                     bool keep_trajectory = false) const
  {
    check(s);
    if (!(dt > 0.0)) throw ValidationError("clebsch: dt must be positive");
    if (T < 0.0) throw ValidationError("clebsch: final time must be non-negative");
    if (stride < 1) throw ValidationError("clebsch: stride must be at least 1");
    const RightMomentum j0 = j_right(s);
    epaut2d::FieldState2D direct{j0.varpi, j0.sigma_bar};
    CollectiveResult result;
    auto record = [&](double t) {
      const RightMomentum jr = j_right(s);
      const epaut2d::FieldState2D via{jr.varpi, jr.sigma_bar};
      ConsistencyPoint p{t, mismatch(via, direct), equivariance_residual(s, Symmetry::translation),
                         solver_.energy(via), solver_.energy(direct)};
      if (observer) observer(p);
      result.report.push_back(p);
      if (keep_trajectory) result.trajectory.emplace_back(t, jr);
    };
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    double t = 0.0;
    record(t);
    for (long k = 1; k <= steps; ++k) {
      const double h = std::min(dt, T - t);
      s = step(s, h, [&](const ClebschState& x) { return collective_rhs(x); }, t);
      direct = solver_.step(direct, h, nullptr, t);
      if (k % 50 == 0 || theta_defect(s) > 1e-8) reproject(s);
      t = (k == steps) ? T : t + h;
      if (k % stride == 0 || k == steps) record(t);
    }
    result.final_state = std::move(s);
    result.final_direct = std::move(direct);
    return result;
  }

  /// Relative L2 distance between two (varpi, sigma) states.
  double mismatch(const epaut2d::FieldState2D& a, const epaut2d::FieldState2D& ref) const
  {
    double num = (a.varpi - ref.varpi).square().sum(), den = ref.varpi.square().sum();
    for (std::size_t i = 0; i < ref.sigma.size(); ++i) {
      num += (a.sigma[i] - ref.sigma[i]).square().sum();
      den += ref.sigma[i].square().sum();
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }

  // ---- symmetries ----------------------------------------------------------

  /// state o eta for eta(x) = x + (sx dx, sy dy).
  ClebschState translate(const ClebschState& s, int sx, int sy) const
  {
    check(s);
    ClebschState out = s;
    auto shift = [&](const Field2D& f) { return shifted(f, sx, sy); };
    for (int a = 0; a < s.pairs(); ++a) {
      out.Q[a] = shift(s.Q[a]) + s.slope[a].dot(Eigen::Vector2d(sx * grid().dx(), sy * grid().dy()));
      out.P[a] = shift(s.P[a]);
    }
    for (std::size_t a = 0; a < s.sigma.size(); ++a) out.sigma[a] = shift(s.sigma[a]);
    for (std::size_t e = 0; e < s.theta.size(); ++e) out.theta[e] = shift(s.theta[e]);
    out.w = shift(s.w);
    return out;
  }

  /// state o R for the quarter turn R(x, y) = (-y, x).
  ClebschState rotate(const ClebschState& s) const
  {
    check(s);
    require_square();
    ClebschState out = s;
    for (int a = 0; a < s.pairs(); ++a) {
      out.slope[a] = {s.slope[a].y(), -s.slope[a].x()};
      out.Q[a] = rotated(s.Q[a]);
      out.P[a] = rotated(s.P[a]);
    }
    for (std::size_t a = 0; a < s.sigma.size(); ++a) out.sigma[a] = rotated(s.sigma[a]);
    for (std::size_t e = 0; e < s.theta.size(); ++e) out.theta[e] = rotated(s.theta[e]);
    out.w = rotated(s.w);
    return out;
  }

  /// max |J_R(state o eta) - eta^* J_R(state)|.
  double equivariance_residual(const ClebschState& s, Symmetry sym, int sx = 0, int sy = 0) const
  {
    if (sym == Symmetry::translation && sx == 0 && sy == 0) {
      sx = grid().nx / 4 + 1;
      sy = grid().ny / 3;
    }
    const RightMomentum base = j_right(s);
    auto pull = [&](const Field2D& f) {
      switch (sym) {
        case Symmetry::translation: return shifted(f, sx, sy);
        case Symmetry::rotation90: return rotated(f);
        default: return f;
      }
    };
    const ClebschState moved = sym == Symmetry::translation ? translate(s, sx, sy)
                               : sym == Symmetry::rotation90 ? rotate(s)
                                                             : s;
    const RightMomentum jm = j_right(moved);
    double r = (jm.varpi - pull(base.varpi)).abs().maxCoeff();
    for (std::size_t a = 0; a < base.sigma_bar.size(); ++a)
      r = std::max(r, (jm.sigma_bar[a] - pull(base.sigma_bar[a])).abs().maxCoeff());
    return r;
  }

private:
  Field2D zero() const { return Field2D::Zero(grid().nx, grid().ny); }
  bool shape_ok(const Field2D& f) const { return f.rows() == grid().nx && f.cols() == grid().ny; }

  void require_square() const
  {
    if (grid().nx != grid().ny || grid().lx != grid().ly)
      throw ValidationError("clebsch: quarter-turn symmetry needs a square grid");
  }

  static void require_partials(const TestHamiltonian& h)
  {
    if (!h.value || !h.dq || !h.dp || !h.dzeta)
      throw ValidationError("clebsch: test Hamiltonian is missing partial derivatives");
  }

  void check_variation(const Variation& v, const ClebschState& s) const
  {
    bool ok = v.Q.size() == s.Q.size() && v.P.size() == s.P.size() && v.sigma.size() == s.sigma.size() &&
              v.theta.size() == s.theta.size();
    for (const auto* group : {&v.Q, &v.P, &v.sigma, &v.theta})
      for (const auto& f : *group) ok = ok && shape_ok(f);
    if (!ok) throw ValidationError("clebsch: functional variation does not match the state shape");
  }

  MatrixXd checked_inverse(const MatrixXd& th, int node) const
  {
    Eigen::PartialPivLU<MatrixXd> lu(th);
    const double det = lu.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-12)
      throw RepresentationError("clebsch: theta is not invertible at node (" + std::to_string(node % grid().nx) +
                                ", " + std::to_string(node / grid().nx) + ")");
    return lu.inverse();
  }

  // Ad*_theta sigma: component b is <sigma, coordinates of theta e_b theta^{-1}>.
  VectorXd ad_star(const MatrixXd& th, const MatrixXd& inv, const VectorXd& sig) const
  {
    VectorXd out(spec().dim());
    for (int b = 0; b < spec().dim(); ++b) out[b] = sig.dot(spec().vee_projected(th * spec().rep_basis()[b] * inv));
    return out;
  }

  std::vector<Field2D> full_Qs(const ClebschState& s) const
  {
    std::vector<Field2D> q;
    for (int a = 0; a < s.pairs(); ++a) q.push_back(full_Q(s, a));
    return q;
  }

  std::array<VectorXd, 3> point(const ClebschState& s, const std::vector<Field2D>& q, int n) const
  {
    VectorXd qv(s.pairs()), pv(s.pairs()), zv(spec().dim());
    for (int a = 0; a < s.pairs(); ++a) {
      qv[a] = q[a].data()[n];
      pv[a] = s.P[a].data()[n];
    }
    for (int a = 0; a < spec().dim(); ++a) zv[a] = s.sigma[a].data()[n];
    return {qv, pv, zv};
  }

  ClebschState derivative_shell(const ClebschState& s) const
  {
    ClebschState d;
    d.slope.assign(s.pairs(), Eigen::Vector2d::Zero());
    d.Q.assign(s.pairs(), zero());
    d.P.assign(s.pairs(), zero());
    d.sigma.assign(s.sigma.size(), zero());
    d.theta.assign(s.theta.size(), zero());
    d.w = zero();
    return d;
  }

  Field2D shifted(const Field2D& f, int sx, int sy) const
  {
    const int nx = grid().nx, ny = grid().ny;
    Field2D out(nx, ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) out(i, j) = f(((i + sx) % nx + nx) % nx, ((j + sy) % ny + ny) % ny);
    return out;
  }

  // f'(x, y) = f(-y, x)
  Field2D rotated(const Field2D& f) const
  {
    const int n = grid().nx;
    Field2D out(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out(i, j) = f((n - j) % n, i);
    return out;
  }

  epaut2d::Solver2D solver_;
};

// ---- calibration -------------------------------------------------------------

struct CalibrationResult
{
  Convention chosen;
  std::array<Convention, 4> candidates;
  std::array<double, 4> residuals;  // worst relative residual over the probes
};

/// Relative L2 residual between d/dt J_R along collective_rhs(c) and the incompressible
/// right-hand side evaluated on J_R(state).
inline double consistency_residual(const ClebschSystem& sys, const ClebschState& s, Convention c, double eps = 1e-5)
{
  const auto x = sys.collective_rhs(s, c);
  const auto jp = sys.j_right(sys.axpy(s, eps, x));
  const auto jm = sys.j_right(sys.axpy(s, -eps, x));
  const auto j0 = sys.j_right(s);
  epaut2d::FieldState2D rate{(jp.varpi - jm.varpi) / (2 * eps), {}};
  for (std::size_t a = 0; a < jp.sigma_bar.size(); ++a) rate.sigma.push_back((jp.sigma_bar[a] - jm.sigma_bar[a]) / (2 * eps));
  const auto target = sys.solver().rhs({j0.varpi, j0.sigma_bar});
  return sys.mismatch(rate, target);
}

/// Sign/frame probes: an abelian state (fixes the sign) and an so(3) state with a
/// non-trivial theta (fixes the frame of zeta).
inline std::vector<std::pair<ClebschSystem, ClebschState>> calibration_probes(int n = 32)
{
  const Grid2D g(2 * std::numbers::pi, 2 * std::numbers::pi, n, n);
  std::vector<std::pair<ClebschSystem, ClebschState>> out;
  {
    ClebschSystem sys(g, LieAlgebraSpec::abelian(1));
    auto s = sys.make_state(1);
    s.slope[0] = {1.0, 0.0};
    s.P[0] = g.sample([](double x, double y) { return std::cos(y) + 0.5 * std::sin(x + y); });
    s.sigma[0] = g.sample([](double x, double) { return std::cos(x); });
    sys.set_theta_exp(s, {g.sample([](double, double y) { return 0.3 * std::sin(y); })});
    out.emplace_back(std::move(sys), std::move(s));
  }
  {
    ClebschSystem sys(g, LieAlgebraSpec::so3());
    auto s = sys.make_state(1);
    s.slope[0] = {1.0, 0.0};
    s.P[0] = g.sample([](double x, double y) { return std::cos(y) + 0.5 * std::sin(x + y); });
    s.sigma[0] = g.sample([](double x, double) { return 0.8 + std::cos(x); });
    s.sigma[1] = g.sample([](double, double y) { return 0.5 * std::sin(y); });
    s.sigma[2] = g.sample([](double x, double y) { return 0.3 * std::cos(x - y); });
    sys.set_theta_exp(s, {g.sample([](double x, double) { return 0.7 * std::sin(x); }),
                          g.sample([](double, double y) { return 0.4 * std::cos(y); }),
                          g.sample([](double x, double y) { return 0.5 * std::sin(x + y); })});
    out.emplace_back(std::move(sys), std::move(s));
  }
  return out;
}

inline CalibrationResult calibrate(int n = 32)
{
  CalibrationResult r{kCalibrated,
                      {Convention{+1, ZetaFrame::direct}, Convention{+1, ZetaFrame::pulled_back},
                       Convention{-1, ZetaFrame::direct}, Convention{-1, ZetaFrame::pulled_back}},
                      {0.0, 0.0, 0.0, 0.0}};
  const auto probes = calibration_probes(n);
  for (int c = 0; c < 4; ++c)
    for (const auto& [sys, s] : probes)
      r.residuals[c] = std::max(r.residuals[c], consistency_residual(sys, s, r.candidates[c]));
  int best = 0;
  for (int c = 1; c < 4; ++c)
    if (r.residuals[c] < r.residuals[best]) best = c;
  r.chosen = r.candidates[best];
  return r;
}

// ---- seeds -------------------------------------------------------------------

/// Random zero-mean trigonometric field with |k_x|, |k_y| <= kmax and amplitudes ~ amp e^{-|k|/2}.
inline Field2D band_limited(const Grid2D& g, std::mt19937_64& rng, int kmax, double amp)
{
  std::normal_distribution<double> n(0.0, 1.0);
  Field2D f = Field2D::Zero(g.nx, g.ny);
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      const double s = amp * std::exp(-0.5 * std::hypot(kx, ky));
      const double a = s * n(rng), b = s * n(rng);
      const double wx = 2 * std::numbers::pi * kx / g.lx, wy = 2 * std::numbers::pi * ky / g.ly;
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          const double p = wx * g.x(i) + wy * g.y(j);
          f(i, j) += a * std::cos(p) + b * std::sin(p);
        }
    }
  return f;
}

/// k = 1, Q = x, random band-limited P; sigma = 0 unless charge_amp > 0, in which case
/// sigma and the phases of theta are random band-limited as well.
inline ClebschState shear_seed(const ClebschSystem& sys, std::uint64_t seed, int kmax = 3, double amp = 1.0,
                               double charge_amp = 0.0)
{
  std::mt19937_64 rng(seed);
  const auto& g = sys.grid();
  auto s = sys.make_state(1);
  s.slope[0] = {1.0, 0.0};
  s.P[0] = band_limited(g, rng, kmax, amp);
  if (charge_amp > 0.0) {
    std::vector<Field2D> phi;
    for (int a = 0; a < sys.spec().dim(); ++a) {
      s.sigma[a] = band_limited(g, rng, kmax, charge_amp);
      phi.push_back(band_limited(g, rng, kmax, 0.5 * charge_amp));
    }
    sys.set_theta_exp(s, phi);
  }
  return s;
}

/// Random band-limited periodic parts for every field, slopes e_x, e_y alternating.
inline ClebschState random_seed(const ClebschSystem& sys, std::uint64_t seed, int k = 2, int kmax = 3, double amp = 0.5)
{
  std::mt19937_64 rng(seed);
  const auto& g = sys.grid();
  auto s = sys.make_state(k);
  for (int a = 0; a < k; ++a) {
    s.slope[a] = a % 2 ? Eigen::Vector2d(0.0, 1.0) : Eigen::Vector2d(1.0, 0.0);
    s.Q[a] = band_limited(g, rng, kmax, amp);
    s.P[a] = band_limited(g, rng, kmax, amp);
  }
  std::vector<Field2D> phi;
  for (int a = 0; a < sys.spec().dim(); ++a) {
    s.sigma[a] = band_limited(g, rng, kmax, amp);
    phi.push_back(band_limited(g, rng, kmax, amp));
  }
  sys.set_theta_exp(s, phi);
  return s;
}

/// Exact one-form: Q = x + q, P = a sin(Q), constant sigma, theta = exp(phi e_0).
inline ClebschState pure_gauge_seed(const ClebschSystem& sys, std::uint64_t seed, int kmax = 3)
{
  std::mt19937_64 rng(seed);
  const auto& g = sys.grid();
  if (g.lx != 2 * std::numbers::pi) throw ValidationError("clebsch: the pure-gauge seed needs a 2*pi-periodic x");
  auto s = sys.make_state(1);
  s.slope[0] = {1.0, 0.0};
  s.Q[0] = band_limited(g, rng, kmax, 0.3);
  s.P[0] = 0.8 * sys.full_Q(s, 0).sin();
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Field2D> phi(sys.spec().dim(), Field2D::Zero(g.nx, g.ny));
  phi[0] = band_limited(g, rng, kmax, 0.2);
  for (auto& f : s.sigma) f.setConstant(n(rng));
  sys.set_theta_exp(s, phi);
  return s;
}

// ---- three-dimensional formula evaluation ------------------------------------

/// Clebsch data sampled on an n^3 periodic cube; fields are indexed i + n (j + n k).
struct Sampled3D
{
  int n;
  double length;
  std::vector<Eigen::Vector3d> slope;
  std::vector<VectorXd> Q, P, sigma, theta;
};

struct RightMomentum3D
{
  std::array<VectorXd, 3> curl;
  std::vector<VectorXd> sigma_bar;
};

/// curl(sum_a P_a grad Q^a + <sigma, (grad theta) theta^{-1}>) and Ad*_theta sigma on a cube.
inline RightMomentum3D j_right_3d(const Sampled3D& s, const LieAlgebraSpec& spec)
{
  const int n = s.n, n3 = n * n * n, r = spec.rep_dim(), d = spec.dim();
  const int k = static_cast<int>(s.Q.size());
  bool ok = n >= 4 && s.length > 0.0 && static_cast<int>(s.slope.size()) == k && static_cast<int>(s.P.size()) == k &&
            static_cast<int>(s.sigma.size()) == d && static_cast<int>(s.theta.size()) == r * r;
  for (const auto* group : {&s.Q, &s.P, &s.sigma, &s.theta})
    for (const auto& f : *group) ok = ok && f.size() == n3;
  if (!ok) throw ValidationError("clebsch: 3D sample shape mismatch");

  const spectral::Transform1D t(n, s.length);
  const std::array<int, 3> stride{1, n, n * n};
  auto partial = [&](const VectorXd& f, int axis) {
    VectorXd out(n3);
    std::vector<double> line(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        // base index of the line along `axis` through the other two coordinates (a, b)
        const int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
        const int base = a * stride[o1] + b * stride[o2];
        for (int i = 0; i < n; ++i) line[i] = f[base + i * stride[axis]];
        const auto dl = t.derivative(line);
        for (int i = 0; i < n; ++i) out[base + i * stride[axis]] = dl[i];
      }
    return out;
  };

  std::array<VectorXd, 3> alpha;
  for (int c = 0; c < 3; ++c) alpha[c] = VectorXd::Zero(n3);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < 3; ++c) alpha[c] += s.P[a].cwiseProduct(partial(s.Q[a], c) + VectorXd::Constant(n3, s.slope[a][c]));
  std::array<std::vector<VectorXd>, 3> dtheta;
  for (int c = 0; c < 3; ++c)
    for (const auto& e : s.theta) dtheta[c].push_back(partial(e, c));

  RightMomentum3D out;
  out.sigma_bar.assign(d, VectorXd::Zero(n3));
  MatrixXd th(r, r), dm(r, r);
  VectorXd sig(d);
  for (int p = 0; p < n3; ++p) {
    for (int e = 0; e < r * r; ++e) th.data()[e] = s.theta[e][p];
    Eigen::PartialPivLU<MatrixXd> lu(th);
    if (!(std::abs(lu.determinant()) > 1e-12)) throw RepresentationError("clebsch: theta is not invertible");
    const MatrixXd inv = lu.inverse();
    for (int a = 0; a < d; ++a) sig[a] = s.sigma[a][p];
    for (int c = 0; c < 3; ++c) {
      for (int e = 0; e < r * r; ++e) dm.data()[e] = dtheta[c][e][p];
      alpha[c][p] += sig.dot(spec.vee_projected(dm * inv));
    }
    for (int b = 0; b < d; ++b) out.sigma_bar[b][p] = sig.dot(spec.vee_projected(th * spec.rep_basis()[b] * inv));
  }
  out.curl[0] = partial(alpha[2], 1) - partial(alpha[1], 2);
  out.curl[1] = partial(alpha[0], 2) - partial(alpha[2], 0);
  out.curl[2] = partial(alpha[1], 0) - partial(alpha[0], 1);
  return out;
}

}  // namespace epaut::clebsch
