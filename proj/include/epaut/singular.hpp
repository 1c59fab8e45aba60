#pragma once

// Charged peakons: N point particles (Q_i, P_i, mu_i) on R^n carrying charges
// in the coalgebra, evolved by the collective Hamiltonian
//
//   H = 1/2 sum_ij G1(|Q_i - Q_j|) Pt_i . Pt_j + 1/2 sum_ij G2(|Q_i - Q_j|) <mu_i, mu_j>_{gamma^-1},
//   Pt_i = P_i - mu_i . A(Q_i),
//
// obtained by substituting the singular momentum map into the Green's function
// Hamiltonian. Q, P evolve canonically, mu on its coadjoint orbit.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "lie.hpp"

namespace epaut::singular {

using lie::LieAlgebraSpec;

struct ParticleState
{
  Eigen::MatrixXd Q;   // N x n
  Eigen::MatrixXd P;   // N x n
  Eigen::MatrixXd mu;  // N x dim
  std::optional<std::vector<Eigen::MatrixXd>> theta;

  int count() const { return static_cast<int>(Q.rows()); }
  int space_dim() const { return static_cast<int>(Q.cols()); }
  int charge_dim() const { return static_cast<int>(mu.cols()); }

  static ParticleState zeros(int n_particles, int n, int dim)
  {
    return {Eigen::MatrixXd::Zero(n_particles, n), Eigen::MatrixXd::Zero(n_particles, n),
            Eigen::MatrixXd::Zero(n_particles, dim), std::nullopt};
  }
};

/// Static o-valued one-form A(x), stored as an n x dim matrix A(x)(a, b).
///
/// gradient(x)[c] is the matrix of partial derivatives d A / d x_c.
struct MagneticPotential
{
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> value;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> gradient;
  std::string descriptor;

  static MagneticPotential zero(int n, int dim)
  {
    return {[n, dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(n, dim); },
            [n, dim](const Eigen::VectorXd&) { return std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, dim)); },
            "zero"};
  }

  static MagneticPotential constant(Eigen::MatrixXd a)
  {
    const auto n = a.rows(), dim = a.cols();
    return {[a](const Eigen::VectorXd&) { return a; },
            [n, dim](const Eigen::VectorXd&) {
              return std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, dim));
            },
            "constant"};
  }

  /// A(x)(a, b) = amplitude(a, b) * sin(k . x + phase(a, b)).
  static MagneticPotential sinusoidal(Eigen::MatrixXd amplitude, Eigen::VectorXd k, Eigen::MatrixXd phase)
  {
    if (amplitude.rows() != k.size() || phase.rows() != amplitude.rows() || phase.cols() != amplitude.cols())
      throw ValidationError("singular: inconsistent sinusoidal potential shapes");
    auto value = [amplitude, k, phase](const Eigen::VectorXd& x) {
      const double s = k.dot(x);
      Eigen::MatrixXd a(amplitude.rows(), amplitude.cols());
      for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) a(i, j) = amplitude(i, j) * std::sin(s + phase(i, j));
      return a;
    };
    auto gradient = [amplitude, k, phase](const Eigen::VectorXd& x) {
      const double s = k.dot(x);
      std::vector<Eigen::MatrixXd> g(k.size(), Eigen::MatrixXd(amplitude.rows(), amplitude.cols()));
      for (int c = 0; c < k.size(); ++c)
        for (int i = 0; i < amplitude.rows(); ++i)
          for (int j = 0; j < amplitude.cols(); ++j) g[c](i, j) = k[c] * amplitude(i, j) * std::cos(s + phase(i, j));
      return g;
    };
    return {value, gradient, "sinusoidal"};
  }
};

/// Largest relative mismatch between A.gradient and central differences of A.value.
inline double gradient_mismatch(const MagneticPotential& a, const std::vector<Eigen::VectorXd>& probes, double h = 1e-5)
{
  double worst = 0.0;
  for (const auto& x : probes) {
    const auto g = a.gradient(x);
    for (int c = 0; c < x.size(); ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Eigen::MatrixXd fd = (a.value(xp) - a.value(xm)) / (2 * h);
      const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
      worst = std::max(worst, (g[c] - fd).cwiseAbs().maxCoeff() / scale);
    }
  }
  return worst;
}

/// Everything that defines the vector field besides the state.
struct PeakonModel
{
  kernels::Kernel g1;
  kernels::Kernel g2;
  MagneticPotential potential;
  LieAlgebraSpec spec;
};

struct Gradients
{
  Eigen::MatrixXd dQ, dP, dmu;
};

namespace detail {

inline void check(const ParticleState& s, const PeakonModel& m)
{
  const auto n = s.Q.rows();
  if (s.P.rows() != n || s.mu.rows() != n || s.P.cols() != s.Q.cols())
    throw ValidationError("singular: Q, P and mu must have matching shapes");
  if (s.mu.cols() != m.spec.dim())
    throw ValidationError("singular: charges have " + std::to_string(s.mu.cols()) + " components, algebra dim is " +
                          std::to_string(m.spec.dim()));
  if (!m.g1.has_profile() || !m.g2.has_profile())
    throw ValidationError("singular: particle kernels need a pointwise profile");
  if (s.theta && static_cast<Eigen::Index>(s.theta->size()) != n)
    throw ValidationError("singular: theta must hold one group element per particle");
}

inline double radius(const Eigen::VectorXd& d) { return d.norm(); }

// Gradient of the radial kernel at displacement d, zero at the origin.
inline Eigen::VectorXd radial_grad(const kernels::Kernel& k, const Eigen::VectorXd& d)
{
  const double r = d.norm();
  if (r == 0.0) return Eigen::VectorXd::Zero(d.size());
  return k.derivative(r) / r * d;
}

// Particle sums run in lexicographic order of (Q, P, mu) rather than label
// order, so relabeling the particles permutes the results bit for bit.
inline std::vector<int> canonical_order(const ParticleState& s)
{
  std::vector<int> order(s.count());
  for (int i = 0; i < s.count(); ++i) order[i] = i;
  auto key = [&](int i) {
    std::vector<double> k;
    for (const auto* m : {&s.Q, &s.P, &s.mu})
      for (int c = 0; c < m->cols(); ++c) k.push_back((*m)(i, c));
    return k;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  return order;
}

// Shared intermediate quantities of H and its gradients.
struct Pieces
{
  std::vector<int> order;
  Eigen::MatrixXd shifted;  // Pt_i
  Eigen::MatrixXd u;        // U_i = sum_j G1_ij Pt_j
  Eigen::MatrixXd gmu;      // gamma^{-1} mu_i
  Eigen::MatrixXd charge;   // sum_j G2_ij gamma^{-1} mu_j
  std::vector<Eigen::MatrixXd> a;
};

inline Pieces pieces(const ParticleState& s, const PeakonModel& m)
{
  const int n = s.count();
  Pieces p;
  p.order = canonical_order(s);
  p.shifted = s.P;
  p.a.reserve(n);
  for (int i = 0; i < n; ++i) {
    p.a.push_back(m.potential.value(s.Q.row(i).transpose()));
    p.shifted.row(i) -= (p.a.back() * s.mu.row(i).transpose()).transpose();
  }
  p.gmu = s.mu * m.spec.gamma_inv();  // gamma_inv symmetric
  p.u = Eigen::MatrixXd::Zero(n, s.space_dim());
  p.charge = Eigen::MatrixXd::Zero(n, s.charge_dim());
  for (int i = 0; i < n; ++i)
    for (int j : p.order) {
      const double r = radius(s.Q.row(i) - s.Q.row(j));
      p.u.row(i) += m.g1.value(r) * p.shifted.row(j);
      p.charge.row(i) += m.g2.value(r) * p.gmu.row(j);
    }
  return p;
}

}  // namespace detail

inline double collective_hamiltonian(const ParticleState& s, const PeakonModel& m)
{
  detail::check(s, m);
  const auto p = detail::pieces(s, m);
  double h = 0.0;
  for (int i : p.order) h += p.shifted.row(i).dot(p.u.row(i)) + s.mu.row(i).dot(p.charge.row(i));
  return 0.5 * h;
}

inline Gradients hamiltonian_gradients(const ParticleState& s, const PeakonModel& m)
{
  detail::check(s, m);
  const int n = s.count(), dim = s.space_dim();
  const auto p = detail::pieces(s, m);
  Gradients g;
  g.dP = p.u;
  g.dmu.resize(n, s.charge_dim());
  for (int i = 0; i < n; ++i)
    g.dmu.row(i) = p.charge.row(i) - (p.a[i].transpose() * p.u.row(i).transpose()).transpose();

  g.dQ = Eigen::MatrixXd::Zero(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j : p.order) {
      if (i == j) continue;
      const Eigen::VectorXd d = s.Q.row(i) - s.Q.row(j);
      const double pp = p.shifted.row(i).dot(p.shifted.row(j));
      const double mm = s.mu.row(i).dot(p.gmu.row(j));
      g.dQ.row(i) += (detail::radial_grad(m.g1, d) * pp + detail::radial_grad(m.g2, d) * mm).transpose();
    }
    const auto da = m.potential.gradient(s.Q.row(i).transpose());
    for (int c = 0; c < dim; ++c) g.dQ(i, c) -= p.u.row(i).dot(da[c] * s.mu.row(i).transpose());
  }
  return g;
}

/// Time derivative of the full state, theta included when present.
inline ParticleState rhs(const ParticleState& s, const PeakonModel& m)
{
  const auto g = hamiltonian_gradients(s, m);
  ParticleState d{g.dP, -g.dQ, Eigen::MatrixXd(s.count(), s.charge_dim()), std::nullopt};
  for (int i = 0; i < s.count(); ++i) {
    const lie::AlgebraElement zeta{g.dmu.row(i).transpose()};
    d.mu.row(i) = -lie::ad_star(m.spec, zeta, {s.mu.row(i).transpose()}).coeffs.transpose();
  }
  if (s.theta) {
    // Left multiplication transports the body charge Ad*_theta mu unchanged.
    std::vector<Eigen::MatrixXd> dt;
    dt.reserve(s.count());
    for (int i = 0; i < s.count(); ++i) {
      const Eigen::VectorXd z = g.dmu.row(i).transpose();
      dt.push_back(m.spec.hat({z.data(), static_cast<std::size_t>(z.size())}) * (*s.theta)[i]);
    }
    d.theta = std::move(dt);
  }
  return d;
}

namespace detail {

inline ParticleState axpy(const ParticleState& x, double a, const ParticleState& y)
{
  ParticleState r{x.Q + a * y.Q, x.P + a * y.P, x.mu + a * y.mu, std::nullopt};
  if (x.theta) {
    std::vector<Eigen::MatrixXd> t(x.theta->size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (*x.theta)[i] + a * (*y.theta)[i];
    r.theta = std::move(t);
  }
  return r;
}

inline bool finite(const ParticleState& s)
{
  if (!s.Q.allFinite() || !s.P.allFinite() || !s.mu.allFinite()) return false;
  if (s.theta)
    for (const auto& t : *s.theta)
      if (!t.allFinite()) return false;
  return true;
}

}  // namespace detail

inline ParticleState step_rk4(const ParticleState& s, const PeakonModel& m, double dt, double t = 0.0)
{
  if (!(dt > 0.0)) throw ValidationError("singular: dt must be positive");
  const auto k1 = rhs(s, m);
  const auto k2 = rhs(detail::axpy(s, 0.5 * dt, k1), m);
  const auto k3 = rhs(detail::axpy(s, 0.5 * dt, k2), m);
  const auto k4 = rhs(detail::axpy(s, dt, k3), m);
  auto out = detail::axpy(s, dt / 6.0, k1);
  out = detail::axpy(out, dt / 3.0, k2);
  out = detail::axpy(out, dt / 3.0, k3);
  out = detail::axpy(out, dt / 6.0, k4);
  if (!detail::finite(out)) throw IntegrationError("singular: non-finite state", t + dt);
  return out;
}

struct Sample
{
  double t;
  ParticleState state;
};

using Observer = std::function<void(double, const ParticleState&)>;

/// Integrates to T in steps of dt (the last step is shortened to land on T).
/// Samples every `stride` steps plus the final state; observers see the same samples.
inline std::vector<Sample> run(ParticleState s, const PeakonModel& m, double dt, double T, int stride = 1,
                               const std::vector<Observer>& observers = {})
{
  if (!(dt > 0.0)) throw ValidationError("singular: dt must be positive");
  if (T < 0.0) throw ValidationError("singular: final time must be non-negative");
  if (stride < 1) throw ValidationError("singular: stride must be at least 1");
  std::vector<Sample> out;
  auto record = [&](double t) {
    for (const auto& obs : observers) obs(t, s);
    out.push_back({t, s});
  };
  const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
  double t = 0.0;
  record(t);
  for (long k = 1; k <= steps; ++k) {
    const double h = std::min(dt, T - t);
    s = step_rk4(s, m, h, t);
    t = (k == steps) ? T : t + h;
    if (k % stride == 0 || k == steps) record(t);
  }
  return out;
}

/// Body-frame charges Ad*_theta_i mu_i, conserved along exact trajectories.
inline Eigen::MatrixXd noether_charges(const ParticleState& s, const LieAlgebraSpec& spec)
{
  if (!s.theta) throw ValidationError("singular: noether charges need reconstructed group elements");
  Eigen::MatrixXd c(s.count(), s.charge_dim());
  for (int i = 0; i < s.count(); ++i)
    c.row(i) = lie::Ad_star(spec, {(*s.theta)[i]}, {s.mu.row(i).transpose()}).coeffs.transpose();
  return c;
}

/// Attach identity group elements to every particle.
inline ParticleState with_identity_theta(ParticleState s, const LieAlgebraSpec& spec)
{
  s.theta = std::vector<Eigen::MatrixXd>(s.count(), Eigen::MatrixXd::Identity(spec.rep_dim(), spec.rep_dim()));
  return s;
}

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Pairing of the singular momentum map with a test pair (w, xi); with a
/// potential the momenta are shifted to P_i - mu_i . A(Q_i).
inline double j_left_pair(const ParticleState& s, const VectorField& w, const VectorField& xi,
                          const MagneticPotential* potential = nullptr)
{
  double acc = 0.0;
  for (int i = 0; i < s.count(); ++i) {
    const Eigen::VectorXd q = s.Q.row(i).transpose();
    Eigen::VectorXd p = s.P.row(i).transpose();
    if (potential) p -= potential->value(q) * s.mu.row(i).transpose();
    acc += p.dot(w(q)) + s.mu.row(i).dot(xi(q));
  }
  return acc;
}

using PhaseFunction = std::function<Gradients(const ParticleState&)>;

/// Canonical bracket in (Q, P) plus the Lie-Poisson bracket in each mu_i.
inline double reduced_bracket(const PhaseFunction& f, const PhaseFunction& g, const ParticleState& s,
                              const LieAlgebraSpec& spec)
{
  if (!f || !g) throw ValidationError("singular: bracket needs both partial-derivative functions");
  const auto df = f(s), dg = g(s);
  double acc = (df.dQ.array() * dg.dP.array()).sum() - (df.dP.array() * dg.dQ.array()).sum();
  for (int i = 0; i < s.count(); ++i) {
    const auto b = lie::bracket(spec, {df.dmu.row(i).transpose()}, {dg.dmu.row(i).transpose()});
    acc += s.mu.row(i).dot(b.coeffs);
  }
  return acc;
}

}  // namespace epaut::singular
