#pragma once

// Finite-dimensional Lie algebra kernel: brackets, coadjoint operators,
// adjoint actions and exponentials for the structure group O.
//
// Conventions
// -----------
//   [e_i, e_j] = sum_k c(i,j,k) e_k
//   <mu, xi>   = sum_i mu_i xi_i          (dual basis, no metric)
//   <ad*_xi mu, eta> = <mu, [xi, eta]>    =>  (ad*_xi mu)_j = sum_{i,k} c(i,j,k) xi_i mu_k
//   <Ad*_g mu, xi>   = <mu, Ad_g xi>,     Ad_g xi = g xi g^{-1}
//
// gamma only enters through inner products on o (Kaluza-Klein norms).

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace epaut::lie {

/// Element of o, coefficients in the basis e_i.
struct AlgebraElement
{
  Eigen::VectorXd coeffs;
};

/// Element of o*, coefficients in the dual basis.
struct CoalgebraElement
{
  Eigen::VectorXd coeffs;
};

/// Element of O in its matrix representation.
struct GroupElement
{
  Eigen::MatrixXd matrix;
};

/// Tolerance used when expanding a matrix in the representation basis.
inline constexpr double kRepresentationTolerance = 1e-9;

class LieAlgebraSpec
{
public:
  LieAlgebraSpec(int dim,
                 std::vector<double> structure_constants,
                 Eigen::MatrixXd gamma,
                 int rep_dim,
                 std::vector<Eigen::MatrixXd> rep_basis,
                 bool ad_invariant = false,
                 std::string name = "custom")
    : dim_(dim)
    , c_(std::move(structure_constants))
    , gamma_(std::move(gamma))
    , rep_dim_(rep_dim)
    , rep_basis_(std::move(rep_basis))
    , ad_invariant_(ad_invariant)
    , name_(std::move(name))
  {
    if (dim_ < 1) throw ValidationError("lie: dim must be positive");
    if (rep_dim_ < 1) throw ValidationError("lie: rep_dim must be positive");
    if (static_cast<int>(c_.size()) != dim_ * dim_ * dim_)
      throw ValidationError("lie: structure constants need dim^3 entries");
    if (gamma_.rows() != dim_ || gamma_.cols() != dim_)
      throw ValidationError("lie: gamma must be dim x dim");
    if (static_cast<int>(rep_basis_.size()) != dim_)
      throw ValidationError("lie: rep_basis needs dim matrices");
    for (const auto& b : rep_basis_)
      if (b.rows() != rep_dim_ || b.cols() != rep_dim_)
        throw ValidationError("lie: rep_basis matrices must be rep_dim x rep_dim");

    Eigen::LLT<Eigen::MatrixXd> llt(gamma_);
    if (llt.info() != Eigen::Success) throw ValidationError("lie: gamma is not positive definite");
    gamma_inv_ = llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));

    const int r2 = rep_dim_ * rep_dim_;
    basis_columns_.resize(r2, dim_);
    for (int i = 0; i < dim_; ++i)
      basis_columns_.col(i) = Eigen::Map<const Eigen::VectorXd>(rep_basis_[i].data(), r2);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis_columns_);
    if (cod.rank() != dim_) throw ValidationError("lie: rep_basis is linearly dependent");
    expansion_ = cod.pseudoInverse();

    orthogonal_ = true;
    for (const auto& b : rep_basis_)
      if ((b + b.transpose()).cwiseAbs().maxCoeff() > 1e-14) orthogonal_ = false;
  }

  /// O = R^k (or a torus), diagonal representation, gamma = identity.
  static LieAlgebraSpec abelian(int k)
  {
    if (k < 1) throw ValidationError("lie: abelian(k) needs k >= 1");
    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < k; ++i) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
      b(i, i) = 1.0;
      basis.push_back(b);
    }
    return LieAlgebraSpec(k, std::vector<double>(k * k * k, 0.0), Eigen::MatrixXd::Identity(k, k), k,
                          std::move(basis), true, "abelian" + std::to_string(k));
  }

  /// O = SO(3): [e_i, e_j] = eps_ijk e_k, 3x3 antisymmetric basis, gamma = identity.
  static LieAlgebraSpec so3()
  {
    std::vector<double> c(27, 0.0);
    auto set = [&](int i, int j, int k, double v) { c[(i * 3 + j) * 3 + k] = v; };
    set(0, 1, 2, 1.0);
    set(1, 2, 0, 1.0);
    set(2, 0, 1, 1.0);
    set(1, 0, 2, -1.0);
    set(2, 1, 0, -1.0);
    set(0, 2, 1, -1.0);
    std::vector<Eigen::MatrixXd> basis(3, Eigen::MatrixXd::Zero(3, 3));
    // hat(e_x): rotation generator about x
    basis[0](1, 2) = -1.0;
    basis[0](2, 1) = 1.0;
    basis[1](0, 2) = 1.0;
    basis[1](2, 0) = -1.0;
    basis[2](0, 1) = -1.0;
    basis[2](1, 0) = 1.0;
    return LieAlgebraSpec(3, std::move(c), Eigen::MatrixXd::Identity(3, 3), 3, std::move(basis), true, "so3");
  }

  int dim() const noexcept { return dim_; }
  int rep_dim() const noexcept { return rep_dim_; }
  const std::string& name() const noexcept { return name_; }
  bool ad_invariant() const noexcept { return ad_invariant_; }
  /// True when every basis matrix is antisymmetric, so the group is orthogonal.
  bool orthogonal() const noexcept { return orthogonal_; }
  bool is_abelian() const
  {
    for (double v : c_)
      if (v != 0.0) return false;
    return true;
  }

  double c(int i, int j, int k) const { return c_[(i * dim_ + j) * dim_ + k]; }
  const std::vector<double>& structure_constants() const noexcept { return c_; }
  const Eigen::MatrixXd& gamma() const noexcept { return gamma_; }
  const Eigen::MatrixXd& gamma_inv() const noexcept { return gamma_inv_; }
  const std::vector<Eigen::MatrixXd>& rep_basis() const noexcept { return rep_basis_; }

  // Raw kernels for hot loops; spans must have length dim().

  void bracket_into(std::span<const double> xi, std::span<const double> eta, std::span<double> out) const
  {
    for (int k = 0; k < dim_; ++k) out[k] = 0.0;
    for (int i = 0; i < dim_; ++i) {
      if (xi[i] == 0.0) continue;
      for (int j = 0; j < dim_; ++j) {
        const double w = xi[i] * eta[j];
        if (w == 0.0) continue;
        const double* row = &c_[(i * dim_ + j) * dim_];
        for (int k = 0; k < dim_; ++k) out[k] += row[k] * w;
      }
    }
  }

  void ad_star_into(std::span<const double> xi, std::span<const double> mu, std::span<double> out) const
  {
    for (int j = 0; j < dim_; ++j) out[j] = 0.0;
    for (int i = 0; i < dim_; ++i) {
      if (xi[i] == 0.0) continue;
      for (int j = 0; j < dim_; ++j) {
        const double* row = &c_[(i * dim_ + j) * dim_];
        double s = 0.0;
        for (int k = 0; k < dim_; ++k) s += row[k] * mu[k];
        out[j] += xi[i] * s;
      }
    }
  }

  /// sum_i xi_i rep_basis[i]
  Eigen::MatrixXd hat(std::span<const double> xi) const
  {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rep_dim_, rep_dim_);
    for (int i = 0; i < dim_; ++i)
      if (xi[i] != 0.0) m += xi[i] * rep_basis_[i];
    return m;
  }

  /// Inverse of hat(); throws RepresentationError when x is not in the span of the basis.
  Eigen::VectorXd vee(const Eigen::MatrixXd& x) const
  {
    const Eigen::Map<const Eigen::VectorXd> flat(x.data(), x.size());
    Eigen::VectorXd coeffs = expansion_ * flat;
    const double residual = (basis_columns_ * coeffs - flat).norm();
    if (residual > kRepresentationTolerance * std::max(1.0, flat.norm()))
      throw RepresentationError("lie: matrix is not in the span of rep_basis (residual " +
                                std::to_string(residual) + ")");
    return coeffs;
  }

  /// Least-squares coordinates of x in the basis, without the membership check.
  Eigen::VectorXd vee_projected(const Eigen::MatrixXd& x) const
  {
    return expansion_ * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  }

private:
  int dim_;
  std::vector<double> c_;
  Eigen::MatrixXd gamma_;
  Eigen::MatrixXd gamma_inv_;
  int rep_dim_;
  std::vector<Eigen::MatrixXd> rep_basis_;
  bool ad_invariant_;
  std::string name_;
  bool orthogonal_ = false;
  Eigen::MatrixXd basis_columns_;
  Eigen::MatrixXd expansion_;
};

namespace detail {
inline void check_dim(const LieAlgebraSpec& spec, const Eigen::VectorXd& v, const char* what)
{
  if (v.size() != spec.dim())
    throw ValidationError(std::string("lie: ") + what + " has " + std::to_string(v.size()) +
                          " coefficients, algebra dim is " + std::to_string(spec.dim()));
}
inline std::span<const double> view(const Eigen::VectorXd& v) { return {v.data(), static_cast<size_t>(v.size())}; }
}  // namespace detail

inline AlgebraElement bracket(const LieAlgebraSpec& spec, const AlgebraElement& xi, const AlgebraElement& eta)
{
  detail::check_dim(spec, xi.coeffs, "xi");
  detail::check_dim(spec, eta.coeffs, "eta");
  AlgebraElement out{Eigen::VectorXd(spec.dim())};
  spec.bracket_into(detail::view(xi.coeffs), detail::view(eta.coeffs), {out.coeffs.data(), static_cast<size_t>(out.coeffs.size())});
  return out;
}

inline CoalgebraElement ad_star(const LieAlgebraSpec& spec, const AlgebraElement& xi, const CoalgebraElement& mu)
{
  detail::check_dim(spec, xi.coeffs, "xi");
  detail::check_dim(spec, mu.coeffs, "mu");
  CoalgebraElement out{Eigen::VectorXd(spec.dim())};
  spec.ad_star_into(detail::view(xi.coeffs), detail::view(mu.coeffs), {out.coeffs.data(), static_cast<size_t>(out.coeffs.size())});
  return out;
}

inline double pairing(const CoalgebraElement& mu, const AlgebraElement& xi)
{
  if (mu.coeffs.size() != xi.coeffs.size()) throw ValidationError("lie: pairing dimension mismatch");
  return mu.coeffs.dot(xi.coeffs);
}

/// gamma(xi, eta)
inline double inner(const LieAlgebraSpec& spec, const AlgebraElement& xi, const AlgebraElement& eta)
{
  detail::check_dim(spec, xi.coeffs, "xi");
  detail::check_dim(spec, eta.coeffs, "eta");
  return xi.coeffs.dot(spec.gamma() * eta.coeffs);
}

/// Matrix of Ad_g in the basis e_i (column i is Ad_g e_i).
inline Eigen::MatrixXd adjoint_matrix(const LieAlgebraSpec& spec, const GroupElement& g)
{
  if (g.matrix.rows() != spec.rep_dim() || g.matrix.cols() != spec.rep_dim())
    throw ValidationError("lie: group element has wrong size");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(g.matrix);
  const double det = lu.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-300) throw RepresentationError("lie: singular group element");
  const Eigen::MatrixXd ginv = lu.inverse();
  Eigen::MatrixXd ad(spec.dim(), spec.dim());
  for (int i = 0; i < spec.dim(); ++i) ad.col(i) = spec.vee(g.matrix * spec.rep_basis()[i] * ginv);
  return ad;
}

inline AlgebraElement Ad(const LieAlgebraSpec& spec, const GroupElement& g, const AlgebraElement& xi)
{
  detail::check_dim(spec, xi.coeffs, "xi");
  return {adjoint_matrix(spec, g) * xi.coeffs};
}

inline CoalgebraElement Ad_star(const LieAlgebraSpec& spec, const GroupElement& g, const CoalgebraElement& mu)
{
  detail::check_dim(spec, mu.coeffs, "mu");
  return {adjoint_matrix(spec, g).transpose() * mu.coeffs};
}

/// Matrix exponential by scaling and squaring around a degree-18 Taylor core.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& x)
{
  const int n = static_cast<int>(x.rows());
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
  const Eigen::MatrixXd a = x / std::ldexp(1.0, squarings);

  // Horner form of sum_{k<=18} a^k / k!
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  for (int k = 18; k >= 1; --k) result = Eigen::MatrixXd::Identity(n, n) + (a * result) / static_cast<double>(k);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

inline GroupElement exp(const LieAlgebraSpec& spec, const AlgebraElement& xi)
{
  detail::check_dim(spec, xi.coeffs, "xi");
  return {expm(spec.hat(detail::view(xi.coeffs)))};
}

inline GroupElement identity(const LieAlgebraSpec& spec)
{
  return {Eigen::MatrixXd::Identity(spec.rep_dim(), spec.rep_dim())};
}

/// Residuals of the algebraic invariants of a spec.
struct ValidationReport
{
  double antisymmetry = 0.0;
  double jacobi = 0.0;
  double gamma_symmetry = 0.0;
  double gamma_min_eigenvalue = 0.0;
  double ad_invariance = 0.0;  ///< only meaningful for ad_invariant specs
  double rep_commutator = 0.0;

  bool ok(double tol = 1e-12) const
  {
    return antisymmetry < tol && jacobi < tol && gamma_symmetry < tol && gamma_min_eigenvalue > 0.0 &&
           ad_invariance < tol && rep_commutator < tol;
  }
};

inline ValidationReport validate(const LieAlgebraSpec& spec)
{
  const int d = spec.dim();
  ValidationReport r;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) r.antisymmetry = std::max(r.antisymmetry, std::abs(spec.c(i, j, k) + spec.c(j, i, k)));

  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double s = 0.0;
          for (int m = 0; m < d; ++m)
            s += spec.c(i, j, m) * spec.c(m, k, l) + spec.c(j, k, m) * spec.c(m, i, l) +
                 spec.c(k, i, m) * spec.c(m, j, l);
          r.jacobi = std::max(r.jacobi, std::abs(s));
        }

  const Eigen::MatrixXd& g = spec.gamma();
  r.gamma_symmetry = (g - g.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (g + g.transpose()));
  r.gamma_min_eigenvalue = eig.eigenvalues().minCoeff();

  if (spec.ad_invariant()) {
    // gamma([e_a, e_b], e_c) + gamma(e_b, [e_a, e_c])
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) {
          double s = 0.0;
          for (int k = 0; k < d; ++k) s += spec.c(a, b, k) * g(k, c) + g(b, k) * spec.c(a, c, k);
          r.ad_invariance = std::max(r.ad_invariance, std::abs(s));
        }
  }

  const auto& basis = spec.rep_basis();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Eigen::MatrixXd comm = basis[i] * basis[j] - basis[j] * basis[i];
      for (int k = 0; k < d; ++k) comm -= spec.c(i, j, k) * basis[k];
      r.rep_commutator = std::max(r.rep_commutator, comm.cwiseAbs().maxCoeff());
    }
  return r;
}

/// Nearest orthogonal matrix (polar factor); used to pull drifting SO(n) samples back to the group.
inline Eigen::MatrixXd polar_project(const Eigen::MatrixXd& m)
{
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// Distance of g from the represented group: orthogonality defect for orthogonal specs,
/// otherwise how far log-free membership can be checked (invertibility only).
inline double membership_defect(const LieAlgebraSpec& spec, const Eigen::MatrixXd& g)
{
  if (spec.orthogonal()) {
    const Eigen::MatrixXd gtg = g.transpose() * g;
    const double orth = (gtg - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    return std::max(orth, std::abs(g.determinant() - 1.0));
  }
  return std::abs(g.determinant()) > 0.0 ? 0.0 : 1.0;
}

}  // namespace epaut::lie
