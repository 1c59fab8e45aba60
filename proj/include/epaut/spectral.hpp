#pragma once

// Thin RAII wrappers around FFTW real-to-complex transforms on uniform
// periodic grids, plus the spectral operators shared by the field solvers.
//
// Plans are created with FFTW_ESTIMATE so the transform, and therefore every
// solver result, is bit-reproducible for a given grid size.

#include <fftw3.h>

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace epaut::spectral {

using Complex = std::complex<double>;

namespace detail {
// FFTW's planner is not re-entrant.
inline std::mutex& planner_mutex()
{
  static std::mutex m;
  return m;
}

struct FftwFree
{
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct PlanDeleter
{
  void operator()(fftw_plan p) const noexcept
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;
}  // namespace detail

/// Signed integer wavenumber index for DFT slot j of an n-point transform.
inline int wave_index(int j, int n) { return j <= n / 2 ? j : j - n; }

/// 2/3-rule: keep modes with 3|j| < n.
inline bool dealias_keep(int j, int n) { return 3 * std::abs(wave_index(j, n)) < n; }

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// 1D periodic transforms on [0, L) with n samples.
class Transform1D
{
public:
  Transform1D(int n, double length)
    : n_(n), length_(length)
  {
    if (n < 2) throw ValidationError("spectral: need at least 2 points");
    if (!(length > 0.0)) throw ValidationError("spectral: domain length must be positive");
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * modes())));
    std::lock_guard lock(detail::planner_mutex());
    forward_.reset(fftw_plan_dft_r2c_1d(n, real_.get(), spec_.get(), FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_c2r_1d(n, spec_.get(), real_.get(), FFTW_ESTIMATE));
  }

  Transform1D(const Transform1D& other)
    : Transform1D(other.n_, other.length_)
  {}
  Transform1D& operator=(const Transform1D&) = delete;

  int size() const noexcept { return n_; }
  int modes() const noexcept { return n_ / 2 + 1; }
  double length() const noexcept { return length_; }

  /// Angular wavenumber of slot j (j < modes()).
  double wavenumber(int j) const { return 2.0 * std::numbers::pi * j / length_; }

  /// Unnormalized forward DFT.
  std::vector<Complex> forward(std::span<const double> f) const
  {
    check(f.size());
    std::copy(f.begin(), f.end(), real_.get());
    fftw_execute(forward_.get());
    std::vector<Complex> out(modes());
    for (int j = 0; j < modes(); ++j) out[j] = {spec_.get()[j][0], spec_.get()[j][1]};
    return out;
  }

  /// Inverse DFT including the 1/n normalization.
  std::vector<double> backward(std::span<const Complex> c) const
  {
    if (static_cast<int>(c.size()) != modes()) throw ValidationError("spectral: wrong coefficient count");
    for (int j = 0; j < modes(); ++j) {
      spec_.get()[j][0] = c[j].real();
      spec_.get()[j][1] = c[j].imag();
    }
    fftw_execute(backward_.get());
    std::vector<double> out(real_.get(), real_.get() + n_);
    const double s = 1.0 / n_;
    for (double& v : out) v *= s;
    return out;
  }

  /// Multiply by symbol(j, k) in Fourier space.
  template<typename Symbol>
  std::vector<double> apply(std::span<const double> f, Symbol&& symbol) const
  {
    auto c = forward(f);
    for (int j = 0; j < modes(); ++j) c[j] *= symbol(j, wavenumber(j));
    return backward(c);
  }

  /// d/dx; the Nyquist mode is dropped so the operator stays real and antisymmetric.
  std::vector<double> derivative(std::span<const double> f) const
  {
    return apply(f, [this](int j, double k) {
      return (2 * j == n_) ? Complex(0.0) : Complex(0.0, k);
    });
  }

  std::vector<double> dealias(std::span<const double> f) const
  {
    return apply(f, [this](int j, double) { return dealias_keep(j, n_) ? 1.0 : 0.0; });
  }

private:
  void check(std::size_t m) const
  {
    if (static_cast<int>(m) != n_) throw ValidationError("spectral: field length does not match the grid");
  }

  int n_;
  double length_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  detail::Plan forward_;
  detail::Plan backward_;
};

/// Real 2D field on an nx-by-ny torus grid; element (i, j) sits at (i dx, j dy).
using Field2D = Eigen::ArrayXXd;

/// 2D periodic transforms for column-major Field2D(nx, ny).
///
/// FFTW sees the buffer as a row-major (ny, nx) array, so the half-spectrum
/// is stored along x: slot (jx, jy) with 0 <= jx <= nx/2.
class Transform2D
{
public:
  Transform2D(int nx, int ny, double lx, double ly)
    : nx_(nx), ny_(ny), lx_(lx), ly_(ly)
  {
    if (nx < 2 || ny < 2) throw ValidationError("spectral: need at least 2 points per direction");
    if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("spectral: domain lengths must be positive");
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * nx * ny)));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * modes())));
    std::lock_guard lock(detail::planner_mutex());
    forward_.reset(fftw_plan_dft_r2c_2d(ny, nx, real_.get(), spec_.get(), FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_c2r_2d(ny, nx, spec_.get(), real_.get(), FFTW_ESTIMATE));
  }

  Transform2D(const Transform2D& other)
    : Transform2D(other.nx_, other.ny_, other.lx_, other.ly_)
  {}
  Transform2D& operator=(const Transform2D&) = delete;

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  int half_x() const noexcept { return nx_ / 2 + 1; }
  int modes() const noexcept { return half_x() * ny_; }

  double kx(int jx) const { return 2.0 * std::numbers::pi * jx / lx_; }
  double ky(int jy) const { return 2.0 * std::numbers::pi * wave_index(jy, ny_) / ly_; }
  bool nyquist_x(int jx) const { return 2 * jx == nx_; }
  bool nyquist_y(int jy) const { return 2 * jy == ny_; }

  /// Spectrum indexed [jy * half_x() + jx].
  std::vector<Complex> forward(const Field2D& f) const
  {
    check(f);
    std::copy(f.data(), f.data() + f.size(), real_.get());
    fftw_execute(forward_.get());
    std::vector<Complex> out(modes());
    for (int s = 0; s < modes(); ++s) out[s] = {spec_.get()[s][0], spec_.get()[s][1]};
    return out;
  }

  Field2D backward(std::span<const Complex> c) const
  {
    if (static_cast<int>(c.size()) != modes()) throw ValidationError("spectral: wrong coefficient count");
    for (int s = 0; s < modes(); ++s) {
      spec_.get()[s][0] = c[s].real();
      spec_.get()[s][1] = c[s].imag();
    }
    fftw_execute(backward_.get());
    Field2D out(nx_, ny_);
    const double scale = 1.0 / (static_cast<double>(nx_) * ny_);
    for (int s = 0; s < nx_ * ny_; ++s) out.data()[s] = real_.get()[s] * scale;
    return out;
  }

  /// Multiply by symbol(jx, jy, kx, ky).
  template<typename Symbol>
  Field2D apply(const Field2D& f, Symbol&& symbol) const
  {
    auto c = forward(f);
    apply_in_place(c, symbol);
    return backward(c);
  }

  template<typename Symbol>
  void apply_in_place(std::vector<Complex>& c, Symbol&& symbol) const
  {
    for (int jy = 0; jy < ny_; ++jy)
      for (int jx = 0; jx < half_x(); ++jx) c[jy * half_x() + jx] *= symbol(jx, jy, kx(jx), ky(jy));
  }

  Field2D dx(const Field2D& f) const
  {
    return apply(f, [this](int jx, int, double k, double) {
      return nyquist_x(jx) ? Complex(0.0) : Complex(0.0, k);
    });
  }

  Field2D dy(const Field2D& f) const
  {
    return apply(f, [this](int, int jy, double, double k) {
      return nyquist_y(jy) ? Complex(0.0) : Complex(0.0, k);
    });
  }

  /// (d/dx f, d/dy f) from a single forward transform.
  std::pair<Field2D, Field2D> gradient(const Field2D& f) const
  {
    auto cx = forward(f);
    auto cy = cx;
    apply_in_place(cx, [this](int jx, int, double k, double) { return nyquist_x(jx) ? Complex(0.0) : Complex(0.0, k); });
    apply_in_place(cy, [this](int, int jy, double, double k) { return nyquist_y(jy) ? Complex(0.0) : Complex(0.0, k); });
    return {backward(cx), backward(cy)};
  }

  /// (-Laplacian)^{-1} on the zero-mean subspace; the mean of the result is zero.
  Field2D inverse_neg_laplacian(const Field2D& f) const
  {
    return apply(f, [](int jx, int jy, double kx, double ky) {
      if (jx == 0 && jy == 0) return 0.0;
      return 1.0 / (kx * kx + ky * ky);
    });
  }

  Field2D neg_laplacian(const Field2D& f) const
  {
    return apply(f, [](int, int, double kx, double ky) { return kx * kx + ky * ky; });
  }

  Field2D dealias(const Field2D& f) const
  {
    return apply(f, [this](int jx, int jy, double, double) {
      return (dealias_keep(jx, nx_) && dealias_keep(jy, ny_)) ? 1.0 : 0.0;
    });
  }

private:
  void check(const Field2D& f) const
  {
    if (f.rows() != nx_ || f.cols() != ny_) throw ValidationError("spectral: field shape does not match the grid");
  }

  int nx_, ny_;
  double lx_, ly_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  detail::Plan forward_;
  detail::Plan backward_;
};

}  // namespace epaut::spectral
