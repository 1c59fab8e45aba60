#pragma once

// Green's functions of the Helmholtz operator 1 - alpha^2 d^2/dx^2 (and a few
// alternatives), on the line, on a periodic interval, and as radial profiles
// for particle dynamics. Also the uniform periodic grid used by the 1D solver.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "spectral.hpp"

namespace epaut::kernels {

enum class KernelKind { helmholtz_line, helmholtz_periodic, gaussian, identity };

inline std::string to_string(KernelKind k)
{
  switch (k) {
    case KernelKind::helmholtz_line: return "helmholtz_line";
    case KernelKind::helmholtz_periodic: return "helmholtz_periodic";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::identity: return "identity";
  }
  return "?";
}

/// Even convolution kernel G(r).
///
/// derivative(r) is dG/dr at signed r with the peakon convention dG/dr(0) = 0,
/// which keeps N-body forces finite (and momentum-conserving) at coincident points.
class Kernel
{
public:
  Kernel(KernelKind kind, double alpha, double period = 0.0)
    : kind_(kind), alpha_(alpha), period_(period)
  {
    if (kind_ != KernelKind::identity && !(alpha_ > 0.0))
      throw ValidationError("kernels: alpha must be positive (got " + std::to_string(alpha_) + ")");
    if (kind_ == KernelKind::helmholtz_periodic && !(period_ > 0.0))
      throw ValidationError("kernels: period must be positive");
  }

  KernelKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double period() const noexcept { return period_; }
  /// The identity kernel is a Dirac mass and has no pointwise profile.
  bool has_profile() const noexcept { return kind_ != KernelKind::identity; }

  double value(double r) const
  {
    switch (kind_) {
      case KernelKind::helmholtz_line: return std::exp(-std::abs(r) / alpha_) / (2.0 * alpha_);
      case KernelKind::helmholtz_periodic: {
        const double a = std::abs(reduce(r));
        const double denom = 2.0 * alpha_ * (-std::expm1(-period_ / alpha_));
        return (std::exp(-a / alpha_) + std::exp(-(period_ - a) / alpha_)) / denom;
      }
      case KernelKind::gaussian: return std::exp(-r * r / (2.0 * alpha_ * alpha_));
      case KernelKind::identity: break;
    }
    throw ValidationError("kernels: identity kernel has no pointwise value");
  }

  double derivative(double r) const
  {
    if (r == 0.0) return 0.0;
    const double sgn = r > 0.0 ? 1.0 : -1.0;
    switch (kind_) {
      case KernelKind::helmholtz_line: return -sgn * std::exp(-std::abs(r) / alpha_) / (2.0 * alpha_ * alpha_);
      case KernelKind::helmholtz_periodic: {
        const double rr = reduce(r);
        if (rr == 0.0) return 0.0;
        const double a = std::abs(rr);
        const double denom = 2.0 * alpha_ * alpha_ * (-std::expm1(-period_ / alpha_));
        const double s = rr > 0.0 ? 1.0 : -1.0;
        return s * (-std::exp(-a / alpha_) + std::exp(-(period_ - a) / alpha_)) / denom;
      }
      case KernelKind::gaussian: return -r / (alpha_ * alpha_) * value(r);
      case KernelKind::identity: break;
    }
    throw ValidationError("kernels: identity kernel has no pointwise derivative");
  }

  /// Fourier symbol int G(r) e^{-ikr} dr (for periodic kernels: L times the k-th Fourier coefficient).
  double symbol(double k) const
  {
    switch (kind_) {
      case KernelKind::helmholtz_line:
      case KernelKind::helmholtz_periodic: return 1.0 / (1.0 + alpha_ * alpha_ * k * k);
      case KernelKind::gaussian:
        return alpha_ * std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * alpha_ * alpha_ * k * k);
      case KernelKind::identity: return 1.0;
    }
    return 0.0;
  }

  /// Value of the L-periodization sum_m G(r + mL); exact for the periodic kernel.
  double periodized_value(double r, double length) const
  {
    if (kind_ == KernelKind::helmholtz_periodic) return value(r);
    if (kind_ == KernelKind::helmholtz_line)
      return Kernel(KernelKind::helmholtz_periodic, alpha_, length).value(r);
    const double rr = r - length * std::round(r / length);
    double s = 0.0;
    for (int m = -64; m <= 64; ++m) {
      const double t = value(rr + m * length);
      s += t;
      if (std::abs(m) > 1 && t < 1e-300) break;
    }
    return s;
  }

private:
  double reduce(double r) const { return r - period_ * std::round(r / period_); }

  KernelKind kind_;
  double alpha_;
  double period_;
};

inline Kernel helmholtz_green_line(double alpha) { return Kernel(KernelKind::helmholtz_line, alpha); }

inline Kernel helmholtz_green_periodic(double alpha, double length)
{
  if (!(length > 0.0)) throw ValidationError("kernels: period must be positive");
  return Kernel(KernelKind::helmholtz_periodic, alpha, length);
}

inline Kernel gaussian_kernel(double alpha) { return Kernel(KernelKind::gaussian, alpha); }
inline Kernel identity_kernel() { return Kernel(KernelKind::identity, 0.0); }

/// Helmholtz Green's function, or the Dirac kernel when alpha == 0 (Q = 1).
inline Kernel helmholtz_or_identity(double alpha, double length)
{
  return alpha == 0.0 ? identity_kernel() : helmholtz_green_periodic(alpha, length);
}

/// Uniform periodic grid on [0, L).
struct Grid1D
{
  double length;
  int points;

  Grid1D(double length_, int points_)
    : length(length_), points(points_)
  {
    if (!(length > 0.0)) throw ValidationError("grid: length must be positive");
    if (points < 8 || !spectral::is_power_of_two(points))
      throw ValidationError("grid: number of points must be a power of two >= 8");
  }

  double dx() const { return length / points; }
  double x(int i) const { return i * dx(); }
  std::vector<double> coordinates() const
  {
    std::vector<double> xs(points);
    for (int i = 0; i < points; ++i) xs[i] = x(i);
    return xs;
  }
};

/// How a kernel acts on grid data.
///
/// spectral: multiply by the exact Fourier symbol on the resolved modes (the
///           discrete inverse of the spectral Helmholtz operator).
/// sampled:  circular convolution with point samples of the periodized kernel,
///           dx * sum_j G(x_i - x_j) f_j (exact for grid deltas).
enum class ConvolutionMode { spectral, sampled };

namespace detail {
inline void check_length(const Grid1D& g, std::size_t n)
{
  if (static_cast<int>(n) != g.points)
    throw ValidationError("kernels: field has " + std::to_string(n) + " samples, grid has " +
                          std::to_string(g.points));
}
}  // namespace detail

/// (1 - alpha^2 d^2/dx^2) f, spectrally.
inline std::vector<double> apply_helmholtz(const spectral::Transform1D& t, std::span<const double> f, double alpha)
{
  return t.apply(f, [alpha](int, double k) { return 1.0 + alpha * alpha * k * k; });
}

inline std::vector<double> apply_helmholtz(const Grid1D& grid, std::span<const double> f, double alpha)
{
  detail::check_length(grid, f.size());
  return apply_helmholtz(spectral::Transform1D(grid.points, grid.length), f, alpha);
}

/// (1 - alpha^2 d^2/dx^2)^{-1} f by spectral division; alpha = 0 returns f.
inline std::vector<double> invert_helmholtz(const spectral::Transform1D& t, std::span<const double> f, double alpha)
{
  if (alpha == 0.0) return {f.begin(), f.end()};
  return t.apply(f, [alpha](int, double k) { return 1.0 / (1.0 + alpha * alpha * k * k); });
}

inline std::vector<double> invert_helmholtz(const Grid1D& grid, std::span<const double> f, double alpha)
{
  detail::check_length(grid, f.size());
  if (alpha < 0.0) throw ValidationError("kernels: alpha must be non-negative");
  return invert_helmholtz(spectral::Transform1D(grid.points, grid.length), f, alpha);
}

/// DFT of dx-weighted kernel samples: the symbol of the sampled convolution.
inline std::vector<double> sampled_symbol(const spectral::Transform1D& t, const Kernel& kernel)
{
  const int n = t.size();
  const double dx = t.length() / n;
  std::vector<double> samples(n);
  for (int i = 0; i < n; ++i) samples[i] = dx * kernel.periodized_value(i * dx, t.length());
  const auto c = t.forward(samples);
  std::vector<double> out(t.modes());
  // Even kernel: the transform is real up to round-off.
  for (int j = 0; j < t.modes(); ++j) out[j] = c[j].real();
  return out;
}

inline std::vector<double> convolve_periodic(const spectral::Transform1D& t,
                                             const Kernel& kernel,
                                             std::span<const double> f,
                                             ConvolutionMode mode = ConvolutionMode::spectral)
{
  if (kernel.kind() == KernelKind::identity) return {f.begin(), f.end()};
  if (mode == ConvolutionMode::spectral) return t.apply(f, [&](int, double k) { return kernel.symbol(k); });
  const auto sym = sampled_symbol(t, kernel);
  return t.apply(f, [&](int j, double) { return sym[j]; });
}

inline std::vector<double> convolve_periodic(const Grid1D& grid,
                                             const Kernel& kernel,
                                             std::span<const double> f,
                                             ConvolutionMode mode = ConvolutionMode::spectral)
{
  detail::check_length(grid, f.size());
  return convolve_periodic(spectral::Transform1D(grid.points, grid.length), kernel, f, mode);
}

}  // namespace epaut::kernels
