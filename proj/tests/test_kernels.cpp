#include <gtest/gtest.h>

#include <epaut/kernels.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace epaut;
using namespace epaut::kernels;

namespace {

constexpr double kPi = std::numbers::pi;

// Periodic Helmholtz Green's function on [0, 2pi) from its Fourier series
//   G(x) = (1/2pi) sum_k cos(kx) / (1 + alpha^2 k^2),
// summed to |k| <= K with the 1/(alpha^2 k^2) tail replaced by its closed form
//   sum_{k>=1} cos(kx)/k^2 = pi^2/6 - pi x/2 + x^2/4   (0 <= x <= 2pi).
double fourier_green(double x, double alpha, int kmax)
{
  x = std::fmod(std::abs(x), 2 * kPi);
  const double a2 = alpha * alpha;
  double s = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    const double kk = static_cast<double>(k) * k;
    s += 2.0 * std::cos(k * x) * (1.0 / (1.0 + a2 * kk) - 1.0 / (a2 * kk));
  }
  s += 2.0 / a2 * (kPi * kPi / 6.0 - kPi * x / 2.0 + x * x / 4.0);
  return s / (2 * kPi);
}

double plain_fourier_green(double x, double alpha, int kmax)
{
  double s = 1.0;
  for (int k = 1; k <= kmax; ++k) s += 2.0 * std::cos(k * x) / (1.0 + alpha * alpha * k * k);
  return s / (2 * kPi);
}

std::vector<double> random_band_limited(std::mt19937& rng, const Grid1D& g, int kmax)
{
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> f(g.points, 0.0);
  for (int k = 0; k <= kmax; ++k) {
    const double a = n(rng), b = n(rng);
    for (int i = 0; i < g.points; ++i) {
      const double x = 2 * kPi * k * g.x(i) / g.length;
      f[i] += a * std::cos(x) + (k ? b * std::sin(x) : 0.0);
    }
  }
  return f;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Kernels, LineGreenValues)
{
  const auto g = helmholtz_green_line(1.0);
  EXPECT_NEAR(g.value(0.0), 0.5, 1e-15);
  EXPECT_NEAR(g.value(1.0), 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(g.value(-1.0), g.value(1.0), 0.0);
}

TEST(Kernels, PeriodicGreenMatchesFourierSeries)
{
  const auto g = helmholtz_green_periodic(1.0, 2 * kPi);
  EXPECT_NEAR(g.value(0.0), 0.5 / std::tanh(kPi), 1e-14);
  // The unaccelerated series converges slowly at the cusp.
  EXPECT_NEAR(g.value(0.0), plain_fourier_green(0.0, 1.0, 10000), 5e-5);
  for (double x : {0.0, 0.3, 1.0, 2.5, kPi, 4.0, 6.0})
    EXPECT_NEAR(g.value(x), fourier_green(x, 1.0, 10000), 1e-10) << x;
  for (double alpha : {0.25, 0.5, 2.0})
    EXPECT_NEAR(helmholtz_green_periodic(alpha, 2 * kPi).value(1.1), fourier_green(1.1, alpha, 10000), 1e-10);
}

TEST(Kernels, PeriodicGreenIsPeriodicAndEven)
{
  const auto g = helmholtz_green_periodic(0.7, 3.0);
  for (double x : {0.1, 0.9, 1.4}) {
    EXPECT_NEAR(g.value(x), g.value(-x), 1e-15);
    EXPECT_NEAR(g.value(x), g.value(x + 3.0), 1e-14);
  }
}

TEST(Kernels, PeriodicGreenAgreesWithImageSum)
{
  const double alpha = 0.4, L = 5.0;
  const auto per = helmholtz_green_periodic(alpha, L);
  const auto line = helmholtz_green_line(alpha);
  for (double x : {0.0, 0.7, 2.4}) {
    double s = 0.0;
    for (int m = -200; m <= 200; ++m) s += line.value(x + m * L);
    EXPECT_NEAR(per.value(x), s, 1e-14);
  }
}

TEST(Kernels, DerivativeMatchesCentralDifferences)
{
  const double h = 1e-6;
  for (const auto& k : {helmholtz_green_line(0.8), helmholtz_green_periodic(0.8, 2 * kPi), gaussian_kernel(0.6)}) {
    for (double r : {-2.0, -0.5, 0.3, 1.7, 4.0}) {
      const double fd = (k.value(r + h) - k.value(r - h)) / (2 * h);
      EXPECT_NEAR(k.derivative(r), fd, 1e-8) << to_string(k.kind()) << " r=" << r;
    }
    EXPECT_EQ(k.derivative(0.0), 0.0);
  }
}

TEST(Kernels, GaussianSymbolMatchesQuadrature)
{
  const auto g = gaussian_kernel(0.5);
  for (double k : {0.0, 1.0, 3.0}) {
    double s = 0.0;
    const double h = 1e-3;
    for (int i = -10000; i <= 10000; ++i) s += h * g.value(i * h) * std::cos(k * i * h);
    EXPECT_NEAR(g.symbol(k), s, 1e-12);
  }
}

TEST(Kernels, InvalidParameters)
{
  EXPECT_THROW(helmholtz_green_line(0.0), ValidationError);
  EXPECT_THROW(helmholtz_green_line(-1.0), ValidationError);
  EXPECT_THROW(helmholtz_green_periodic(1.0, 0.0), ValidationError);
  EXPECT_THROW(gaussian_kernel(-0.1), ValidationError);
  EXPECT_THROW(Grid1D(1.0, 100), ValidationError);
  EXPECT_THROW(Grid1D(0.0, 64), ValidationError);
  EXPECT_THROW(identity_kernel().value(0.0), ValidationError);
}

TEST(Kernels, HelmholtzRoundTrip)
{
  std::mt19937 rng(11);
  const Grid1D g(2 * kPi, 1024);
  const auto f = random_band_limited(rng, g, 300);
  for (double alpha : {0.1, 0.5, 1.0, 2.0}) {
    const auto u = invert_helmholtz(g, f, alpha);
    EXPECT_LT(max_abs_diff(apply_helmholtz(g, u, alpha), f), 1e-10) << alpha;
    EXPECT_LT(max_abs_diff(invert_helmholtz(g, apply_helmholtz(g, f, alpha), alpha), f), 1e-10) << alpha;
  }
}

TEST(Kernels, InvertAlphaZeroIsIdentity)
{
  std::mt19937 rng(12);
  const Grid1D g(2 * kPi, 64);
  const auto f = random_band_limited(rng, g, 10);
  EXPECT_EQ(invert_helmholtz(g, f, 0.0), f);
}

TEST(Kernels, InvertMatchesDenseSolve)
{
  // Oracle: the spectral Helmholtz operator assembled column by column as a
  // dense SPD matrix, solved by Cholesky.
  std::mt19937 rng(13);
  const int n = 32;
  const Grid1D g(2 * kPi, n);
  const double alpha = 0.6;
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    const auto col = apply_helmholtz(g, e, alpha);
    for (int i = 0; i < n; ++i) a(i, j) = col[i];
  }
  EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  std::normal_distribution<double> nd;
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = nd(rng);
  const Eigen::VectorXd expected = a.llt().solve(f);
  const auto got = invert_helmholtz(g, std::vector<double>(f.data(), f.data() + n), alpha);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(got[i], expected[i], 1e-12);
}

TEST(Kernels, SampledConvolutionOfGridDelta)
{
  const Grid1D g(2 * kPi, 1024);
  const auto k = helmholtz_green_periodic(1.0, g.length);
  std::vector<double> delta(g.points, 0.0);
  const int i0 = 300;
  delta[i0] = 1.0 / g.dx();
  const auto u = convolve_periodic(g, k, delta, ConvolutionMode::sampled);
  double worst = 0.0;
  for (int i = 0; i < g.points; ++i) worst = std::max(worst, std::abs(u[i] - k.value(g.x(i) - g.x(i0))));
  EXPECT_LT(worst, 1e-8);
}

TEST(Kernels, SampledSymbolIsAliasedSymbol)
{
  // The DFT of point samples equals the symbol summed over aliases k + mK.
  const int n = 64;
  const double L = 2 * kPi;
  const spectral::Transform1D t(n, L);
  const auto k = helmholtz_green_periodic(0.3, L);
  const auto sym = sampled_symbol(t, k);
  for (int j = 0; j < t.modes(); ++j) {
    double s = 0.0;
    for (int m = -200000; m <= 200000; ++m) s += k.symbol(t.wavenumber(j) + m * 2 * kPi * n / L);
    // Remaining tail beyond |m| = M behaves like 2/(alpha K)^2 / M.
    EXPECT_NEAR(sym[j], s, 1e-6) << j;
  }
}

TEST(Kernels, SpectralConvolutionEqualsInversion)
{
  std::mt19937 rng(14);
  const Grid1D g(2 * kPi, 256);
  const auto f = random_band_limited(rng, g, 60);
  const auto k = helmholtz_green_periodic(0.5, g.length);
  EXPECT_LT(max_abs_diff(convolve_periodic(g, k, f), invert_helmholtz(g, f, 0.5)), 1e-13);
  EXPECT_EQ(convolve_periodic(g, identity_kernel(), f), f);
}

TEST(Kernels, SampledConvolutionMatchesDirectSum)
{
  std::mt19937 rng(15);
  const Grid1D g(3.0, 64);
  const auto k = gaussian_kernel(0.2);
  const auto f = random_band_limited(rng, g, 20);
  const auto got = convolve_periodic(g, k, f, ConvolutionMode::sampled);
  for (int i = 0; i < g.points; ++i) {
    double s = 0.0;
    for (int j = 0; j < g.points; ++j) s += g.dx() * k.periodized_value(g.x(i) - g.x(j), g.length) * f[j];
    EXPECT_NEAR(got[i], s, 1e-12);
  }
}

TEST(Kernels, ShapeMismatch)
{
  const Grid1D g(1.0, 16);
  std::vector<double> f(15, 0.0);
  EXPECT_THROW(invert_helmholtz(g, f, 1.0), ValidationError);
  EXPECT_THROW(convolve_periodic(g, gaussian_kernel(0.1), f), ValidationError);
}

TEST(Kernels, PeriodicApproachesLineForLongPeriods)
{
  const double alpha = 0.5;
  const auto per = helmholtz_green_periodic(alpha, 40 * alpha);
  const auto line = helmholtz_green_line(alpha);
  for (double r : {0.0, 0.2, 1.0, 3.0}) EXPECT_NEAR(per.value(r), line.value(r), 1e-8);
}

TEST(Kernels, InvertSimpleFields)
{
  const Grid1D g(2 * kPi, 64);
  std::vector<double> c(g.points, 2.5), cosx(g.points);
  for (int i = 0; i < g.points; ++i) cosx[i] = std::cos(g.x(i));
  for (double v : invert_helmholtz(g, c, 1.0)) EXPECT_NEAR(v, 2.5, 1e-14);
  const auto u = invert_helmholtz(g, cosx, 1.0);
  for (int i = 0; i < g.points; ++i) EXPECT_NEAR(u[i], 0.5 * cosx[i], 1e-14);
}

TEST(Kernels, LineKernelInvertsHelmholtzOnBump)
{
  // Quadrature of G * (f - alpha^2 f'') for a Gaussian bump f on the line.
  const double alpha = 0.7, s = 0.4;
  const auto g = helmholtz_green_line(alpha);
  auto f = [&](double x) { return std::exp(-x * x / (2 * s * s)); };
  auto qf = [&](double x) { return f(x) - alpha * alpha * f(x) * (x * x / (s * s * s * s) - 1.0 / (s * s)); };
  const double h = 2e-4;
  for (double x : {-0.5, 0.0, 0.3, 1.2}) {
    double acc = 0.0;
    for (int i = -100000; i <= 100000; ++i) acc += h * g.value(x - i * h) * qf(i * h);
    EXPECT_NEAR(acc, f(x), 1e-6) << x;
  }
}

TEST(Kernels, ConvolutionMatrixIsSymmetricPositiveDefinite)
{
  const int n = 32;
  const Grid1D g(2 * kPi, n);
  for (auto mode : {ConvolutionMode::spectral, ConvolutionMode::sampled}) {
    Eigen::MatrixXd a(n, n);
    for (int j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      const auto col = convolve_periodic(g, helmholtz_green_periodic(0.8, g.length), e, mode);
      for (int i = 0; i < n; ++i) a(i, j) = col[i];
    }
    EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}
