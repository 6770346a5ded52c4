#include "scatterbench/media.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <cmath>

#include "scatterbench/errors.hpp"
#include "scatterbench/io.hpp"
#include "scatterbench/rng.hpp"

namespace sb {

void PriorSpec::validate() const {
  if (!(a11 > 0) || !(a22 > 0)) fail(ErrorKind::ConfigError, "prior tensor entries must be positive");
  if (!(delta >= 0)) fail(ErrorKind::ConfigError, "prior delta must be nonnegative");
  if (M_eta < 1 || M_eta > kMaxModes) fail(ErrorKind::InvalidModeRange, "prior M_eta out of range");
  if (band_min < 0) fail(ErrorKind::ConfigError, "band_min must be nonnegative");
}

void LaplacianMediumSpec::validate() const {
  if (n_omega < 8) fail(ErrorKind::ConfigError, "n_omega must be at least 8");
  if (!(mu > 0)) fail(ErrorKind::ConfigError, "mu must be positive");
  if (!(delta >= 0)) fail(ErrorKind::ConfigError, "delta must be nonnegative");
}

double bumps_value(double x, double y) {
  struct Bump { double amp, cx, cy; };
  static constexpr std::array<Bump, 4> bumps{{{-0.15, -0.6, 0.2}, {-0.15, 0.5, -0.7}, {-0.05, 0.9, 0.9}, {-0.04, -1.0, -1.0}}};
  double s = 0;
  for (const auto& b : bumps) {
    const double dx = x - b.cx, dy = y - b.cy;
    s += b.amp * std::exp(-15.0 * (dx * dx + dy * dy));
  }
  return s;
}

GridField make_bumps(const GridGeometry& g) {
  GridField f(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) f(i, j) = bumps_value(g.x(i), g.y(j));
  return f;
}

namespace {

// Unit-spacing cubic B-spline on [-2, 2] and its antiderivative from -2.
double bspline(double s) {
  const double a = std::abs(s);
  if (a < 1) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
  if (a < 2) return (2 - a) * (2 - a) * (2 - a) / 6.0;
  return 0.0;
}

double bspline_int_neg(double s) {
  if (s <= -2) return 0.0;
  if (s <= -1) return std::pow(s + 2, 4) / 24.0;
  return 0.5 + 2 * s / 3 - s * s * s / 3 - s * s * s * s / 8;
}

double bspline_int(double s) { return s <= 0 ? bspline_int_neg(s) : 1.0 - bspline_int_neg(-s); }

struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss_legendre(int n) {
  GaussRule r{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.x[i] = z;
    r.w[i] = 2.0 / ((1 - z * z) * dp * dp);
  }
  return r;
}

// Integral over the disk |x| < R of b((x - xl)/h) b((y - yl)/h), parametrised
// by x = R sin(phi) with the y-integral done in closed form. Breakpoints split
// phi where either factor changes polynomial piece.
double disk_moment(double xl, double yl, double h, double R, const GaussRule& gl) {
  std::vector<double> br{-kHalfPi, kHalfPi};
  for (int k = -2; k <= 2; ++k) {
    const double vx = (xl + k * h) / R;
    if (std::abs(vx) < 1) br.push_back(std::asin(vx));
    const double vy = std::abs(yl + k * h) / R;
    if (vy < 1) {
      br.push_back(std::acos(vy));
      br.push_back(-std::acos(vy));
    }
  }
  std::sort(br.begin(), br.end());
  double total = 0;
  for (std::size_t s = 0; s + 1 < br.size(); ++s) {
    const double a = std::clamp(br[s], -kHalfPi, kHalfPi), b = std::clamp(br[s + 1], -kHalfPi, kHalfPi);
    if (b <= a) continue;
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      const double phi = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
      const double x = R * std::sin(phi), c = R * std::cos(phi);
      const double inner = h * (bspline_int((c - yl) / h) - bspline_int((-c - yl) / h));
      total += 0.5 * (b - a) * gl.w[q] * bspline((x - xl) / h) * inner * c;
    }
  }
  return total;
}

}  // namespace

GridField make_disk(double c, double radius, const GridGeometry& g) {
  const double h = g.hx();
  if (std::abs(g.hy() - h) > 1e-12 * h) fail(ErrorKind::ConfigError, "disk weights need a uniform square grid");
  const GaussRule gl = gauss_legendre(16);
  GridField beta(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double r = std::hypot(g.x(i), g.y(j));
      if (r < radius - 3 * h) beta(i, j) = h * h;
      else if (r < radius + 3 * h) beta(i, j) = disk_moment(g.x(i), g.y(j), h, radius, gl);
    }
  static constexpr std::array<double, 3> mu{-1.0 / 6.0, 4.0 / 3.0, -1.0 / 6.0};
  GridField out(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      double w = 0;
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const int ii = i + a, jj = j + b;
          if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
          w += mu[a + 1] * mu[b + 1] * beta(ii, jj);
        }
      out(i, j) = c * w / (h * h);
    }
  return out;
}

GridField load_raster(const std::string& path, const Box& computational) {
  GridField f = read_grd1(path);
  const double tol = 1e-12;
  const Box& b = f.geom.box;
  if (b.x0 < computational.x0 - tol || b.x1 > computational.x1 + tol || b.y0 < computational.y0 - tol ||
      b.y1 > computational.y1 + tol)
    fail(ErrorKind::BoxMismatch, "raster box exceeds the computational box");
  return f;
}

GridField laplacian_filter(const LaplacianMediumSpec& spec, const std::vector<double>& sigma) {
  spec.validate();
  const int n = spec.n_omega;
  const std::size_t N = static_cast<std::size_t>(n) * n;
  if (sigma.size() != N) fail(ErrorKind::ConfigError, "sigma length does not match n_omega^2");
  const GridGeometry g = square_grid(n);
  const double inv_h2 = 1.0 / (g.hx() * g.hx());

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * N);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int row = static_cast<int>(g.index(i, j));
      int deg = 0;
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& p : nb) {
        if (p[0] < 0 || p[1] < 0 || p[0] >= n || p[1] >= n) continue;
        ++deg;
        trip.emplace_back(row, static_cast<int>(g.index(p[0], p[1])), -inv_h2);
      }
      trip.emplace_back(row, row, spec.mu + deg * inv_h2);
    }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(A);
  if (chol.info() != Eigen::Success) fail(ErrorKind::ConfigError, "medium operator is not positive definite");
  const Eigen::Map<const Eigen::VectorXd> rhs(sigma.data(), static_cast<Eigen::Index>(N));
  const Eigen::VectorXd eta = chol.solve(rhs);
  GridField f(g);
  for (std::size_t i = 0; i < N; ++i) f.v[i] = eta[static_cast<Eigen::Index>(i)];
  return f;
}

GridField sample_eta_laplacian(const LaplacianMediumSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  spec.validate();
  CounterRng rng(seed, stream);
  std::vector<double> sigma(static_cast<std::size_t>(spec.n_omega) * spec.n_omega);
  const double sd = std::sqrt(spec.delta);
  for (double& s : sigma) s = sd * rng.normal();
  return laplacian_filter(spec, sigma);
}

SpectralCoeffs spectral_from_zeta(const PriorSpec& spec, const std::vector<double>& zeta) {
  spec.validate();
  SpectralCoeffs c(spec.M_eta);
  if (zeta.size() != c.data().size()) fail(ErrorKind::ConfigError, "zeta length does not match M_eta^2");
  for (int m1 = 1; m1 <= spec.M_eta; ++m1)
    for (int m2 = 1; m2 <= spec.M_eta; ++m2) {
      if (m1 + m2 <= spec.band_min) continue;
      c(m1, m2) = zeta[static_cast<std::size_t>(m1 - 1) * spec.M_eta + (m2 - 1)] / spec.precision(m1, m2);
    }
  return c;
}

SpectralCoeffs sample_eta_spectral(const PriorSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  spec.validate();
  CounterRng rng(seed, stream);
  std::vector<double> zeta(static_cast<std::size_t>(spec.M_eta) * spec.M_eta);
  const double sd = std::sqrt(spec.delta);
  for (double& z : zeta) z = sd * rng.normal();
  return spectral_from_zeta(spec, zeta);
}

double prior_logdensity(const SpectralCoeffs& c, const PriorSpec& spec) {
  if (c.M() > spec.M_eta) fail(ErrorKind::InvalidModeRange, "coefficients exceed prior M_eta");
  double s = 0;
  for (int m1 = 1; m1 <= c.M(); ++m1)
    for (int m2 = 1; m2 <= c.M(); ++m2) s += spec.precision(m1, m2) * c(m1, m2) * c(m1, m2);
  return -s;
}

}  // namespace sb
