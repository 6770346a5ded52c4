#include "scatterbench/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scatterbench/errors.hpp"

namespace sb {

namespace {

constexpr double kNorm = kHalfPi * kHalfPi;

void check_M(int M) {
  if (M < 1 || M > kMaxModes)
    fail(ErrorKind::InvalidModeRange, "mode count " + std::to_string(M) + " outside [1, 64]");
}

// sin(m (t + pi/2)) for m = 1..M at each coordinate; row t, column m-1.
std::vector<double> sine_table(int M, int n, double t0, double h) {
  std::vector<double> s(static_cast<std::size_t>(n) * M);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h + kHalfPi;
    for (int m = 1; m <= M; ++m) s[static_cast<std::size_t>(i) * M + m - 1] = std::sin(m * t);
  }
  return s;
}

// Integral over [a, b] of the piecewise-linear hat centred on each node.
std::vector<double> hat_weights(int n, double t0, double h, double a, double b) {
  std::vector<double> w(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double xi = t0 + i * h;
    // rising half on [xi - h, xi], falling half on [xi, xi + h]
    double lo = std::max(a, xi - h), hi = std::min(b, xi);
    if (i > 0 && hi > lo) {
      const double u0 = (lo - (xi - h)) / h, u1 = (hi - (xi - h)) / h;
      w[i] += h * 0.5 * (u1 * u1 - u0 * u0);
    }
    lo = std::max(a, xi);
    hi = std::min(b, xi + h);
    if (i < n - 1 && hi > lo) {
      const double u0 = (xi + h - hi) / h, u1 = (xi + h - lo) / h;
      w[i] += h * 0.5 * (u1 * u1 - u0 * u0);
    }
  }
  return w;
}

bool inside_square(double t) { return t >= -kHalfPi - 1e-12 && t <= kHalfPi + 1e-12; }

}  // namespace

SpectralCoeffs::SpectralCoeffs(int M) : M_(M) {
  check_M(M);
  c_.assign(static_cast<std::size_t>(M) * M, 0.0);
}

SpectralCoeffs SpectralCoeffs::resized(int M) const {
  SpectralCoeffs out(M);
  const int m = std::min(M, M_);
  for (int a = 1; a <= m; ++a)
    for (int b = 1; b <= m; ++b) out(a, b) = (*this)(a, b);
  return out;
}

double SpectralCoeffs::norm() const {
  double s = 0;
  for (double v : c_) s += v * v;
  return std::sqrt(s);
}

SpectralCoeffs operator+(const SpectralCoeffs& a, const SpectralCoeffs& b) {
  const int M = std::max(a.M(), b.M());
  SpectralCoeffs out = a.resized(M);
  const SpectralCoeffs bb = b.resized(M);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += bb.data()[i];
  return out;
}

SpectralCoeffs operator-(const SpectralCoeffs& a, const SpectralCoeffs& b) { return a + (-1.0) * b; }

SpectralCoeffs operator*(double s, const SpectralCoeffs& a) {
  SpectralCoeffs out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

double basis_value(int m1, int m2, double x, double y) {
  if (!inside_square(x) || !inside_square(y)) return 0.0;
  return std::sin(m1 * (x + kHalfPi)) * std::sin(m2 * (y + kHalfPi));
}

GridField synthesize(const SpectralCoeffs& c, const GridGeometry& g) {
  const int M = c.M();
  const auto sx = sine_table(M, g.nx, g.box.x0, g.hx());
  const auto sy = sine_table(M, g.ny, g.box.y0, g.hy());
  // inner[m1][j] = sum_m2 c(m1, m2) sin(m2 ...)(y_j)
  std::vector<double> inner(static_cast<std::size_t>(M) * g.ny, 0.0);
  for (int m1 = 1; m1 <= M; ++m1)
    for (int j = 0; j < g.ny; ++j) {
      double s = 0;
      for (int m2 = 1; m2 <= M; ++m2) s += c(m1, m2) * sy[static_cast<std::size_t>(j) * M + m2 - 1];
      inner[static_cast<std::size_t>(m1 - 1) * g.ny + j] = s;
    }
  GridField f(g);
  for (int i = 0; i < g.nx; ++i) {
    if (!inside_square(g.x(i))) continue;
    for (int j = 0; j < g.ny; ++j) {
      if (!inside_square(g.y(j))) continue;
      double s = 0;
      for (int m1 = 1; m1 <= M; ++m1)
        s += sx[static_cast<std::size_t>(i) * M + m1 - 1] * inner[static_cast<std::size_t>(m1 - 1) * g.ny + j];
      f(i, j) = s;
    }
  }
  return f;
}

int analysis_nodes(int M) { return 4 * M + 1; }

SpectralCoeffs analyze(const GridField& f, int M) {
  check_M(M);
  const auto& g = f.geom;
  const double tol = 1e-12;
  if (g.box.x0 > -kHalfPi + tol || g.box.x1 < kHalfPi - tol || g.box.y0 > -kHalfPi + tol ||
      g.box.y1 < kHalfPi - tol)
    fail(ErrorKind::GridTooCoarse, "grid does not cover the support square");
  const double hmax = std::numbers::pi / (4.0 * M);
  if (g.hx() > hmax * (1 + 1e-12) || g.hy() > hmax * (1 + 1e-12))
    fail(ErrorKind::GridTooCoarse, "fewer than 4 samples per half-period at M=" + std::to_string(M));

  const auto sx = sine_table(M, g.nx, g.box.x0, g.hx());
  const auto sy = sine_table(M, g.ny, g.box.y0, g.hy());
  const auto wx = hat_weights(g.nx, g.box.x0, g.hx(), -kHalfPi, kHalfPi);
  const auto wy = hat_weights(g.ny, g.box.y0, g.hy(), -kHalfPi, kHalfPi);

  std::vector<double> t(static_cast<std::size_t>(g.nx) * M, 0.0);
  for (int i = 0; i < g.nx; ++i) {
    if (wx[i] == 0.0) continue;
    for (int j = 0; j < g.ny; ++j) {
      const double fw = f(i, j) * wy[j];
      if (fw == 0.0) continue;
      for (int m2 = 1; m2 <= M; ++m2)
        t[static_cast<std::size_t>(i) * M + m2 - 1] += fw * sy[static_cast<std::size_t>(j) * M + m2 - 1];
    }
  }
  SpectralCoeffs c(M);
  for (int m1 = 1; m1 <= M; ++m1)
    for (int m2 = 1; m2 <= M; ++m2) {
      double s = 0;
      for (int i = 0; i < g.nx; ++i)
        s += wx[i] * sx[static_cast<std::size_t>(i) * M + m1 - 1] * t[static_cast<std::size_t>(i) * M + m2 - 1];
      c(m1, m2) = s / kNorm;
    }
  return c;
}

bool TruncationRule::keeps(int m1, int m2, double k) const {
  if (kind == Kind::MaxMode) return m1 <= max_mode && m2 <= max_mode;
  return m1 + m2 <= 2.0 * k + 1e-12;
}

std::vector<Mode> retained_modes(int M, const TruncationRule& rule, double k) {
  std::vector<Mode> out;
  for (int m1 = 1; m1 <= M; ++m1)
    for (int m2 = 1; m2 <= M; ++m2)
      if (rule.keeps(m1, m2, k)) out.emplace_back(m1, m2);
  return out;
}

SpectralCoeffs truncate(const SpectralCoeffs& c, const TruncationRule& rule, double k) {
  SpectralCoeffs out(c.M());
  for (int m1 = 1; m1 <= c.M(); ++m1)
    for (int m2 = 1; m2 <= c.M(); ++m2)
      if (rule.keeps(m1, m2, k)) out(m1, m2) = c(m1, m2);
  return out;
}

int modes_needed(const TruncationRule& rule, double k) {
  if (rule.kind == TruncationRule::Kind::MaxMode) return rule.max_mode;
  return std::max(1, static_cast<int>(std::floor(2.0 * k + 1e-12)) - 1);
}

}  // namespace sb
