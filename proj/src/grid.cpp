#include "scatterbench/grid.hpp"

#include <algorithm>
#include <cmath>

namespace sb {

GridGeometry square_grid(int n) {
  GridGeometry g;
  g.nx = g.ny = n;
  return g;
}

double sample_bilinear(const GridField& f, double x, double y) {
  const auto& g = f.geom;
  const double tx = (x - g.box.x0) / g.hx();
  const double ty = (y - g.box.y0) / g.hy();
  const double eps = 1e-9;
  if (tx < -eps || ty < -eps || tx > g.nx - 1 + eps || ty > g.ny - 1 + eps) return 0.0;
  int i = std::clamp(static_cast<int>(std::floor(tx)), 0, g.nx - 2);
  int j = std::clamp(static_cast<int>(std::floor(ty)), 0, g.ny - 2);
  const double a = std::clamp(tx - i, 0.0, 1.0);
  const double b = std::clamp(ty - j, 0.0, 1.0);
  return (1 - a) * (1 - b) * f(i, j) + a * (1 - b) * f(i + 1, j) + (1 - a) * b * f(i, j + 1) +
         a * b * f(i + 1, j + 1);
}

GridField resample(const GridField& f, const GridGeometry& target) {
  if (f.geom == target) return f;
  GridField out(target);
  for (int i = 0; i < target.nx; ++i)
    for (int j = 0; j < target.ny; ++j) out(i, j) = sample_bilinear(f, target.x(i), target.y(j));
  return out;
}

double max_abs(const GridField& f) {
  double m = 0;
  for (double v : f.v) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(const GridField& f) {
  double s = 0;
  for (double v : f.v) s += v * v;
  return std::sqrt(s * f.geom.hx() * f.geom.hy());
}

double relative_l2(const GridField& a, const GridField& b) {
  const GridField d = a - b;
  return l2_norm(d) / l2_norm(b);
}

GridField operator+(const GridField& a, const GridField& b) {
  GridField out = resample(b, a.geom);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += a.v[i];
  return out;
}

GridField operator-(const GridField& a, const GridField& b) {
  GridField out = resample(b, a.geom);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = a.v[i] - out.v[i];
  return out;
}

GridField operator*(double s, const GridField& a) {
  GridField out = a;
  for (double& v : out.v) v *= s;
  return out;
}

}  // namespace sb
