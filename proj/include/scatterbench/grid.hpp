#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace sb {

using cplx = std::complex<double>;

constexpr double kHalfPi = std::numbers::pi / 2;

// Axis-aligned box, stored as (x0, x1, y0, y1) on disk.
struct Box {
  double x0 = -kHalfPi, x1 = kHalfPi, y0 = -kHalfPi, y1 = kHalfPi;
  bool operator==(const Box&) const = default;
};

// Uniform node grid including the box edges. Values are stored with the x index
// outermost: v[i * ny + j] sits at (x(i), y(j)).
struct GridGeometry {
  int nx = 0, ny = 0;
  Box box;

  double hx() const { return (box.x1 - box.x0) / (nx - 1); }
  double hy() const { return (box.y1 - box.y0) / (ny - 1); }
  double x(int i) const { return box.x0 + i * hx(); }
  double y(int j) const { return box.y0 + j * hy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * ny + j; }
  bool operator==(const GridGeometry&) const = default;
};

// n x n nodes spanning the support square [-pi/2, pi/2]^2.
GridGeometry square_grid(int n);

template <class T>
struct Grid {
  GridGeometry geom;
  std::vector<T> v;

  Grid() = default;
  explicit Grid(const GridGeometry& g, T fill = T{}) : geom(g), v(g.size(), fill) {}
  T& operator()(int i, int j) { return v[geom.index(i, j)]; }
  const T& operator()(int i, int j) const { return v[geom.index(i, j)]; }
};

using GridField = Grid<double>;
using ComplexField = Grid<cplx>;

// Bilinear interpolation; zero outside the box.
double sample_bilinear(const GridField& f, double x, double y);
GridField resample(const GridField& f, const GridGeometry& target);

double max_abs(const GridField& f);
double l2_norm(const GridField& f);
// Relative discrete L2 distance ||a - b|| / ||b||; both on the same geometry.
double relative_l2(const GridField& a, const GridField& b);

GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator*(double s, const GridField& a);

}  // namespace sb
