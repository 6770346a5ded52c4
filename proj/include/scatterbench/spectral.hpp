#pragma once

#include <utility>
#include <vector>

#include "scatterbench/grid.hpp"

namespace sb {

constexpr int kMaxModes = 64;

// Coefficients c(m1, m2), 1 <= m1, m2 <= M, of
//   f(x) = sum c(m1, m2) sin(m1 (x1 + pi/2)) sin(m2 (x2 + pi/2))
// on the support square. Storage is row-major with m1 outermost.
class SpectralCoeffs {
 public:
  SpectralCoeffs() = default;
  explicit SpectralCoeffs(int M);

  int M() const { return M_; }
  double& operator()(int m1, int m2) { return c_[idx(m1, m2)]; }
  double operator()(int m1, int m2) const { return c_[idx(m1, m2)]; }
  std::vector<double>& data() { return c_; }
  const std::vector<double>& data() const { return c_; }

  // Copy into an M'-sized array, truncating or zero-padding.
  SpectralCoeffs resized(int M) const;
  double norm() const;

 private:
  std::size_t idx(int m1, int m2) const { return static_cast<std::size_t>(m1 - 1) * M_ + (m2 - 1); }
  int M_ = 0;
  std::vector<double> c_;
};

SpectralCoeffs operator+(const SpectralCoeffs& a, const SpectralCoeffs& b);
SpectralCoeffs operator-(const SpectralCoeffs& a, const SpectralCoeffs& b);
SpectralCoeffs operator*(double s, const SpectralCoeffs& a);

double basis_value(int m1, int m2, double x, double y);

// Point values of the series on g; nodes outside the support square get 0.
GridField synthesize(const SpectralCoeffs& c, const GridGeometry& g);

// Trapezoid projection onto the first M x M modes. Requires at least four
// samples per half-period of mode M along both axes and a grid covering the
// support square.
SpectralCoeffs analyze(const GridField& f, int M);

// Minimum nodes per side for analyze() at mode count M on the support square.
int analysis_nodes(int M);

using Mode = std::pair<int, int>;

struct TruncationRule {
  enum class Kind { MaxMode, DiagonalCutoff };
  Kind kind = Kind::DiagonalCutoff;
  int max_mode = 0;  // MaxMode only

  static TruncationRule max_mode_rule(int M) { return {Kind::MaxMode, M}; }
  static TruncationRule diagonal() { return {Kind::DiagonalCutoff, 0}; }

  // DiagonalCutoff keeps m1 + m2 <= 2k; MaxMode ignores k.
  bool keeps(int m1, int m2, double k) const;
};

// Retained modes of an M x M array in lexicographic (m1, m2) order.
std::vector<Mode> retained_modes(int M, const TruncationRule& rule, double k);
SpectralCoeffs truncate(const SpectralCoeffs& c, const TruncationRule& rule, double k);

// Smallest M for which the rule's retained set at wavenumber k is not clipped.
int modes_needed(const TruncationRule& rule, double k);

}  // namespace sb
