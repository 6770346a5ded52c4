#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scatterbench/grid.hpp"
#include "scatterbench/spectral.hpp"

namespace sb {

// Gaussian prior with diagonal precision t(m1, m2) = a11 m1^2 + a22 m2^2 in the
// sine basis. delta is the variance of the driving normal variable.
struct PriorSpec {
  double a11 = 1.0, a22 = 1.0;
  double delta = 1.0;
  int M_eta = 10;
  int band_min = 0;  // modes with m1 + m2 <= band_min are zeroed by the sampler

  double precision(int m1, int m2) const { return a11 * m1 * m1 + a22 * m2 * m2; }
  void validate() const;
};

struct LaplacianMediumSpec {
  int n_omega = 32;
  double mu = 1e3;
  double delta = 1.0;

  void validate() const;
};

// Sum of the four Gaussian bumps of the reference scatterer.
double bumps_value(double x, double y);
GridField make_bumps(const GridGeometry& g);

// Nodal contrast for a disk of constant contrast c centred at the origin.
// Values are c times the integral of a cubic quasi-interpolant over the disk,
// so the trapezoid sum of (value * smooth) reproduces the disk integral to
// fourth order instead of the first order of point sampling.
GridField make_disk(double c, double radius, const GridGeometry& g);

// GRD1 raster whose box must lie inside `computational`.
GridField load_raster(const std::string& path, const Box& computational = Box{});

// eta = (mu I + D)^{-1} sigma on the n_omega^2 grid over the support square,
// D the five-point Neumann Laplacian (positive semidefinite sign convention).
GridField laplacian_filter(const LaplacianMediumSpec& spec, const std::vector<double>& sigma);
GridField sample_eta_laplacian(const LaplacianMediumSpec& spec, std::uint64_t seed, std::uint64_t stream = 0);

// eta(m1, m2) = zeta(m1, m2) / t(m1, m2); zeta row-major over M_eta x M_eta.
SpectralCoeffs spectral_from_zeta(const PriorSpec& spec, const std::vector<double>& zeta);
SpectralCoeffs sample_eta_spectral(const PriorSpec& spec, std::uint64_t seed, std::uint64_t stream = 0);

// -sum t(m1, m2) c(m1, m2)^2
double prior_logdensity(const SpectralCoeffs& c, const PriorSpec& spec);

}  // namespace sb
