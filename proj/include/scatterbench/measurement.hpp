#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "scatterbench/forward.hpp"

namespace sb {

// Frequencies k_j = k_min + (j - 1) dk, directions theta_m at angle 2 pi m / n_theta.
struct MeasurementSetup {
  double k_min = 1.0;
  double dk = 0.5;
  int Q = 1;
  int n_theta = 30;
  ReceiverRing ring;

  double k(int j) const { return k_min + (j - 1) * dk; }  // j = 1..Q
  std::vector<IncidentWave> waves(int j) const;
  std::size_t block_size() const { return static_cast<std::size_t>(n_theta) * ring.n_p; }
  void validate() const;
  bool operator==(const MeasurementSetup& o) const;
};

// Complex data [Q][n_theta][n_p], frequency-major.
struct MeasurementSet {
  MeasurementSetup setup;
  std::vector<cplx> data;

  explicit MeasurementSet(const MeasurementSetup& s = {});
  cplx& at(int j, int m, int p);  // all 1-based
  const cplx& at(int j, int m, int p) const;
};

// Solver grid over the support square with at least `ppw` points per
// wavelength at k sqrt(1 + max|q|) and at least n_min nodes per side.
struct ResolutionProfile {
  double ppw = 10.0;
  int n_min = 0;
  GridGeometry grid_for(double k, double max_abs_q) const;
};

// A field that can be produced on any solver grid: either resampled from a
// stored raster or evaluated from a closed form.
struct FieldSource {
  std::function<GridField(const GridGeometry&)> on;
  double max_abs = 0.0;  // bound used to pick solver resolution

  static FieldSource zero();
  static FieldSource from_grid(const GridField& f);
  static FieldSource from_function(std::function<double(double, double)> f, double max_abs);
  static FieldSource from_coeffs(const SpectralCoeffs& c);
  FieldSource operator+(const FieldSource& o) const;
};

MeasurementSet forward_F(const FieldSource& q_total, const MeasurementSetup& setup, const ResolutionProfile& profile,
                         const SolverOptions& opt = {});
MeasurementSet forward_F(const GridField& q_total, const MeasurementSetup& setup, const ResolutionProfile& profile,
                         const SolverOptions& opt = {});

// forward_F(q* + eta*) at the data-generation resolution.
MeasurementSet generate_data(const FieldSource& q_star, const FieldSource& eta_star, const MeasurementSetup& setup,
                             const ResolutionProfile& profile = {10.0, 0}, const SolverOptions& opt = {});
MeasurementSet generate_data(const GridField& q_star, const GridField& eta_star, const MeasurementSetup& setup,
                             const ResolutionProfile& profile = {10.0, 0}, const SolverOptions& opt = {});

MeasurementSet average_data(const std::vector<MeasurementSet>& sets);
MeasurementSet operator-(const MeasurementSet& a, const MeasurementSet& b);

// Block for k_j flattened wave-major: (m, p) at (m - 1) n_p + (p - 1).
std::vector<cplx> slice_frequency(const MeasurementSet& set, int j);

//   MST1: "MST1", u32 Q, n_theta, n_p, f64 k_min, dk, R, then complex128 data
void write_mst1(std::ostream& os, const MeasurementSet& set);
MeasurementSet read_mst1(std::istream& is);
void write_mst1(const std::string& path, const MeasurementSet& set);
MeasurementSet read_mst1(const std::string& path);

}  // namespace sb
