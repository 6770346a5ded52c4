#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "scatterbench/grid.hpp"
#include "scatterbench/spectral.hpp"

namespace sb {

struct IncidentWave {
  double k = 1.0;
  std::array<double, 2> theta{1.0, 0.0};
};

// Receivers at radius * (cos(2 pi p / n_p), sin(2 pi p / n_p)), p = 1..n_p.
struct ReceiverRing {
  int n_p = 120;
  double radius = 3.0;
  std::array<double, 2> point(int p) const;
  void validate() const;
};

enum class ForwardModel {
  Full,  // Lippmann-Schwinger solve
  Born,  // total field replaced by the incident field
};

struct SolverOptions {
  double min_ppw = 10.0;  // points per wavelength at k sqrt(1 + max|q|)
  double tol = 1e-8;
  int max_iters = 500;
  int restart = 60;
  ForwardModel model = ForwardModel::Full;
};

struct ScatterSolution {
  IncidentWave wave;
  ComplexField total_field;
  std::vector<cplx> receiver_values;  // scattered field at the receivers
  int iterations = 0;
};

// Points per wavelength offered by grid g at wavenumber k for contrast q.
double points_per_wavelength(const GridGeometry& g, double k, double max_abs_q);

// Solves u - k^2 G*(q u) = u_inc on the node grid of q, which solves
// Delta u + k^2 (1 + q) u = 0 with an outgoing scattered field.
// Receiver values are k^2 (G*(q u))(x_p).
ScatterSolution solve_scattered(const GridField& q, const IncidentWave& wave, const ReceiverRing& ring,
                                const SolverOptions& opt = {});

// Derivative of the receiver values in direction dq at the solution `base`,
// normalised so that F(q + h dq) = F(q) + h frechet_apply(...) + O(h^2).
std::vector<cplx> frechet_apply(const ScatterSolution& base, const GridField& q, const GridField& dq,
                                const ReceiverRing& ring, const SolverOptions& opt = {});

// Forward data and, optionally, the Jacobian over a list of sine modes for all
// waves at one wavenumber. Rows are wave-major, receiver-minor.
struct FrequencyEvaluation {
  std::vector<cplx> data;
  Eigen::MatrixXcd jacobian;  // empty unless requested
  int max_iterations = 0;
};

class FrequencyOperator {
 public:
  FrequencyOperator(const GridField& q, double k, const std::vector<IncidentWave>& waves, const ReceiverRing& ring,
                    const SolverOptions& opt = {});
  ~FrequencyOperator();
  FrequencyOperator(const FrequencyOperator&) = delete;
  FrequencyOperator& operator=(const FrequencyOperator&) = delete;

  // Forward solves for every wave (parallel over waves).
  const std::vector<cplx>& data() const;
  const std::vector<ScatterSolution>& solutions() const;

  // Adjoint-state Jacobian: one extra solve per receiver, then separable sine
  // sums for every (wave, receiver) pair. Parallel over receivers and pairs.
  Eigen::MatrixXcd jacobian(const std::vector<Mode>& modes) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Column-by-column Jacobian through frechet_apply on synthesized basis
// functions; serial. Kept as the reference for the adjoint path.
Eigen::MatrixXcd jacobian_reference(const GridField& q, const std::vector<IncidentWave>& waves,
                                    const ReceiverRing& ring, const std::vector<Mode>& modes,
                                    const SolverOptions& opt = {});

// Jacobian over the retained modes of an M x M array under `trunc` at the
// waves' common wavenumber.
Eigen::MatrixXcd jacobian_matrix(const GridField& q, const std::vector<IncidentWave>& waves, const ReceiverRing& ring,
                                 int M, const TruncationRule& trunc, const SolverOptions& opt = {});

// Self-cell weight of the corrected trapezoid rule for (i/4) H0(k r) on a
// square lattice of spacing h, divided by h^2.
cplx corrected_self_kernel(double k, double h);

// The lattice constant in the log correction.
double lattice_log_constant();

cplx green2d(double k, double r);

void clear_kernel_cache();

}  // namespace sb
