#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace sb {

struct GmresOptions {
  double tol = 1e-8;  // relative to ||b||
  int max_iters = 500;
  int restart = 60;
};

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0;
  bool converged = false;
};

using LinearOp = std::function<void(const std::vector<std::complex<double>>&, std::vector<std::complex<double>>&)>;

// Restarted GMRES with modified Gram-Schmidt and Givens rotations. x holds the
// initial guess on entry and the solution on exit.
GmresResult gmres(const LinearOp& A, const std::vector<std::complex<double>>& b, std::vector<std::complex<double>>& x,
                  const GmresOptions& opt);

}  // namespace sb
