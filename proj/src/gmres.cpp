#include "scatterbench/gmres.hpp"

#include <cmath>

namespace sb {

namespace {

using cvec = std::vector<std::complex<double>>;

double norm2(const cvec& v) {
  double s = 0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

std::complex<double> dot(const cvec& a, const cvec& b) {  // a^H b
  std::complex<double> s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

GmresResult gmres(const LinearOp& A, const cvec& b, cvec& x, const GmresOptions& opt) {
  const std::size_t n = b.size();
  GmresResult res;
  if (x.size() != n) x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    res.converged = true;
    return res;
  }
  const int m = opt.restart;
  std::vector<cvec> V(m + 1, cvec(n));
  std::vector<std::vector<std::complex<double>>> H(m + 1, std::vector<std::complex<double>>(m, 0.0));
  std::vector<std::complex<double>> cs(m), sn(m), g(m + 1);
  cvec r(n), w(n);

  while (res.iterations < opt.max_iters) {
    A(x, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    double beta = norm2(r);
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= opt.tol) {
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    for (; j < m && res.iterations < opt.max_iters; ++j) {
      ++res.iterations;
      A(V[j], w);
      for (int i = 0; i <= j; ++i) {
        H[i][j] = dot(V[i], w);
        for (std::size_t l = 0; l < n; ++l) w[l] -= H[i][j] * V[i][l];
      }
      const double hn = norm2(w);
      H[j + 1][j] = hn;
      if (hn > 0)
        for (std::size_t l = 0; l < n; ++l) V[j + 1][l] = w[l] / hn;
      for (int i = 0; i < j; ++i) {
        const auto t = std::conj(cs[i]) * H[i][j] + std::conj(sn[i]) * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      const double a = std::abs(H[j][j]);
      const double d = std::hypot(a, hn);
      if (d == 0) {
        cs[j] = 1;
        sn[j] = 0;
      } else {
        cs[j] = H[j][j] / d;
        sn[j] = hn / d;
      }
      H[j][j] = d;
      H[j + 1][j] = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];
      res.relative_residual = std::abs(g[j + 1]) / bnorm;
      if (res.relative_residual <= opt.tol || hn == 0) {
        ++j;
        break;
      }
    }
    // back substitution on the j x j triangle
    std::vector<std::complex<double>> y(j);
    for (int i = j - 1; i >= 0; --i) {
      auto s = g[i];
      for (int l = i + 1; l < j; ++l) s -= H[i][l] * y[l];
      y[i] = s / H[i][i];
    }
    for (int i = 0; i < j; ++i)
      for (std::size_t l = 0; l < n; ++l) x[l] += y[i] * V[i][l];
  }
  A(x, w);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
  res.relative_residual = norm2(r) / bnorm;
  res.converged = res.relative_residual <= opt.tol;
  return res;
}

}  // namespace sb
