#include "scatterbench/forward.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "scatterbench/errors.hpp"
#include "scatterbench/gmres.hpp"

namespace sb {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// ---------------------------------------------------------------- FFT plans

struct FftPlan {
  int p1 = 0, p2 = 0;
  fftw_plan fwd = nullptr, bwd = nullptr;
};

std::mutex g_fftw_mutex;

const FftPlan& plan_for(int p1, int p2) {
  static std::map<std::pair<int, int>, FftPlan> plans;
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  auto it = plans.find({p1, p2});
  if (it != plans.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(p1) * p2);
  // FFTW_ESTIMATE keeps plan selection, and therefore rounding, identical run to run.
  FftPlan p{p1, p2, fftw_plan_dft_2d(p1, p2, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE),
            fftw_plan_dft_2d(p1, p2, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE)};
  fftw_free(buf);
  return plans.emplace(std::make_pair(p1, p2), p).first->second;
}

int fft_size(int n) {
  // smallest 2^a 3^b 5^c 7^d >= n
  for (int m = n;; ++m) {
    int r = m;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

struct FftBuffer {
  explicit FftBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
  ~FftBuffer() { fftw_free(data); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  fftw_complex* data;
};

// ---------------------------------------------------------- kernel caches

// FFT of the zero-padded lattice kernel h^2 G(|r|) with the corrected self term.
struct Kernel {
  GridGeometry g;
  double k = 0;
  int p1 = 0, p2 = 0;
  std::vector<cplx> khat;
  const FftPlan* plan = nullptr;

  // out = sum_j K(i - j) in_j on the node grid
  void apply(const std::vector<cplx>& in, std::vector<cplx>& out, FftBuffer& buf) const {
    const std::size_t P = static_cast<std::size_t>(p1) * p2;
    auto* z = reinterpret_cast<cplx*>(buf.data);
    std::fill(z, z + P, cplx(0.0));
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) z[static_cast<std::size_t>(i) * p2 + j] = in[g.index(i, j)];
    fftw_execute_dft(plan->fwd, buf.data, buf.data);
    for (std::size_t t = 0; t < P; ++t) z[t] *= khat[t];
    fftw_execute_dft(plan->bwd, buf.data, buf.data);
    out.resize(g.size());
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) out[g.index(i, j)] = z[static_cast<std::size_t>(i) * p2 + j];
  }
};

using KernelKey = std::tuple<int, int, double, double, double, double, double>;

KernelKey key_of(const GridGeometry& g, double k) {
  return {g.nx, g.ny, g.box.x0, g.box.x1, g.box.y0, g.box.y1, k};
}

std::mutex g_cache_mutex;
std::map<KernelKey, std::shared_ptr<const Kernel>> g_kernels;
std::map<std::tuple<KernelKey, int, double>, std::shared_ptr<const std::vector<std::vector<cplx>>>> g_receivers;
constexpr std::size_t kCacheLimit = 48;

std::shared_ptr<const Kernel> build_kernel(const GridGeometry& g, double k) {
  const double h = g.hx();
  if (std::abs(g.hy() - h) > 1e-12 * h) fail(ErrorKind::ConfigError, "solver grid needs equal spacing in x and y");
  auto K = std::make_shared<Kernel>();
  K->g = g;
  K->k = k;
  K->p1 = fft_size(2 * g.nx - 1);
  K->p2 = fft_size(2 * g.ny - 1);
  K->plan = &plan_for(K->p1, K->p2);
  const std::size_t P = static_cast<std::size_t>(K->p1) * K->p2;
  // distinct |offset| pairs only
  std::vector<cplx> radial(static_cast<std::size_t>(g.nx) * g.ny);
  for (int a = 0; a < g.nx; ++a)
    for (int b = 0; b < g.ny; ++b)
      radial[static_cast<std::size_t>(a) * g.ny + b] =
          (a == 0 && b == 0) ? corrected_self_kernel(k, h) * h * h : green2d(k, h * std::hypot(a, b)) * (h * h);
  FftBuffer buf(P);
  auto* z = reinterpret_cast<cplx*>(buf.data);
  for (int a = 0; a < K->p1; ++a) {
    const int da = a < g.nx ? a : K->p1 - a;
    for (int b = 0; b < K->p2; ++b) {
      const int db = b < g.ny ? b : K->p2 - b;
      const bool used = da < g.nx && db < g.ny;
      z[static_cast<std::size_t>(a) * K->p2 + b] = used ? radial[static_cast<std::size_t>(da) * g.ny + db] : 0.0;
    }
  }
  fftw_execute_dft(K->plan->fwd, buf.data, buf.data);
  K->khat.assign(z, z + P);
  for (auto& v : K->khat) v /= static_cast<double>(P);
  return K;
}

std::shared_ptr<const Kernel> kernel_for(const GridGeometry& g, double k) {
  const auto key = key_of(g, k);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_kernels.find(key);
    if (it != g_kernels.end()) return it->second;
  }
  auto K = build_kernel(g, k);
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  if (g_kernels.size() >= kCacheLimit) g_kernels.clear();
  return g_kernels.emplace(key, K).first->second;
}

// h^2 G(x_p - y_j) for every receiver p and node j.
std::shared_ptr<const std::vector<std::vector<cplx>>> receivers_for(const GridGeometry& g, double k,
                                                                     const ReceiverRing& ring) {
  const auto key = std::make_tuple(key_of(g, k), ring.n_p, ring.radius);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_receivers.find(key);
    if (it != g_receivers.end()) return it->second;
  }
  auto R = std::make_shared<std::vector<std::vector<cplx>>>(ring.n_p, std::vector<cplx>(g.size()));
  const double w = g.hx() * g.hy();
  for (int p = 1; p <= ring.n_p; ++p) {
    const auto xp = ring.point(p);
    auto& row = (*R)[p - 1];
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        row[g.index(i, j)] = w * green2d(k, std::hypot(xp[0] - g.x(i), xp[1] - g.y(j)));
  }
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  if (g_receivers.size() >= kCacheLimit) g_receivers.clear();
  return g_receivers.emplace(key, R).first->second;
}

// ------------------------------------------------------------ solve helpers

void check_inputs(const GridField& q, double k, const SolverOptions& opt) {
  if (!(k > 0)) fail(ErrorKind::ConfigError, "wavenumber must be positive");
  if (opt.model == ForwardModel::Full) {
    const double ppw = points_per_wavelength(q.geom, k, max_abs(q));
    if (ppw < opt.min_ppw * (1 - 1e-9))
      fail(ErrorKind::ResolutionTooCoarse, "grid offers " + std::to_string(ppw) + " points per wavelength at k=" +
                                               std::to_string(k) + ", need " + std::to_string(opt.min_ppw));
  }
}

std::vector<cplx> incident(const GridGeometry& g, const IncidentWave& w) {
  std::vector<cplx> u(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      u[g.index(i, j)] = std::polar(1.0, w.k * (g.x(i) * w.theta[0] + g.y(j) * w.theta[1]));
  return u;
}

// Solves (I - k^2 A Q) x = b.
std::vector<cplx> solve_ls(const Kernel& K, const std::vector<double>& q, const std::vector<cplx>& b,
                           const SolverOptions& opt, int* iterations = nullptr) {
  const double k2 = K.k * K.k;
  FftBuffer buf(static_cast<std::size_t>(K.p1) * K.p2);
  std::vector<cplx> tmp(b.size()), conv;
  LinearOp op = [&](const std::vector<cplx>& v, std::vector<cplx>& out) {
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = q[i] * v[i];
    K.apply(tmp, conv, buf);
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - k2 * conv[i];
  };
  std::vector<cplx> x = b;
  const GmresResult r = gmres(op, b, x, GmresOptions{opt.tol, opt.max_iters, opt.restart});
  if (!r.converged)
    fail(ErrorKind::NonConvergence, "GMRES stopped at relative residual " + std::to_string(r.relative_residual) +
                                        " after " + std::to_string(r.iterations) + " iterations, k=" +
                                        std::to_string(K.k));
  if (iterations) *iterations = r.iterations;
  return x;
}

cplx receiver_sum(const std::vector<cplx>& r, const std::vector<cplx>& f) {
  cplx s = 0;
  for (std::size_t j = 0; j < f.size(); ++j) s += r[j] * f[j];
  return s;
}

// Runs body(i) for i in [0, n) in parallel, rethrowing the first exception.
template <class F>
void parallel_for(int n, F&& body) {
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(sb_forward_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

// sin(m (t + pi/2)) for m = 1..M, zero for nodes outside the support square.
Eigen::MatrixXd sine_matrix(int n, double t0, double h, int M) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, M);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    if (t < -kHalfPi - 1e-12 || t > kHalfPi + 1e-12) continue;
    for (int m = 1; m <= M; ++m) S(i, m - 1) = std::sin(m * (t + kHalfPi));
  }
  return S;
}

}  // namespace

// ------------------------------------------------------------------ public

std::array<double, 2> ReceiverRing::point(int p) const {
  const double a = 2.0 * std::numbers::pi * p / n_p;
  return {radius * std::cos(a), radius * std::sin(a)};
}

void ReceiverRing::validate() const {
  if (n_p < 1) fail(ErrorKind::ConfigError, "receiver count must be positive");
  if (!(radius > kHalfPi * std::numbers::sqrt2)) fail(ErrorKind::ConfigError, "receiver ring must enclose the support square");
}

double lattice_log_constant() {
  // C = -log(2 pi)/2 - log(Gamma(1/4)^2 / (2 pi sqrt 2))
  const double g = std::tgamma(0.25);
  return -0.5 * std::log(2 * std::numbers::pi) - std::log(g * g / (2 * std::numbers::pi * std::numbers::sqrt2));
}

cplx corrected_self_kernel(double k, double h) {
  static const double C = lattice_log_constant();
  return cplx(-(std::log(k * h / 2) + kEulerGamma + C) / (2 * std::numbers::pi), 0.25);
}

cplx green2d(double k, double r) {
  const double x = k * r;
  return cplx(0.0, 0.25) * cplx(std::cyl_bessel_j(0.0, x), std::cyl_neumann(0.0, x));
}

double points_per_wavelength(const GridGeometry& g, double k, double max_abs_q) {
  const double lambda = 2 * std::numbers::pi / (k * std::sqrt(1 + max_abs_q));
  return lambda / std::max(g.hx(), g.hy());
}

void clear_kernel_cache() {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_kernels.clear();
  g_receivers.clear();
}

ScatterSolution solve_scattered(const GridField& q, const IncidentWave& wave, const ReceiverRing& ring,
                                const SolverOptions& opt) {
  check_inputs(q, wave.k, opt);
  ScatterSolution sol;
  sol.wave = wave;
  sol.total_field = ComplexField(q.geom);
  const auto uinc = incident(q.geom, wave);
  if (opt.model == ForwardModel::Born) {
    sol.total_field.v = uinc;
  } else {
    const auto K = kernel_for(q.geom, wave.k);
    sol.total_field.v = solve_ls(*K, q.v, uinc, opt, &sol.iterations);
  }
  const auto R = receivers_for(q.geom, wave.k, ring);
  std::vector<cplx> qu(q.geom.size());
  for (std::size_t j = 0; j < qu.size(); ++j) qu[j] = q.v[j] * sol.total_field.v[j];
  const double k2 = wave.k * wave.k;
  sol.receiver_values.resize(ring.n_p);
  for (int p = 0; p < ring.n_p; ++p) sol.receiver_values[p] = k2 * receiver_sum((*R)[p], qu);
  return sol;
}

std::vector<cplx> frechet_apply(const ScatterSolution& base, const GridField& q, const GridField& dq,
                                const ReceiverRing& ring, const SolverOptions& opt) {
  if (!(dq.geom == q.geom) || !(base.total_field.geom == q.geom))
    fail(ErrorKind::ConfigError, "frechet_apply needs q, dq and the base solution on one grid");
  const double k = base.wave.k, k2 = k * k;
  const auto& u = base.total_field.v;
  const std::size_t N = q.geom.size();
  std::vector<cplx> src(N);
  for (std::size_t j = 0; j < N; ++j) src[j] = dq.v[j] * u[j];
  std::vector<cplx> f = src;  // dq u + q du
  if (opt.model == ForwardModel::Full) {
    const auto K = kernel_for(q.geom, k);
    std::vector<cplx> rhs;
    FftBuffer buf(static_cast<std::size_t>(K->p1) * K->p2);
    K->apply(src, rhs, buf);
    for (auto& v : rhs) v *= k2;
    const auto du = solve_ls(*K, q.v, rhs, opt);
    for (std::size_t j = 0; j < N; ++j) f[j] += q.v[j] * du[j];
  }
  const auto R = receivers_for(q.geom, k, ring);
  std::vector<cplx> out(ring.n_p);
  for (int p = 0; p < ring.n_p; ++p) out[p] = k2 * receiver_sum((*R)[p], f);
  return out;
}

struct FrequencyOperator::Impl {
  GridField q;
  double k;
  std::vector<IncidentWave> waves;
  ReceiverRing ring;
  SolverOptions opt;
  std::vector<ScatterSolution> sols;
  std::vector<cplx> data;
};

FrequencyOperator::FrequencyOperator(const GridField& q, double k, const std::vector<IncidentWave>& waves,
                                     const ReceiverRing& ring, const SolverOptions& opt)
    : impl_(std::make_unique<Impl>(Impl{q, k, waves, ring, opt, {}, {}})) {
  check_inputs(q, k, opt);
  for (const auto& w : waves)
    if (w.k != k) fail(ErrorKind::ConfigError, "all waves of a frequency operator must share k");
  // warm the caches outside the parallel region
  if (opt.model == ForwardModel::Full) kernel_for(q.geom, k);
  receivers_for(q.geom, k, ring);
  const int nw = static_cast<int>(waves.size());
  impl_->sols.resize(nw);
  parallel_for(nw, [&](int m) {
    try {
      impl_->sols[m] = solve_scattered(q, waves[m], ring, opt);
    } catch (const Error& e) {
      throw e.with_context("k=" + std::to_string(k) + " theta " + std::to_string(m + 1));
    }
  });
  impl_->data.reserve(static_cast<std::size_t>(nw) * ring.n_p);
  for (const auto& s : impl_->sols) impl_->data.insert(impl_->data.end(), s.receiver_values.begin(), s.receiver_values.end());
}

FrequencyOperator::~FrequencyOperator() = default;

const std::vector<cplx>& FrequencyOperator::data() const { return impl_->data; }
const std::vector<ScatterSolution>& FrequencyOperator::solutions() const { return impl_->sols; }

Eigen::MatrixXcd FrequencyOperator::jacobian(const std::vector<Mode>& modes) const {
  const auto& I = *impl_;
  const GridGeometry& g = I.q.geom;
  const int np = I.ring.n_p, nw = static_cast<int>(I.waves.size());
  const auto R = receivers_for(g, I.k, I.ring);

  // Adjoint fields: the Lippmann-Schwinger operator is symmetric, so the
  // receiver functional's representer solves the forward system.
  std::vector<std::vector<cplx>> w(np);
  if (I.opt.model == ForwardModel::Full) {
    const auto K = kernel_for(g, I.k);
    parallel_for(np, [&](int p) { w[p] = solve_ls(*K, I.q.v, (*R)[p], I.opt); });
  } else {
    for (int p = 0; p < np; ++p) w[p] = (*R)[p];
  }

  int M = 0;
  for (const auto& m : modes) M = std::max({M, m.first, m.second});
  Eigen::MatrixXcd J(static_cast<Eigen::Index>(nw) * np, static_cast<Eigen::Index>(modes.size()));
  if (modes.empty()) return J;
  const Eigen::MatrixXd Sx = sine_matrix(g.nx, g.box.x0, g.hx(), M);
  const Eigen::MatrixXd Sy = sine_matrix(g.ny, g.box.y0, g.hy(), M);
  const double k2 = I.k * I.k;

  parallel_for(nw * np, [&](int row) {
    const int m = row / np, p = row % np;
    const auto& u = I.sols[m].total_field.v;
    Eigen::MatrixXd Pr(g.nx, g.ny), Pi(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const cplx z = u[g.index(i, j)] * w[p][g.index(i, j)];
        Pr(i, j) = z.real();
        Pi(i, j) = z.imag();
      }
    const Eigen::MatrixXd Cr = Sx.transpose() * Pr * Sy;
    const Eigen::MatrixXd Ci = Sx.transpose() * Pi * Sy;
    for (std::size_t c = 0; c < modes.size(); ++c) {
      const int a = modes[c].first - 1, b = modes[c].second - 1;
      J(row, static_cast<Eigen::Index>(c)) = k2 * cplx(Cr(a, b), Ci(a, b));
    }
  });
  return J;
}

Eigen::MatrixXcd jacobian_reference(const GridField& q, const std::vector<IncidentWave>& waves,
                                    const ReceiverRing& ring, const std::vector<Mode>& modes,
                                    const SolverOptions& opt) {
  const int np = ring.n_p, nw = static_cast<int>(waves.size());
  std::vector<ScatterSolution> sols;
  for (const auto& w : waves) sols.push_back(solve_scattered(q, w, ring, opt));
  int M = 1;
  for (const auto& m : modes) M = std::max({M, m.first, m.second});
  Eigen::MatrixXcd J(static_cast<Eigen::Index>(nw) * np, static_cast<Eigen::Index>(modes.size()));
  for (std::size_t c = 0; c < modes.size(); ++c) {
    SpectralCoeffs e(M);
    e(modes[c].first, modes[c].second) = 1.0;
    const GridField dq = synthesize(e, q.geom);
    for (int m = 0; m < nw; ++m) {
      const auto col = frechet_apply(sols[m], q, dq, ring, opt);
      for (int p = 0; p < np; ++p) J(static_cast<Eigen::Index>(m) * np + p, static_cast<Eigen::Index>(c)) = col[p];
    }
  }
  return J;
}

Eigen::MatrixXcd jacobian_matrix(const GridField& q, const std::vector<IncidentWave>& waves, const ReceiverRing& ring,
                                 int M, const TruncationRule& trunc, const SolverOptions& opt) {
  if (waves.empty()) fail(ErrorKind::ConfigError, "jacobian_matrix needs at least one wave");
  const double k = waves.front().k;
  FrequencyOperator op(q, k, waves, ring, opt);
  return op.jacobian(retained_modes(M, trunc, k));
}

}  // namespace sb
