#include "scatterbench/measurement.hpp"

#include <cmath>
#include <fstream>

#include "scatterbench/errors.hpp"
#include "scatterbench/io.hpp"

namespace sb {

std::vector<IncidentWave> MeasurementSetup::waves(int j) const {
  std::vector<IncidentWave> w(n_theta);
  for (int m = 1; m <= n_theta; ++m) {
    const double a = 2.0 * std::numbers::pi * m / n_theta;
    w[m - 1] = IncidentWave{k(j), {std::cos(a), std::sin(a)}};
  }
  return w;
}

void MeasurementSetup::validate() const {
  if (!(k_min > 0)) fail(ErrorKind::ConfigError, "k_min must be positive");
  if (Q > 1 && !(dk > 0)) fail(ErrorKind::ConfigError, "frequencies must be strictly increasing");
  if (Q < 1 || n_theta < 1) fail(ErrorKind::ConfigError, "Q and n_theta must be positive");
  ring.validate();
}

bool MeasurementSetup::operator==(const MeasurementSetup& o) const {
  return k_min == o.k_min && dk == o.dk && Q == o.Q && n_theta == o.n_theta && ring.n_p == o.ring.n_p &&
         ring.radius == o.ring.radius;
}

MeasurementSet::MeasurementSet(const MeasurementSetup& s)
    : setup(s), data(static_cast<std::size_t>(s.Q) * s.block_size(), cplx(0.0)) {}

cplx& MeasurementSet::at(int j, int m, int p) {
  return data[static_cast<std::size_t>(j - 1) * setup.block_size() + static_cast<std::size_t>(m - 1) * setup.ring.n_p +
              (p - 1)];
}

const cplx& MeasurementSet::at(int j, int m, int p) const { return const_cast<MeasurementSet*>(this)->at(j, m, p); }

GridGeometry ResolutionProfile::grid_for(double k, double max_abs_q) const {
  const double lambda = 2 * std::numbers::pi / (k * std::sqrt(1 + max_abs_q));
  const int n = static_cast<int>(std::ceil(std::numbers::pi * ppw / lambda - 1e-9)) + 1;
  return square_grid(std::max(n, std::max(n_min, 3)));
}

FieldSource FieldSource::zero() {
  return {[](const GridGeometry& g) { return GridField(g); }, 0.0};
}

FieldSource FieldSource::from_grid(const GridField& f) {
  return {[f](const GridGeometry& g) { return resample(f, g); }, sb::max_abs(f)};
}

FieldSource FieldSource::from_function(std::function<double(double, double)> fn, double bound) {
  return {[fn](const GridGeometry& g) {
            GridField out(g);
            for (int i = 0; i < g.nx; ++i)
              for (int j = 0; j < g.ny; ++j) out(i, j) = fn(g.x(i), g.y(j));
            return out;
          },
          bound};
}

FieldSource FieldSource::from_coeffs(const SpectralCoeffs& c) {
  const double bound = sb::max_abs(synthesize(c, square_grid(std::max(analysis_nodes(c.M()), 65))));
  return {[c](const GridGeometry& g) { return synthesize(c, g); }, bound};
}

FieldSource FieldSource::operator+(const FieldSource& o) const {
  auto a = on, b = o.on;
  return {[a, b](const GridGeometry& g) {
            GridField f = a(g);
            const GridField h = b(g);
            for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] += h.v[i];
            return f;
          },
          max_abs + o.max_abs};
}

MeasurementSet forward_F(const FieldSource& q_total, const MeasurementSetup& setup, const ResolutionProfile& profile,
                         const SolverOptions& opt) {
  setup.validate();
  MeasurementSet out(setup);
  for (int j = 1; j <= setup.Q; ++j) {
    const double k = setup.k(j);
    const GridField q = q_total.on(profile.grid_for(k, q_total.max_abs));
    FrequencyOperator op(q, k, setup.waves(j), setup.ring, opt);
    std::copy(op.data().begin(), op.data().end(), out.data.begin() + static_cast<std::ptrdiff_t>((j - 1) * setup.block_size()));
  }
  return out;
}

MeasurementSet forward_F(const GridField& q_total, const MeasurementSetup& setup, const ResolutionProfile& profile,
                         const SolverOptions& opt) {
  return forward_F(FieldSource::from_grid(q_total), setup, profile, opt);
}

MeasurementSet generate_data(const FieldSource& q_star, const FieldSource& eta_star, const MeasurementSetup& setup,
                             const ResolutionProfile& profile, const SolverOptions& opt) {
  return forward_F(q_star + eta_star, setup, profile, opt);
}

MeasurementSet generate_data(const GridField& q_star, const GridField& eta_star, const MeasurementSetup& setup,
                             const ResolutionProfile& profile, const SolverOptions& opt) {
  return generate_data(FieldSource::from_grid(q_star), FieldSource::from_grid(eta_star), setup, profile, opt);
}

MeasurementSet average_data(const std::vector<MeasurementSet>& sets) {
  if (sets.empty()) fail(ErrorKind::ConfigError, "average_data needs at least one set");
  MeasurementSet out(sets.front().setup);
  for (const auto& s : sets) {
    if (!(s.setup == out.setup)) fail(ErrorKind::ConfigError, "SetupMismatch: datasets have different setups");
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += s.data[i];
  }
  const double inv = 1.0 / static_cast<double>(sets.size());
  for (auto& v : out.data) v *= inv;
  return out;
}

MeasurementSet operator-(const MeasurementSet& a, const MeasurementSet& b) {
  if (!(a.setup == b.setup)) fail(ErrorKind::ConfigError, "SetupMismatch: datasets have different setups");
  MeasurementSet out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

std::vector<cplx> slice_frequency(const MeasurementSet& set, int j) {
  if (j < 1 || j > set.setup.Q) fail(ErrorKind::ConfigError, "IndexOutOfRange: frequency index " + std::to_string(j));
  const auto n = static_cast<std::ptrdiff_t>(set.setup.block_size());
  const auto first = set.data.begin() + (j - 1) * n;
  return {first, first + n};
}

void write_mst1(std::ostream& os, const MeasurementSet& set) {
  const auto& s = set.setup;
  os.write("MST1", 4);
  binio::put_u32(os, static_cast<unsigned>(s.Q));
  binio::put_u32(os, static_cast<unsigned>(s.n_theta));
  binio::put_u32(os, static_cast<unsigned>(s.ring.n_p));
  binio::put_f64(os, s.k_min);
  binio::put_f64(os, s.dk);
  binio::put_f64(os, s.ring.radius);
  for (const auto& z : set.data) {
    binio::put_f64(os, z.real());
    binio::put_f64(os, z.imag());
  }
}

MeasurementSet read_mst1(std::istream& is) {
  binio::expect_magic(is, "MST1");
  MeasurementSetup s;
  s.Q = static_cast<int>(binio::get_u32(is));
  s.n_theta = static_cast<int>(binio::get_u32(is));
  s.ring.n_p = static_cast<int>(binio::get_u32(is));
  if (s.Q < 1 || s.n_theta < 1 || s.ring.n_p < 1 || s.Q > 4096 || s.n_theta > 4096 || s.ring.n_p > 65536)
    fail(ErrorKind::FormatError, "MST1 dimensions out of range");
  s.k_min = binio::get_f64(is);
  s.dk = binio::get_f64(is);
  s.ring.radius = binio::get_f64(is);
  MeasurementSet set(s);
  for (auto& z : set.data) {
    const double re = binio::get_f64(is);
    const double im = binio::get_f64(is);
    z = cplx(re, im);
  }
  return set;
}

void write_mst1(const std::string& path, const MeasurementSet& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path);
  write_mst1(os, set);
}

MeasurementSet read_mst1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::IoError, "cannot read " + path);
  return read_mst1(is);
}

}  // namespace sb
