// Acceptance checks, one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "scatterbench/errors.hpp"
#include "scatterbench/harness.hpp"
#include "scatterbench/io.hpp"
#include "scatterbench/media.hpp"
#include "scatterbench/rng.hpp"
#include "scatterbench/strategies.hpp"
#include "scatterbench/tuning.hpp"

using namespace sb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

void note(const std::string& s) { std::printf("      %s\n", s.c_str()); std::fflush(stdout); }

MeasurementSetup make_setup(double k_min, double dk, int Q, int n_theta, int n_p) {
  MeasurementSetup s;
  s.k_min = k_min;
  s.dk = dk;
  s.Q = Q;
  s.n_theta = n_theta;
  s.ring = ReceiverRing{n_p, 3.0};
  return s;
}

// Data on a finer grid than the inversion uses.
const ResolutionProfile kDataProfile{10.0, 65};
const ResolutionProfile kInvProfile{8.0, 49};
constexpr int kTruth = 129;

StrategyInput inversion_input(const MeasurementSetup& s, ForwardModel model = ForwardModel::Full) {
  StrategyInput in;
  in.ctx.setup = s;
  in.ctx.profile = kInvProfile;
  in.ctx.solver.model = model;
  return in;
}

MeasurementSet data_for(const FieldSource& q, const FieldSource& eta, const MeasurementSetup& s,
                        ForwardModel model = ForwardModel::Full) {
  SolverOptions opt;
  opt.model = model;
  return generate_data(q, eta, s, kDataProfile, opt);
}

double field_norm(const FieldSource& f) { return l2_norm(f.on(square_grid(kTruth))); }

// Bumps projected onto the modes m1 + m2 <= band.
SpectralCoeffs banded_bumps(int band) {
  const int M = band - 1;
  return truncate(analyze(make_bumps(square_grid(257)), M), TruncationRule::diagonal(), 0.5 * band);
}

// ---------------------------------------------------------------------------

Outcome c1_forward_oracle() {
  const ReceiverRing ring{32, 3.0};
  const auto ref = oracle::disk_series(2.0, 0.1, 0.8, ring);
  auto err = [&](int n) {
    const auto s = solve_scattered(make_disk(0.1, 0.8, square_grid(n)), IncidentWave{2.0, {1.0, 0.0}}, ring);
    return oracle::rel_l2(s.receiver_values, ref);
  };
  const double e128 = err(128), e255 = err(255);  // h = pi/127 and pi/254
  const double ratio = e128 / e255;
  return {e128 <= 1e-3 && ratio >= 4.0,
          "err(128^2)=" + fmt("%.3e", e128) + " err(255^2)=" + fmt("%.3e", e255) + " ratio=" + fmt("%.1f", ratio)};
}

Outcome c2_derivative() {
  const ReceiverRing ring{32, 3.0};
  const GridField q = make_bumps(square_grid(64));
  // Smooth random direction of unit size; large enough that the h^2 term
  // still dominates roundoff at h = 1e-4.
  SpectralCoeffs dc(5);
  CounterRng rng(2024, 1);
  for (double& v : dc.data()) v = rng.normal();
  GridField dq = synthesize(dc, q.geom);
  dq = (1.0 / max_abs(dq)) * dq;
  SolverOptions opt;
  opt.tol = 1e-14;
  opt.max_iters = 2000;
  std::vector<double> errs;
  std::string d;
  for (int m = 0; m < 3; ++m) {
    const IncidentWave w{2.0, {std::cos(2.0 * m), std::sin(2.0 * m)}};
    const auto base = solve_scattered(q, w, ring, opt);
    const auto lin = frechet_apply(base, q, dq, ring, opt);
    for (int e = 0; e < 3; ++e) {
      const double h = std::pow(10.0, -2 - e);
      const auto p = solve_scattered(q + h * dq, w, ring, opt), n = solve_scattered(q - h * dq, w, ring, opt);
      std::vector<cplx> fd(ring.n_p);
      for (int i = 0; i < ring.n_p; ++i) fd[i] = (p.receiver_values[i] - n.receiver_values[i]) / (2 * h);
      if (m == 0) errs.push_back(oracle::rel_l2(lin, fd));
      else errs[e] = std::max(errs[e], oracle::rel_l2(lin, fd));
    }
  }
  const double o1 = std::log10(errs[0] / errs[1]), o2 = std::log10(errs[1] / errs[2]);
  const double order = std::min(o1, o2), best = std::min({errs[0], errs[1], errs[2]});
  d = "err(h=1e-2,1e-3,1e-4)=" + fmt("%.2e", errs[0]) + "," + fmt("%.2e", errs[1]) + "," + fmt("%.2e", errs[2]) +
      " order=" + fmt("%.2f", o1) + "," + fmt("%.2f", o2);
  return {order >= 1.9 && best <= 1e-5, d};
}

Outcome c3_stacked_vs_averaged() {
  const MeasurementSetup s = make_setup(1.0, 0.5, 1, 8, 32);
  const FieldSource q = FieldSource::from_function(bumps_value, 0.16);
  std::vector<MeasurementSet> sets;
  const LaplacianMediumSpec lap{32, 1e3, 1.0};
  for (int i = 1; i <= 3; ++i) sets.push_back(data_for(q, FieldSource::from_grid(sample_eta_laplacian(lap, 33, i)), s));
  StrategyInput in = inversion_input(s);
  GNConfig cfg;
  cfg.max_iters = 5;
  cfg.eps_res = 0;
  cfg.eps_step = 0;
  cfg.reject_worse = false;
  cfg.keep_iterates = true;
  const auto trunc = TruncationRule::max_mode_rule(4);
  const auto stacked = rla_stacked(sets, SpectralCoeffs(4), {}, cfg, trunc, in.ctx);
  const auto averaged = rla(average_data(sets), SpectralCoeffs(4), {}, cfg, trunc, in.ctx);
  double worst = 0;
  const auto& a = stacked.freqs[0].iterates;
  const auto& b = averaged.freqs[0].iterates;
  if (a.size() != b.size() || a.empty()) return {false, "iterate counts differ"};
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm() / b[i].norm());
  return {worst <= 1e-10, std::to_string(a.size()) + " iterates, max relative gap " + fmt("%.2e", worst)};
}

Outcome c4_simdnp_born_regime() {
  const MeasurementSetup s = make_setup(1.0, 0.5, 1, 8, 32);
  const double scale = 0.009 / 0.15;  // bumps peak at 0.15
  const FieldSource q = FieldSource::from_function([scale](double x, double y) { return scale * bumps_value(x, y); },
                                                   0.0105);
  PriorSpec p;
  p.M_eta = 8;
  // Pick delta from a pilot draw (independent streams) so that |eta|_inf stays below 0.01.
  double pilot = 0;
  for (int i = 0; i < 32; ++i)
    pilot = std::max(pilot, max_abs(synthesize(sample_eta_spectral(p, 404, 9000 + i), square_grid(kTruth))));
  p.delta = std::pow(0.006 / pilot, 2);
  const int N = 256;
  std::vector<MeasurementSet> sets;
  double worst_eta = 0;
  for (int i = 1; i <= N; ++i) {
    const SpectralCoeffs e = sample_eta_spectral(p, 404, i);
    worst_eta = std::max(worst_eta, max_abs(synthesize(e, square_grid(kTruth))));
    sets.push_back(data_for(q, FieldSource::from_coeffs(e), s));
  }
  const double q_inf = max_abs(q.on(square_grid(kTruth)));
  StrategyInput in = inversion_input(s);
  in.trunc = TruncationRule::max_mode_rule(3);
  in.q0 = SpectralCoeffs(3);
  in.datasets = {data_for(q, FieldSource::zero(), s)};
  const SpectralCoeffs clean = run_rla(in).report.q;
  std::vector<double> gaps;
  std::string d;
  for (int n : {16, 64, 256}) {
    in.datasets.assign(sets.begin(), sets.begin() + n);
    const SpectralCoeffs qs = simdnp(in).report.q;
    gaps.push_back((qs - clean).norm() / clean.norm());
    d += "N=" + std::to_string(n) + ":" + fmt("%.3e", gaps.back()) + " ";
  }
  d += "|q|inf=" + fmt("%.4f", q_inf) + " max|eta|inf=" + fmt("%.4f", worst_eta);
  const bool ok = q_inf <= 0.01 && worst_eta <= 0.01 && gaps[2] <= 0.1 && gaps[1] < gaps[0] && gaps[2] < gaps[1];
  return {ok, d};
}

Outcome c5_sdnp_surrogate() {
  const MeasurementSetup s = make_setup(2.0, 0.5, 1, 8, 32);
  const int M = 3;
  const SpectralCoeffs qstar = analyze(make_bumps(square_grid(129)), M);
  PriorSpec p;
  p.M_eta = M;
  const SpectralCoeffs unit = sample_eta_spectral(p, 505, 1);
  p.delta = std::pow(0.5 * qstar.norm() / unit.norm(), 2);
  const SpectralCoeffs eta_star = sample_eta_spectral(p, 505, 1);
  const MeasurementSet d =
      data_for(FieldSource::from_coeffs(qstar), FieldSource::from_coeffs(eta_star), s, ForwardModel::Born);

  StrategyInput in = inversion_input(s, ForwardModel::Born);
  in.trunc = TruncationRule::max_mode_rule(M);
  in.q0 = SpectralCoeffs(M);
  in.datasets = {d};
  // Antithetic pairs: the sample mean of eta is exactly zero, matching E(eta) = 0.
  for (int i = 0; i < 16; ++i) {
    const SpectralCoeffs e = sample_eta_spectral(p, 505, 100 + i);
    in.eta_samples.push_back(FieldSource::from_coeffs(e));
    in.eta_samples.push_back(FieldSource::from_coeffs(-1.0 * e));
  }
  const SpectralCoeffs a = sisdnp(in).report.q, b = misdnp(in).report.q;
  const SpectralCoeffs target = qstar + eta_star;
  const double agree = (a - b).norm() / a.norm();
  const double ea = (a - target).norm() / target.norm(), eb = (b - target).norm() / target.norm();
  return {agree <= 1e-6 && ea <= 0.1 && eb <= 0.1,
          "sisdnp vs misdnp " + fmt("%.2e", agree) + ", vs q*+eta*-E(eta): " + fmt("%.2e", ea) + ", " + fmt("%.2e", eb)};
}

Outcome c6_mimdnp_trend() {
  const MeasurementSetup s = make_setup(1.0, 0.5, 9, 8, 32);
  const FieldSource q = FieldSource::from_function(bumps_value, 0.16);
  const GridField truth = q.on(square_grid(kTruth));
  LaplacianMediumSpec lap{32, 1e3, 1.0};
  double pilot = 0;
  for (int i = 0; i < 16; ++i)
    pilot += l2_norm(resample(sample_eta_laplacian(lap, 606, 9000 + i), square_grid(kTruth))) / 16;
  lap.delta = std::pow(0.4 * l2_norm(truth) / pilot, 2);
  bool ok = true;
  std::string d;
  for (std::uint64_t seed : {7001ULL, 7002ULL}) {
    std::vector<MeasurementSet> sets;
    double ratio = 0;
    for (int i = 1; i <= 32; ++i) {
      const GridField eta = sample_eta_laplacian(lap, seed, i);
      ratio += l2_norm(resample(eta, square_grid(kTruth))) / l2_norm(truth) / 32;
      sets.push_back(data_for(q, FieldSource::from_grid(eta), s));
    }
    StrategyInput in = inversion_input(s);
    in.datasets = sets;
    const StrategyResult r32 = mimdnp(in);
    in.datasets.assign(sets.begin(), sets.begin() + 4);
    const StrategyResult r4 = mimdnp(in);
    const double e4 = relative_error(r4.report.q, truth), e32 = relative_error(r32.report.q, truth);
    ok = ok && e32 < e4;
    d += "seed " + std::to_string(seed) + ": E(4)=" + fmt("%.4f", e4) + " E(32)=" + fmt("%.4f", e32) +
         " |eta|/|q|=" + fmt("%.2f", ratio) + "; ";
  }
  return {ok, d};
}

// One SISDP instance: q* fixed, eta* drawn from the prior and scaled so that
// |eta*| = ratio |q*|. The reference is the known-background reconstruction.
struct SisdpCase {
  MeasurementSetup setup = make_setup(1.0, 0.5, 9, 8, 32);
  SpectralCoeffs qstar;
  PriorSpec prior;
  SpectralCoeffs eta_star;
  MeasurementSet data;
  SpectralCoeffs qhat;
  std::uint64_t seed = 0;
};

StrategyInput sisdp_input(const SisdpCase& c, const TruncationRule& trunc, int q_modes) {
  StrategyInput in = inversion_input(c.setup);
  in.datasets = {c.data};
  in.trunc = trunc;
  in.q0 = SpectralCoeffs(q_modes);
  return in;
}

SisdpCase sisdp_case(const SpectralCoeffs& qstar, const PriorSpec& eta_prior, double ratio, std::uint64_t seed,
                     const TruncationRule& trunc, int q_modes) {
  SisdpCase c;
  c.qstar = qstar;
  c.seed = seed;
  c.prior = eta_prior;
  c.prior.delta = 1.0;
  const SpectralCoeffs unit = sample_eta_spectral(c.prior, seed, 1);
  c.prior.delta = std::pow(ratio * qstar.norm() / unit.norm(), 2);
  c.eta_star = sample_eta_spectral(c.prior, seed, 1);
  c.data = data_for(FieldSource::from_coeffs(qstar), FieldSource::from_coeffs(c.eta_star), c.setup);
  StrategyInput in = sisdp_input(c, trunc, q_modes);
  in.known_eta = FieldSource::from_coeffs(c.eta_star);
  c.qhat = known_eta_baseline(in).report.q;
  return c;
}

// alpha0 from the halving heuristic on 10 trial backgrounds from the same prior.
AlphaSchedule tuned_alpha(const SisdpCase& c, const StrategyInput& base) {
  std::vector<FieldSource> etas;
  std::vector<MeasurementSet> sets;
  for (int i = 1; i <= 10; ++i) {
    etas.push_back(FieldSource::from_coeffs(sample_eta_spectral(c.prior, c.seed + 1, i)));
    sets.push_back(data_for(FieldSource::from_coeffs(c.qstar), etas.back(), c.setup));
  }
  return find_alpha(1.0, etas, sets, base);
}

std::vector<double> scaled(std::vector<double> v, double f) {
  for (double& x : v) x *= f;
  return v;
}

Outcome c7_separated_priors() {
  PriorSpec prior;
  prior.M_eta = 14;
  prior.band_min = 10;
  const auto diag = TruncationRule::diagonal();
  const SisdpCase c = sisdp_case(banded_bumps(6), prior, 1.0, 707, diag, 1);
  StrategyInput in = sisdp_input(c, diag, 1);
  const double e_rla = relative_error(run_rla(in).report.q, c.qhat);
  in.prior_step.prior_eta = c.prior;
  const AlphaSchedule a0 = tuned_alpha(c, in);
  in.prior_step.alpha_schedule = a0.alpha;
  const double e = relative_error(sisdp(in).report.q, c.qhat);
  return {e <= 0.3 && e_rla >= 1.5 * e, "alpha0(k_max)=" + fmt("%.2e", a0.alpha.back()) + " E_SISDP=" + fmt("%.4f", e) +
                                            " E_RLA=" + fmt("%.4f", e_rla) + " ratio=" + fmt("%.1f", e_rla / e)};
}

Outcome c8_same_prior_control() {
  bool ok = true;
  std::string d;
  {
    // q and eta share the whole spectrum: q truncated with beta = 0, eta with
    // the isotropic prior over all modes.
    PriorSpec prior;
    prior.M_eta = 14;
    const auto diag = TruncationRule::diagonal();
    const SisdpCase c = sisdp_case(analyze(make_bumps(square_grid(257)), 14), prior, 1.0, 808, diag, 1);
    StrategyInput in = sisdp_input(c, diag, 1);
    in.prior_step.prior_eta = c.prior;
    const AlphaSchedule a0 = tuned_alpha(c, in);
    d += "shared support:";
    for (double f : {1.0, 10.0, 100.0}) {
      in.prior_step.alpha_schedule = scaled(a0.alpha, f);
      const double e = relative_error(sisdp(in).report.q, c.qhat);
      ok = ok && e >= 0.5;
      d += " " + fmt("%.3f", e);
    }
  }
  {
    // The same Gaussian prior on both unknowns, beta tied to alpha.
    PriorSpec prior;
    prior.M_eta = 6;
    const auto box = TruncationRule::max_mode_rule(6);
    const SisdpCase c = sisdp_case(banded_bumps(6).resized(6), prior, 1.0, 809, box, 6);
    StrategyInput in = sisdp_input(c, box, 6);
    in.prior_step.prior_eta = c.prior;
    in.prior_step.prior_q = c.prior;
    const AlphaSchedule a0 = tuned_alpha(c, in);
    d += "; identical Gaussian priors:";
    for (double f : {1.0, 10.0, 100.0}) {
      in.prior_step.alpha_schedule = scaled(a0.alpha, f);
      in.prior_step.beta = f * a0.alpha.back();
      const double e = relative_error(sisdp(in).report.q, c.qhat);
      ok = ok && e >= 0.5;
      d += " " + fmt("%.3f", e);
    }
  }
  return {ok, "E at alpha0, 10 alpha0, 100 alpha0, " + d};
}

Outcome c9_tuning_control_flow() {
  auto schedule = [](std::vector<std::vector<double>> script, int Q) {
    std::vector<SampleTuning> t;
    for (int s = 0; s < 10; ++s) {
      ScriptedTrials r(script);
      t.push_back(tune_sample(1.0, Q, r));
    }
    return average_schedules(t);
  };
  const AlphaSchedule three = schedule({{1.0, 0.8, 0.6, 0.5, 0.9}}, 1);
  const AlphaSchedule worse = schedule({{1.0, 1.2}}, 1);
  std::vector<double> falling(40);
  for (int i = 0; i < 40; ++i) falling[i] = 1.0 - 0.01 * i;
  const AlphaSchedule capped = schedule({falling, falling}, 2);
  int max_halvings = 0;
  for (const auto& h : capped.halvings) max_halvings = std::max(max_halvings, h[0] + h[1]);
  const bool ok = three.alpha[0] == 1.0 / 8 && worse.alpha[0] == 1.0 && max_halvings <= 10 &&
                  capped.alpha[1] == std::ldexp(1.0, -10);
  return {ok, "3-improvement alpha=" + fmt("%g", three.alpha[0]) + ", immediate-worse alpha=" + fmt("%g", worse.alpha[0]) +
                  ", halvings under a never-worsening script=" + std::to_string(max_halvings)};
}

Outcome c10_reproducibility() {
  const fs::path root = fs::temp_directory_path() / "sb_acceptance_repro";
  fs::remove_all(root);
  nlohmann::json cfg = nlohmann::json::parse(R"({
    "seed": 1010,
    "setup": {"k_min": 1.0, "dk": 0.5, "Q": 3, "n_theta": 8, "n_p": 32},
    "medium": {"kind": "laplacian", "n_omega": 32, "delta": 1.0},
    "strategy": {"name": "mimdnp", "n_samples": 3}
  })");
  auto run = [&](const std::string& tag, int threads) {
    cfg["output"] = (root / tag).string();
    const ExperimentConfig c = parse_config(cfg);
    omp_set_num_threads(threads);
    cmd_generate(c);
    cmd_invert(c, {});
    ExperimentConfig m = c;
    m.strategy = "misdnp";
    m.raw["strategy"]["name"] = "misdnp";
    cmd_invert(m, {(root / tag / "data_s1.mst").string()});
  };
  const int saved = omp_get_max_threads();
  run("a", saved);
  run("b", 1);
  omp_set_num_threads(saved);
  int compared = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    const std::string ext = e.path().extension().string();
    if (ext != ".mst" && ext != ".spc" && ext != ".csv") continue;
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p, std::ios::binary);
      std::stringstream s;
      s << f.rdbuf();
      return s.str();
    };
    ++compared;
    if (slurp(e.path()) != slurp(root / "b" / e.path().filename())) ++differ;
  }
  return {compared >= 7 && differ == 0,
          std::to_string(compared) + " MST1/SPC1/CSV artifacts compared, " + std::to_string(differ) + " differ"};
}

Outcome c11_spectral_suite() {
  double orth = 0, round = 0;
  bool laws = true;
  std::vector<double> x, w;
  oracle::gauss_legendre(64, -kHalfPi, kHalfPi, x, w);
  for (int M = 1; M <= 12; ++M) {
    // Orthogonality of the basis under exact quadrature, and of analyze() on single modes.
    for (int a = 1; a <= M; ++a)
      for (int b = 1; b <= M; ++b) {
        double g = 0;
        for (int i = 0; i < 64; ++i) g += w[i] * std::sin(a * (x[i] + kHalfPi)) * std::sin(b * (x[i] + kHalfPi));
        orth = std::max(orth, std::abs(g - (a == b ? kHalfPi : 0.0)));
      }
    for (int a = 1; a <= M; ++a) {
      SpectralCoeffs e(M);
      e(a, M + 1 - a) = 1.0;
      const SpectralCoeffs r = analyze(synthesize(e, square_grid(analysis_nodes(M))), M);
      for (std::size_t i = 0; i < r.data().size(); ++i) orth = std::max(orth, std::abs(r.data()[i] - e.data()[i]));
    }
    CounterRng rng(1111, M);
    SpectralCoeffs c(M), c2(M);
    for (double& v : c.data()) v = rng.normal();
    for (double& v : c2.data()) v = rng.normal();
    for (int n : {analysis_nodes(M), analysis_nodes(M) + 7, 129}) {
      const SpectralCoeffs r = analyze(synthesize(c, square_grid(n)), M);
      round = std::max(round, (r - c).norm() / c.norm());
    }
    for (const auto& rule : {TruncationRule::diagonal(), TruncationRule::max_mode_rule((M + 1) / 2)})
      for (double k : {0.5, 1.0, 2.5, 4.0, 6.0}) {
        const SpectralCoeffs t = truncate(c, rule, k);
        laws = laws && truncate(t, rule, k).data() == t.data();
        laws = laws && (truncate(c + c2, rule, k) - (t + truncate(c2, rule, k))).norm() <= 1e-14 * (c.norm() + c2.norm());
        laws = laws && truncate(truncate(c, rule, k + 1.0), rule, k).data() == t.data();
        double dot = 0;
        const SpectralCoeffs rest = c - t;
        for (std::size_t i = 0; i < t.data().size(); ++i) dot += t.data()[i] * rest.data()[i];
        laws = laws && dot == 0.0;
        laws = laws && retained_modes(M, rule, k).size() ==
                           static_cast<std::size_t>(std::count_if(t.data().begin(), t.data().end(),
                                                                  [](double v) { return v != 0.0; }));
      }
  }
  return {orth <= 1e-8 && round <= 1e-10 && laws,
          "orthogonality " + fmt("%.1e", orth) + ", round trip " + fmt("%.1e", round) +
              ", projector laws " + (laws ? "hold" : "violated")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "forward oracle (disk series)", 30, c1_forward_oracle},
      {2, "Frechet derivative vs finite differences", 60, c2_derivative},
      {3, "stacked vs averaged GN iterates", 60, c3_stacked_vs_averaged},
      {4, "SIMDNP approaches clean RLA (Born regime)", 900, c4_simdnp_born_regime},
      {5, "SISDNP/MISDNP surrogate (Born model)", 600, c5_sdnp_surrogate},
      {6, "MIMDNP error falls with N_s", 1800, c6_mimdnp_trend},
      {7, "SISDP with separated priors", 1800, c7_separated_priors},
      {8, "SISDP same-prior negative control", 1800, c8_same_prior_control},
      {9, "alpha search control flow", 5, c9_tuning_control_flow},
      {10, "generate + invert reproducibility", 300, c10_reproducibility},
      {11, "spectral basis suite", 10, c11_spectral_suite},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_s;
    if (!pass) ++failed;
    std::printf("[%s] C%-2d %s: %s (%.1f s of %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
