#include "scatterbench/strategies.hpp"

#include <algorithm>
#include <exception>

namespace sb {

namespace {

void require_count(const StrategyInput& in, std::size_t n, const char* who) {
  if (in.datasets.size() != n)
    fail(ErrorKind::ConfigError, std::string(who) + " needs exactly " + std::to_string(n) + " dataset(s)");
}

InversionReport one_run(const MeasurementSet& d, const StrategyInput& in, const FieldSource& background,
                        const RegularizedStepSpec& step) {
  InversionContext ctx = in.ctx;
  ctx.background = background;
  return rla(d, in.q0, step, in.cfg, in.trunc, ctx);
}

const RegularizedStepSpec kTruncationOnly{};

// Runs body(s) for every sample, ordered reduction left to the caller.
template <class F>
std::vector<InversionReport> fan_out(int n, F&& body) {
  std::vector<InversionReport> out(n);
  std::exception_ptr err;
  int failed = -1;
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < n; ++s) {
    try {
      out[s] = body(s);
    } catch (...) {
#pragma omp critical(sb_strategy_error)
      if (!err || s < failed) {
        err = std::current_exception();
        failed = s;
      }
    }
  }
  if (err) {
    try {
      std::rethrow_exception(err);
    } catch (const InversionError& e) {
      throw InversionError(e.with_context("sample " + std::to_string(failed + 1)), e.partial());
    } catch (const Error& e) {
      throw e.with_context("sample " + std::to_string(failed + 1));
    }
  }
  return out;
}

// Mean of member q components (and eta when present) minus the projected mean
// field, per frequency and at the end. Deterministic in member order.
StrategyResult aggregate(std::vector<InversionReport> members, const FieldSource* mean_eta) {
  StrategyResult res;
  const auto& first = members.front();
  const double inv = 1.0 / static_cast<double>(members.size());
  const SpectralCoeffs shift = mean_eta ? project_mean(*mean_eta, first.q.M()) : SpectralCoeffs(first.q.M());
  auto mean_of = [&](auto get) {
    SpectralCoeffs acc(get(first).M());
    for (const auto& m : members) acc = acc + get(m);
    return inv * acc;
  };
  res.report.q = mean_of([](const InversionReport& r) -> const SpectralCoeffs& { return r.q; }) - shift;
  if (first.eta) res.report.eta = mean_of([](const InversionReport& r) -> const SpectralCoeffs& { return *r.eta; });
  for (std::size_t j = 0; j < first.freqs.size(); ++j) {
    FrequencyHistory h;
    h.k = first.freqs[j].k;
    h.n_unknowns = first.freqs[j].n_unknowns;
    h.grid_n = first.freqs[j].grid_n;
    h.stop = first.freqs[j].stop;
    double r0 = 0, r1 = 0;
    for (const auto& m : members) {
      h.iters += m.freqs[j].iters;
      r0 += m.freqs[j].residuals.front();
      r1 += m.freqs[j].residuals.back();
    }
    h.residuals = {r0 * inv, r1 * inv};
    h.q = mean_of([j](const InversionReport& r) -> const SpectralCoeffs& { return r.freqs[j].q; }) - shift;
    if (first.freqs[j].eta)
      h.eta = mean_of([j](const InversionReport& r) -> const SpectralCoeffs& { return *r.freqs[j].eta; });
    res.report.freqs.push_back(std::move(h));
  }
  for (const auto& m : members) res.report.wall_time_s += m.wall_time_s;
  res.members = std::move(members);
  return res;
}

StrategyResult single(InversionReport r, const FieldSource* mean_eta) {
  std::vector<InversionReport> v;
  v.push_back(std::move(r));
  return aggregate(std::move(v), mean_eta);
}

}  // namespace

SpectralCoeffs project_mean(const FieldSource& mean, int M) {
  const GridGeometry g = square_grid(std::max(analysis_nodes(M), 129));
  return analyze(mean.on(g), M);
}

StrategyResult run_rla(const StrategyInput& in) {
  require_count(in, 1, "rla");
  return single(one_run(in.datasets[0], in, FieldSource::zero(), kTruncationOnly), nullptr);
}

StrategyResult sisdnp(const StrategyInput& in) {
  require_count(in, 1, "sisdnp");
  return single(one_run(in.datasets[0], in, FieldSource::zero(), kTruncationOnly), &in.mean_eta);
}

StrategyResult misdnp(const StrategyInput& in) {
  require_count(in, 1, "misdnp");
  if (in.eta_samples.empty()) fail(ErrorKind::ConfigError, "misdnp needs at least one eta sample");
  auto members = fan_out(static_cast<int>(in.eta_samples.size()), [&](int s) {
    return one_run(in.datasets[0], in, in.eta_samples[s], kTruncationOnly);
  });
  return aggregate(std::move(members), &in.mean_eta);
}

StrategyResult mimdnp(const StrategyInput& in) {
  if (in.datasets.empty()) fail(ErrorKind::ConfigError, "mimdnp needs at least one dataset");
  auto members = fan_out(static_cast<int>(in.datasets.size()), [&](int s) {
    return one_run(in.datasets[s], in, FieldSource::zero(), kTruncationOnly);
  });
  return aggregate(std::move(members), &in.mean_eta);
}

StrategyResult simdnp(const StrategyInput& in) {
  if (in.datasets.empty()) fail(ErrorKind::ConfigError, "simdnp needs at least one dataset");
  MeasurementSet dbar = average_data(in.datasets);
  if (in.simdnp_variant == SimdnpVariant::Intro)
    return single(one_run(dbar, in, FieldSource::zero(), kTruncationOnly), &in.mean_eta);
  if (in.mean_eta.max_abs > 0) {
    SolverOptions opt = in.ctx.solver;
    dbar = dbar - forward_F(in.mean_eta, dbar.setup, in.ctx.profile, opt);
  }
  return single(one_run(dbar, in, FieldSource::zero(), kTruncationOnly), nullptr);
}

StrategyResult sisdp(const StrategyInput& in) {
  require_count(in, 1, "sisdp");
  return single(one_run(in.datasets[0], in, FieldSource::zero(), in.prior_step), nullptr);
}

StrategyResult mimdp(const StrategyInput& in) {
  if (in.datasets.empty()) fail(ErrorKind::ConfigError, "mimdp needs at least one dataset");
  auto members = fan_out(static_cast<int>(in.datasets.size()), [&](int s) {
    return one_run(in.datasets[s], in, FieldSource::zero(), in.prior_step);
  });
  return aggregate(std::move(members), &in.mean_eta);
}

StrategyResult known_eta_baseline(const StrategyInput& in) {
  require_count(in, 1, "known_eta");
  return single(one_run(in.datasets[0], in, in.known_eta, kTruncationOnly), nullptr);
}

bool is_strategy(const std::string& name) {
  static const char* names[] = {"rla", "sisdnp", "misdnp", "mimdnp", "simdnp", "sisdp", "mimdp", "known_eta"};
  return std::find_if(std::begin(names), std::end(names), [&](const char* n) { return name == n; }) != std::end(names);
}

bool strategy_uses_multiple_datasets(const std::string& name) {
  return name == "mimdnp" || name == "simdnp" || name == "mimdp";
}

StrategyResult run_strategy(const std::string& name, const StrategyInput& in) {
  if (name == "rla") return run_rla(in);
  if (name == "sisdnp") return sisdnp(in);
  if (name == "misdnp") return misdnp(in);
  if (name == "mimdnp") return mimdnp(in);
  if (name == "simdnp") return simdnp(in);
  if (name == "sisdp") return sisdp(in);
  if (name == "mimdp") return mimdp(in);
  if (name == "known_eta") return known_eta_baseline(in);
  fail(ErrorKind::ConfigError, "unknown strategy '" + name + "'");
}

double relative_error(const GridField& rec, const GridField& truth) {
  if (!(rec.geom == truth.geom)) fail(ErrorKind::ConfigError, "ShapeMismatch: fields on different grids");
  return relative_l2(rec, truth);
}

double relative_error(const SpectralCoeffs& rec, const GridField& truth) {
  return relative_l2(synthesize(rec, truth.geom), truth);
}

double relative_error(const SpectralCoeffs& rec, const SpectralCoeffs& truth, int n) {
  const GridGeometry g = square_grid(n);
  return relative_l2(synthesize(rec, g), synthesize(truth, g));
}

}  // namespace sb
