#include <doctest.h>

#include <cmath>

#include "scatterbench/errors.hpp"
#include "scatterbench/gn.hpp"
#include "scatterbench/media.hpp"
#include "scatterbench/strategies.hpp"

using namespace sb;

namespace {

MeasurementSetup setup(int Q, double k_min = 1.0, int n_theta = 6, int n_p = 24) {
  MeasurementSetup s;
  s.k_min = k_min;
  s.dk = 0.5;
  s.Q = Q;
  s.n_theta = n_theta;
  s.ring = ReceiverRing{n_p, 3.0};
  return s;
}

// Data and inversion share one grid so the Born model is reproduced exactly.
InversionContext born_ctx(const MeasurementSetup& s) {
  InversionContext ctx;
  ctx.setup = s;
  ctx.profile = {8.0, 41};
  ctx.solver.model = ForwardModel::Born;
  return ctx;
}

SpectralCoeffs coeffs(int M, std::initializer_list<std::tuple<int, int, double>> vals) {
  SpectralCoeffs c(M);
  for (auto [a, b, v] : vals) c(a, b) = v;
  return c;
}

}  // namespace

TEST_CASE("one GN step recovers a Born scatterer inside the retained modes") {
  const MeasurementSetup s = setup(1, 1.5);
  const InversionContext ctx = born_ctx(s);
  const SpectralCoeffs truth = coeffs(2, {{1, 1, 0.02}, {1, 2, -0.01}, {2, 1, 0.005}});
  const MeasurementSet d = forward_F(FieldSource::from_coeffs(truth), s, ctx.profile, ctx.solver);
  GNConfig cfg;
  cfg.eps_res = 1e-9;
  const GNResult r = gn_single_freq({slice_frequency(d, 1)}, 1.5, SpectralCoeffs(2), std::nullopt,
                                    TruncationRule::diagonal(), {}, cfg, ctx);
  CHECK(r.history.n_unknowns == 3);
  CHECK(r.history.iters == 1);
  CHECK(r.history.stop == StopReason::Residual);
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b) CHECK(std::abs(r.q(a, b) - truth(a, b)) < 1e-10);
  CHECK(r.q(2, 2) == 0.0);
}

TEST_CASE("stop criteria are recorded") {
  const MeasurementSetup s = setup(1);
  InversionContext ctx;
  ctx.setup = s;
  const MeasurementSet d = generate_data(FieldSource::from_function(bumps_value, 0.16), FieldSource::zero(), s);
  const auto dk = std::vector<std::vector<cplx>>{slice_frequency(d, 1)};
  const auto trunc = TruncationRule::max_mode_rule(2);

  GNConfig cfg;
  cfg.max_iters = 1;
  cfg.eps_res = 0;
  cfg.eps_step = 0;
  auto r = gn_single_freq(dk, 1.0, SpectralCoeffs(2), std::nullopt, trunc, {}, cfg, ctx);
  CHECK(r.history.stop == StopReason::MaxIters);
  CHECK(r.history.iters == 1);
  CHECK(r.history.residuals.size() == 2);

  cfg.max_iters = 20;
  cfg.eps_res = 2.0;  // the zero start already has relative misfit 1
  r = gn_single_freq(dk, 1.0, SpectralCoeffs(2), std::nullopt, trunc, {}, cfg, ctx);
  CHECK(r.history.stop == StopReason::Residual);
  CHECK(r.history.iters == 0);

  cfg.eps_res = 0;
  cfg.eps_step = 1e-3;
  r = gn_single_freq(dk, 1.0, SpectralCoeffs(2), std::nullopt, trunc, {}, cfg, ctx);
  CHECK((r.history.stop == StopReason::Step || r.history.stop == StopReason::ResidualIncrease));
  for (std::size_t i = 1; i < r.history.objectives.size(); ++i)
    CHECK(r.history.objectives[i] <= r.history.objectives[i - 1]);
  CHECK(stop_reason_name(StopReason::ResidualIncrease) == std::string("residual_increase"));
}

TEST_CASE("underdetermined truncation-only steps are rank deficient") {
  const MeasurementSetup s = setup(1, 1.0, 1, 2);
  const InversionContext ctx = born_ctx(s);
  const MeasurementSet d = forward_F(FieldSource::from_coeffs(coeffs(1, {{1, 1, 0.01}})), s, ctx.profile, ctx.solver);
  try {
    gn_single_freq({slice_frequency(d, 1)}, 1.0, SpectralCoeffs(3), std::nullopt, TruncationRule::max_mode_rule(3), {},
                   {}, ctx);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("prior-augmented step validation and a stiff eta prior") {
  RegularizedStepSpec step{StepMode::PriorAugmented};
  step.alpha = 1.0;
  CHECK_THROWS_AS(step.validate(), Error);
  step.prior_eta = PriorSpec{};
  step.prior_eta->M_eta = 3;
  CHECK_NOTHROW(step.validate());
  step.beta = 1.0;
  CHECK_THROWS_AS(step.validate(), Error);
  step.beta = 0.0;

  // A huge alpha pins eta at zero and leaves the truncation-only q step.
  const MeasurementSetup s = setup(1, 1.5);
  const InversionContext ctx = born_ctx(s);
  const SpectralCoeffs truth = coeffs(2, {{1, 1, 0.02}, {2, 1, 0.01}});
  const MeasurementSet d = forward_F(FieldSource::from_coeffs(truth), s, ctx.profile, ctx.solver);
  step.alpha = 1e12;
  GNConfig cfg;
  cfg.max_iters = 1;
  const GNResult r = gn_single_freq({slice_frequency(d, 1)}, 1.5, SpectralCoeffs(2), std::nullopt,
                                    TruncationRule::diagonal(), step, cfg, ctx);
  REQUIRE(r.eta.has_value());
  CHECK(r.eta->M() == 3);
  CHECK(r.eta->norm() < 1e-8);
  CHECK(std::abs(r.q(1, 1) - 0.02) < 1e-6);
  CHECK(r.history.n_unknowns == 3 + 9);
}

TEST_CASE("stacked data and averaged data give the same GN iterates") {
  const MeasurementSetup s = setup(1, 1.0);
  InversionContext ctx;
  ctx.setup = s;
  std::vector<MeasurementSet> sets;
  LaplacianMediumSpec lap{16, 200.0, 0.05};
  for (int i = 0; i < 3; ++i)
    sets.push_back(generate_data(FieldSource::from_function(bumps_value, 0.16),
                                 FieldSource::from_grid(sample_eta_laplacian(lap, 5, i)), s));
  GNConfig cfg;
  cfg.max_iters = 3;
  cfg.eps_res = 0;
  cfg.eps_step = 0;
  cfg.reject_worse = false;
  cfg.keep_iterates = true;
  const auto trunc = TruncationRule::max_mode_rule(3);
  const auto stacked = rla_stacked(sets, SpectralCoeffs(3), {}, cfg, trunc, ctx);
  const auto avg = rla(average_data(sets), SpectralCoeffs(3), {}, cfg, trunc, ctx);
  REQUIRE(stacked.freqs[0].iterates.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const auto& a = stacked.freqs[0].iterates[i];
    const auto& b = avg.freqs[0].iterates[i];
    CHECK((a - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("RLA error on clean data decreases with frequency") {
  const MeasurementSetup s = setup(4, 1.0, 8, 32);
  InversionContext ctx;
  ctx.setup = s;
  const MeasurementSet d = generate_data(FieldSource::from_function(bumps_value, 0.16), FieldSource::zero(), s);
  const InversionReport r = rla(d, SpectralCoeffs(1), {}, {}, TruncationRule::diagonal(), ctx);
  REQUIRE(r.freqs.size() == 4);
  const GridField truth = make_bumps(square_grid(129));
  std::vector<double> err;
  for (const auto& h : r.freqs) err.push_back(relative_error(h.q, truth));
  for (std::size_t j = 1; j < err.size(); ++j) CHECK(err[j] < err[j - 1]);
  CHECK(r.q.M() == rla_mode_count(SpectralCoeffs(1), TruncationRule::diagonal(), 2.5));
  CHECK(r.freqs.back().n_unknowns == 10);
}

TEST_CASE("rla checks schedules and setups") {
  const MeasurementSetup s = setup(2);
  InversionContext ctx;
  ctx.setup = s;
  const MeasurementSet d(s);
  RegularizedStepSpec step{StepMode::PriorAugmented};
  step.alpha_schedule = {1.0};
  step.prior_eta = PriorSpec{};
  CHECK_THROWS_AS(rla(d, SpectralCoeffs(1), step, {}, TruncationRule::diagonal(), ctx), Error);
  MeasurementSetup other = s;
  other.n_theta = 3;
  CHECK_THROWS_AS(rla_stacked({d, MeasurementSet(other)}, SpectralCoeffs(1), {}, {}, TruncationRule::diagonal(), ctx),
                  Error);
  CHECK(rla_mode_count(SpectralCoeffs(5), TruncationRule::diagonal(), 1.0) == 5);
  CHECK(rla_mode_count(SpectralCoeffs(1), TruncationRule::max_mode_rule(4), 1.0) == 4);
}

TEST_CASE("a failing frequency surfaces the completed ones") {
  const MeasurementSetup s = setup(3, 1.0);
  InversionContext ctx;
  ctx.setup = s;
  ctx.solver.max_iters = 2;
  ctx.solver.restart = 2;
  ctx.solver.tol = 1e-15;
  ctx.contrast_hint = 0.0;
  MeasurementSet d(s);
  for (auto& v : d.data) v = cplx(1, 0);
  try {
    rla(d, SpectralCoeffs(1), {}, {}, TruncationRule::diagonal(), ctx);
    FAIL("expected InversionError");
  } catch (const InversionError& e) {
    CHECK((e.kind() == ErrorKind::NonConvergence || e.kind() == ErrorKind::ResolutionTooCoarse));
    CHECK(e.partial().freqs.size() < 3);
  }
}
