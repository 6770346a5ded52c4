#include "scatterbench/gn.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>

namespace sb {

void RegularizedStepSpec::validate() const {
  if (alpha < 0 || beta < 0) fail(ErrorKind::ConfigError, "regularization weights must be nonnegative");
  if (mode == StepMode::PriorAugmented) {
    if (alpha > 0 && !prior_eta) fail(ErrorKind::ConfigError, "MissingPrior: alpha > 0 needs prior_eta");
    if (beta > 0 && !prior_q) fail(ErrorKind::ConfigError, "MissingPrior: beta > 0 needs prior_q");
  }
  if (prior_eta) prior_eta->validate();
  if (prior_q) prior_q->validate();
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::MaxIters: return "max_iters";
    case StopReason::Residual: return "residual";
    case StopReason::Step: return "step";
    case StopReason::ResidualIncrease: return "residual_increase";
  }
  return "unknown";
}

int rla_mode_count(const SpectralCoeffs& q0, const TruncationRule& trunc, double k_max) {
  return std::clamp(std::max(q0.M(), modes_needed(trunc, k_max)), 1, kMaxModes);
}

namespace {

struct Unknowns {
  std::vector<Mode> q_modes, eta_modes, all_modes;  // all_modes = sorted union
  std::vector<int> q_col, eta_col;                  // column of each unknown in the union Jacobian
  int count() const { return static_cast<int>(q_modes.size() + eta_modes.size()); }
};

Unknowns make_unknowns(int Mq, const TruncationRule& trunc, double k, int Meta, bool joint) {
  Unknowns u;
  u.q_modes = retained_modes(Mq, trunc, k);
  if (joint) u.eta_modes = retained_modes(Meta, TruncationRule::max_mode_rule(Meta), k);
  std::set<Mode> all(u.q_modes.begin(), u.q_modes.end());
  all.insert(u.eta_modes.begin(), u.eta_modes.end());
  u.all_modes.assign(all.begin(), all.end());
  auto col = [&](const Mode& m) {
    return static_cast<int>(std::lower_bound(u.all_modes.begin(), u.all_modes.end(), m) - u.all_modes.begin());
  };
  for (const auto& m : u.q_modes) u.q_col.push_back(col(m));
  for (const auto& m : u.eta_modes) u.eta_col.push_back(col(m));
  return u;
}

struct Misfit {
  double rel = 0;        // relative data residual
  double objective = 0;  // 1/2 ||r||^2 + penalties
};

double penalty(const SpectralCoeffs& c, const std::vector<Mode>& modes, double w, const std::optional<PriorSpec>& p) {
  if (w == 0 || !p) return 0;
  double s = 0;
  for (const auto& m : modes) s += p->precision(m.first, m.second) * c(m.first, m.second) * c(m.first, m.second);
  return 0.5 * w * s;
}

}  // namespace

GNResult gn_single_freq(const std::vector<std::vector<cplx>>& data_k, double k, const SpectralCoeffs& q_init,
                        const std::optional<SpectralCoeffs>& eta_init, const TruncationRule& trunc,
                        const RegularizedStepSpec& step, const GNConfig& cfg, const InversionContext& ctx) {
  step.validate();
  if (data_k.empty()) fail(ErrorKind::ConfigError, "gn_single_freq needs at least one data vector");
  const bool joint = step.joint();
  SpectralCoeffs q = truncate(q_init, trunc, k);
  std::optional<SpectralCoeffs> eta;
  if (joint) eta = eta_init ? *eta_init : SpectralCoeffs(step.eta_modes(q.M()));
  const Unknowns U = make_unknowns(q.M(), trunc, k, joint ? eta->M() : 0, joint);

  const GridGeometry g = ctx.grid_for(k);
  const GridField bg = ctx.background.on(g);
  const auto waves = ctx.setup.waves(1);
  std::vector<IncidentWave> kw = waves;
  for (auto& w : kw) w.k = k;

  auto make_op = [&](const SpectralCoeffs& qc, const std::optional<SpectralCoeffs>& ec) {
    GridField f = synthesize(ec ? qc + *ec : qc, g);
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] += bg.v[i];
    return std::make_unique<FrequencyOperator>(f, k, kw, ctx.setup.ring, ctx.solver);
  };

  double dnorm2 = 0;
  for (const auto& d : data_k) {
    if (d.size() != ctx.setup.block_size()) fail(ErrorKind::ConfigError, "data block size does not match the setup");
    for (const auto& z : d) dnorm2 += std::norm(z);
  }
  auto misfit = [&](const FrequencyOperator& op, const SpectralCoeffs& qc, const std::optional<SpectralCoeffs>& ec) {
    double r2 = 0;
    for (const auto& d : data_k)
      for (std::size_t i = 0; i < d.size(); ++i) r2 += std::norm(d[i] - op.data()[i]);
    Misfit m;
    m.rel = dnorm2 > 0 ? std::sqrt(r2 / dnorm2) : std::sqrt(r2);
    m.objective = 0.5 * r2 + penalty(qc, U.q_modes, step.beta, step.prior_q);
    if (ec) m.objective += penalty(*ec, U.eta_modes, step.alpha, step.prior_eta);
    return m;
  };

  GNResult out;
  FrequencyHistory& h = out.history;
  h.k = k;
  h.n_unknowns = U.count();
  h.grid_n = g.nx;

  auto op = make_op(q, eta);
  Misfit cur = misfit(*op, q, eta);
  h.residuals.push_back(cur.rel);
  h.objectives.push_back(cur.objective);

  const int nd = static_cast<int>(ctx.setup.block_size());
  const int S = static_cast<int>(data_k.size());
  const int nq = static_cast<int>(U.q_modes.size()), ne = static_cast<int>(U.eta_modes.size());
  const bool eta_rows = joint && step.alpha > 0;
  const bool q_rows = joint && step.beta > 0;
  const int rows = 2 * nd * S + (eta_rows ? ne : 0) + (q_rows ? nq : 0);
  const int cols = nq + ne;

  while (true) {
    if (cur.rel < cfg.eps_res) {
      h.stop = StopReason::Residual;
      break;
    }
    if (h.iters >= cfg.max_iters) {
      h.stop = StopReason::MaxIters;
      break;
    }
    const Eigen::MatrixXcd J = op->jacobian(U.all_modes);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
    for (int s = 0; s < S; ++s) {
      const int r0 = 2 * nd * s;
      for (int i = 0; i < nd; ++i) {
        const cplx r = data_k[s][i] - op->data()[i];
        b(r0 + i) = r.real();
        b(r0 + nd + i) = r.imag();
        for (int c = 0; c < nq; ++c) {
          const cplx v = J(i, U.q_col[c]);
          A(r0 + i, c) = v.real();
          A(r0 + nd + i, c) = v.imag();
        }
        for (int c = 0; c < ne; ++c) {
          const cplx v = J(i, U.eta_col[c]);
          A(r0 + i, nq + c) = v.real();
          A(r0 + nd + i, nq + c) = v.imag();
        }
      }
    }
    int r = 2 * nd * S;
    if (eta_rows)
      for (int c = 0; c < ne; ++c, ++r) {
        const auto [m1, m2] = U.eta_modes[c];
        const double w = std::sqrt(step.alpha * step.prior_eta->precision(m1, m2));
        A(r, nq + c) = w;
        b(r) = -w * (*eta)(m1, m2);
      }
    if (q_rows)
      for (int c = 0; c < nq; ++c, ++r) {
        const auto [m1, m2] = U.q_modes[c];
        const double w = std::sqrt(step.beta * step.prior_q->precision(m1, m2));
        A(r, c) = w;
        b(r) = -w * q(m1, m2);
      }

    Eigen::VectorXd dx;
    if (joint) {
      // min-norm solution also covers the rank-deficient alpha = beta = 0 case
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
      dx = cod.solve(b);
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
      if (qr.rank() < cols)
        fail(ErrorKind::RankDeficient, "GN system has rank " + std::to_string(qr.rank()) + " < " +
                                           std::to_string(cols) + " at k=" + std::to_string(k));
      dx = qr.solve(b);
    }
    ++h.iters;
    const double step_norm = dx.norm() / cols;
    h.step_norms.push_back(step_norm);

    SpectralCoeffs q_new = q;
    for (int c = 0; c < nq; ++c) q_new(U.q_modes[c].first, U.q_modes[c].second) += dx(c);
    std::optional<SpectralCoeffs> eta_new = eta;
    if (joint)
      for (int c = 0; c < ne; ++c) (*eta_new)(U.eta_modes[c].first, U.eta_modes[c].second) += dx(nq + c);

    auto op_new = make_op(q_new, eta_new);
    const Misfit next = misfit(*op_new, q_new, eta_new);
    if (cfg.reject_worse && next.objective > cur.objective) {
      h.stop = StopReason::ResidualIncrease;
      break;
    }
    q = std::move(q_new);
    eta = std::move(eta_new);
    op = std::move(op_new);
    cur = next;
    h.residuals.push_back(cur.rel);
    h.objectives.push_back(cur.objective);
    if (cfg.keep_iterates) {
      h.iterates.push_back(q);
      if (eta) h.eta_iterates.push_back(*eta);
    }
    if (step_norm < cfg.eps_step) {
      h.stop = StopReason::Step;
      break;
    }
  }
  h.q = q;
  h.eta = eta;
  out.q = q;
  out.eta = eta;
  return out;
}

namespace {

InversionReport run_rla(const std::vector<MeasurementSet>& data, const SpectralCoeffs& q0,
                        const RegularizedStepSpec& step, const GNConfig& cfg, const TruncationRule& trunc,
                        const InversionContext& ctx_in) {
  const auto t0 = std::chrono::steady_clock::now();
  if (data.empty()) fail(ErrorKind::ConfigError, "rla needs data");
  const MeasurementSetup& setup = data.front().setup;
  for (const auto& d : data)
    if (!(d.setup == setup)) fail(ErrorKind::ConfigError, "SetupMismatch: stacked datasets differ in setup");
  setup.validate();
  if (!step.alpha_schedule.empty() && static_cast<int>(step.alpha_schedule.size()) != setup.Q)
    fail(ErrorKind::ConfigError, "alpha schedule length does not match the number of frequencies");
  InversionContext ctx = ctx_in;
  ctx.setup = setup;

  InversionReport rep;
  SpectralCoeffs q = q0.resized(rla_mode_count(q0, trunc, setup.k(setup.Q)));
  std::optional<SpectralCoeffs> eta;
  if (step.joint()) eta = SpectralCoeffs(step.eta_modes(q.M()));
  rep.q = q;
  rep.eta = eta;
  for (int j = 1; j <= setup.Q; ++j) {
    std::vector<std::vector<cplx>> dk;
    for (const auto& d : data) dk.push_back(slice_frequency(d, j));
    try {
      RegularizedStepSpec sj = step;
      if (!step.alpha_schedule.empty()) sj.alpha = step.alpha_schedule[j - 1];
      GNResult r = gn_single_freq(dk, setup.k(j), q, eta, trunc, sj, cfg, ctx);
      q = r.q;
      eta = r.eta;
      rep.q = q;
      rep.eta = eta;
      rep.freqs.push_back(std::move(r.history));
    } catch (const Error& e) {
      rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      throw InversionError(e, rep);
    }
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace

InversionReport rla(const MeasurementSet& data, const SpectralCoeffs& q0, const RegularizedStepSpec& step,
                    const GNConfig& cfg, const TruncationRule& trunc, const InversionContext& ctx) {
  return run_rla({data}, q0, step, cfg, trunc, ctx);
}

InversionReport rla_stacked(const std::vector<MeasurementSet>& data, const SpectralCoeffs& q0,
                            const RegularizedStepSpec& step, const GNConfig& cfg, const TruncationRule& trunc,
                            const InversionContext& ctx) {
  return run_rla(data, q0, step, cfg, trunc, ctx);
}

}  // namespace sb
