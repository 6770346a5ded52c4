#include "scatterbench/tuning.hpp"

#include <limits>

namespace sb {

SampleTuning tune_sample(double alpha0, int Q, TrialRunner& runner, const TuningLimits& lim) {
  SampleTuning out;
  double alpha = alpha0;
  int m = 0;
  for (int j = 1; j <= Q; ++j) {
    runner.begin_frequency(j);
    double prev = std::numeric_limits<double>::infinity();
    int halved = 0;
    while (m < lim.max_halvings) {
      const double e = runner.trial(j, alpha);
      ++out.solves;
      if (e > prev) {
        alpha *= 2;  // back to the last improving value
        --halved;
        break;
      }
      prev = e;
      alpha /= 2;
      ++m;
      ++halved;
    }
    out.alpha.push_back(alpha);
    out.halvings.push_back(halved);
  }
  return out;
}

void ScriptedTrials::begin_frequency(int) { next_ = 0; }

double ScriptedTrials::trial(int j, double) {
  const auto& list = errors_.at(static_cast<std::size_t>(j - 1));
  if (next_ < list.size()) last_ = list[next_];
  else last_ = last_ + 1.0;
  ++next_;
  return last_;
}

AlphaSchedule average_schedules(const std::vector<SampleTuning>& samples) {
  AlphaSchedule s;
  if (samples.empty()) return s;
  const std::size_t Q = samples.front().alpha.size();
  s.alpha.assign(Q, 0.0);
  for (const auto& t : samples) {
    for (std::size_t j = 0; j < Q; ++j) s.alpha[j] += t.alpha[j];
    s.per_sample.push_back(t.alpha);
    s.halvings.push_back(t.halvings);
    s.solves_per_sample.push_back(t.solves);
  }
  for (double& a : s.alpha) a /= static_cast<double>(samples.size());
  return s;
}

namespace {

class GnTrials : public TrialRunner {
 public:
  GnTrials(const MeasurementSet& data, std::vector<SpectralCoeffs> reference, const StrategyInput& base,
           TuneTarget target)
      : data_(data), ref_(std::move(reference)), base_(base), target_(target) {
    InversionContext ctx = base_.ctx;
    ctx.setup = data.setup;
    base_.ctx = ctx;
    q_ = base_.q0.resized(rla_mode_count(base_.q0, base_.trunc, data.setup.k(data.setup.Q)));
    eta_ = SpectralCoeffs(base_.prior_step.eta_modes(q_.M()));
  }

  void begin_frequency(int) override {
    if (has_best_) {
      q_ = best_q_;
      eta_ = best_eta_;
    }
    has_best_ = false;
    best_err_ = std::numeric_limits<double>::infinity();
  }

  double trial(int j, double value) override {
    RegularizedStepSpec step = base_.prior_step;
    step.mode = StepMode::PriorAugmented;
    (target_ == TuneTarget::Alpha ? step.alpha : step.beta) = value;
    const GNResult r = gn_single_freq({slice_frequency(data_, j)}, data_.setup.k(j), q_, eta_, base_.trunc, step,
                                      base_.cfg, base_.ctx);
    const double e = relative_error(r.q, ref_[static_cast<std::size_t>(j - 1)]);
    if (e <= best_err_) {
      best_err_ = e;
      best_q_ = r.q;
      best_eta_ = *r.eta;
      has_best_ = true;
    }
    return e;
  }

 private:
  const MeasurementSet& data_;
  std::vector<SpectralCoeffs> ref_;
  StrategyInput base_;
  TuneTarget target_;
  SpectralCoeffs q_, eta_, best_q_, best_eta_;
  double best_err_ = std::numeric_limits<double>::infinity();
  bool has_best_ = false;
};

}  // namespace

AlphaSchedule find_alpha(double alpha0, const std::vector<FieldSource>& trial_etas,
                         const std::vector<MeasurementSet>& data_sets, const StrategyInput& base, TuneTarget target,
                         const TuningLimits& lim) {
  if (trial_etas.size() != data_sets.size() || data_sets.empty())
    fail(ErrorKind::ConfigError, "find_alpha needs one trial background per dataset");
  if (!(alpha0 > 0)) fail(ErrorKind::ConfigError, "alpha0 must be positive");
  const int n = static_cast<int>(data_sets.size());
  std::vector<SampleTuning> tuned(n);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < n; ++s) {
    try {
      StrategyInput ref_in = base;
      ref_in.datasets = {data_sets[s]};
      ref_in.known_eta = trial_etas[s];
      const StrategyResult ref = known_eta_baseline(ref_in);
      std::vector<SpectralCoeffs> snapshots;
      for (const auto& h : ref.report.freqs) {
        if (h.q.norm() == 0) fail(ErrorKind::ConfigError, "DegenerateReference: known-background reconstruction is zero");
        snapshots.push_back(h.q);
      }
      GnTrials runner(data_sets[s], std::move(snapshots), base, target);
      tuned[s] = tune_sample(alpha0, data_sets[s].setup.Q, runner, lim);
    } catch (...) {
#pragma omp critical(sb_tuning_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return average_schedules(tuned);
}

}  // namespace sb
