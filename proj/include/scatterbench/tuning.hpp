#pragma once

#include <vector>

#include "scatterbench/strategies.hpp"

namespace sb {

struct AlphaSchedule {
  std::vector<double> alpha;                    // mean over samples, per frequency
  std::vector<std::vector<double>> per_sample;  // provenance
  std::vector<int> solves_per_sample;
  std::vector<std::vector<int>> halvings;       // [sample][frequency]
};

// One regularized GN trial per call. begin_frequency(j) is called before the
// first trial at k_j; implementations warm-start from the best trial at k_{j-1}.
class TrialRunner {
 public:
  virtual ~TrialRunner() = default;
  virtual void begin_frequency(int /*j*/) {}
  virtual double trial(int j, double alpha) = 0;
};

struct TuningLimits {
  int max_halvings = 10;  // per sample, so alpha stays in {alpha0 / 2^t : t <= 10}
};

struct SampleTuning {
  std::vector<double> alpha;  // alpha(k_j)
  std::vector<int> halvings;  // halvings performed at each k_j
  int solves = 0;
};

// Halve alpha while the trial error improves; on the first worsening revert to
// the last improving value and carry it to the next frequency.
SampleTuning tune_sample(double alpha0, int Q, TrialRunner& runner, const TuningLimits& lim = {});

// Errors scripted per frequency: errors[j-1][t] is returned for the t-th trial
// at k_j; past the end of the list every trial reports a worse error.
class ScriptedTrials : public TrialRunner {
 public:
  explicit ScriptedTrials(std::vector<std::vector<double>> errors) : errors_(std::move(errors)) {}
  void begin_frequency(int j) override;
  double trial(int j, double alpha) override;

 private:
  std::vector<std::vector<double>> errors_;
  std::size_t next_ = 0;
  double last_ = 0;
};

AlphaSchedule average_schedules(const std::vector<SampleTuning>& samples);

enum class TuneTarget { Alpha, Beta };

// Real tuning: trial_etas[s] is the true background behind data_sets[s];
// base carries ctx, trunc, cfg and the prior-augmented step template.
AlphaSchedule find_alpha(double alpha0, const std::vector<FieldSource>& trial_etas,
                         const std::vector<MeasurementSet>& data_sets, const StrategyInput& base,
                         TuneTarget target = TuneTarget::Alpha, const TuningLimits& lim = {});

}  // namespace sb
