#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scatterbench/errors.hpp"
#include "scatterbench/measurement.hpp"
#include "scatterbench/media.hpp"

namespace sb {

struct GNConfig {
  int max_iters = 20;
  double eps_res = 1e-7;   // relative data misfit; 0 disables
  double eps_step = 1e-7;  // ||step|| / #unknowns; 0 disables
  bool reject_worse = true;  // refuse a step that raises the objective, then stop
  bool keep_iterates = false;
};

enum class StepMode { TruncationOnly, PriorAugmented };

struct RegularizedStepSpec {
  StepMode mode = StepMode::TruncationOnly;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<PriorSpec> prior_eta;
  std::optional<PriorSpec> prior_q;
  std::vector<double> alpha_schedule;  // per-frequency alpha for rla; overrides alpha when set

  bool joint() const { return mode == StepMode::PriorAugmented; }
  int eta_modes(int fallback) const { return prior_eta ? prior_eta->M_eta : fallback; }
  void validate() const;
};

enum class StopReason { MaxIters, Residual, Step, ResidualIncrease };
const char* stop_reason_name(StopReason r);

struct FrequencyHistory {
  double k = 0;
  int iters = 0;                    // GN steps computed, including a rejected one
  int n_unknowns = 0;
  std::vector<double> residuals;    // relative misfit at the warm start, then per accepted step
  std::vector<double> step_norms;   // ||step|| / #unknowns per computed step
  std::vector<double> objectives;   // penalised objective, aligned with residuals
  StopReason stop = StopReason::MaxIters;
  SpectralCoeffs q;                 // state after this frequency
  std::optional<SpectralCoeffs> eta;
  std::vector<SpectralCoeffs> iterates;  // q after each accepted step, if requested
  std::vector<SpectralCoeffs> eta_iterates;
  int grid_n = 0;
};

struct InversionReport {
  SpectralCoeffs q;
  std::optional<SpectralCoeffs> eta;
  std::vector<FrequencyHistory> freqs;
  double wall_time_s = 0;
  std::vector<std::uint64_t> seeds;
  std::string config_hash;
};

// Thrown when an inversion fails part-way; carries the frequencies completed.
class InversionError : public Error {
 public:
  InversionError(const Error& cause, InversionReport partial)
      : Error(cause), partial_(std::move(partial)) {}
  const InversionReport& partial() const { return partial_; }

 private:
  InversionReport partial_;
};

// How F is evaluated during inversion.
struct InversionContext {
  MeasurementSetup setup;
  ResolutionProfile profile{8.0, 0};
  SolverOptions solver{.min_ppw = 6.0};
  FieldSource background = FieldSource::zero();  // fixed field added inside F
  double contrast_hint = 0.3;                    // expected max|q + eta| for grid selection

  GridGeometry grid_for(double k) const { return profile.grid_for(k, background.max_abs + contrast_hint); }
};

struct GNResult {
  SpectralCoeffs q;
  std::optional<SpectralCoeffs> eta;
  FrequencyHistory history;
};

// One wavenumber. data_k holds one or more data vectors (flattened wave-major);
// several vectors are fitted jointly as a stacked least-squares problem.
GNResult gn_single_freq(const std::vector<std::vector<cplx>>& data_k, double k, const SpectralCoeffs& q_init,
                        const std::optional<SpectralCoeffs>& eta_init, const TruncationRule& trunc,
                        const RegularizedStepSpec& step, const GNConfig& cfg, const InversionContext& ctx);

// Recursive linearization over the setup's frequencies.
InversionReport rla(const MeasurementSet& data, const SpectralCoeffs& q0, const RegularizedStepSpec& step,
                    const GNConfig& cfg, const TruncationRule& trunc, const InversionContext& ctx);
InversionReport rla_stacked(const std::vector<MeasurementSet>& data, const SpectralCoeffs& q0,
                            const RegularizedStepSpec& step, const GNConfig& cfg, const TruncationRule& trunc,
                            const InversionContext& ctx);

// Coefficient array size an RLA run needs for q under `trunc` up to k_max.
int rla_mode_count(const SpectralCoeffs& q0, const TruncationRule& trunc, double k_max);

}  // namespace sb
