#pragma once

#include <string>
#include <vector>

#include "scatterbench/gn.hpp"

namespace sb {

enum class SimdnpVariant {
  Algorithm,  // mean(d_s) - F(E(eta)), no trailing subtraction
  Intro,      // mean(d_s), then subtract E(eta) from the result
};

struct StrategyInput {
  std::vector<MeasurementSet> datasets;
  std::vector<FieldSource> eta_samples;  // backgrounds for misdnp
  FieldSource mean_eta = FieldSource::zero();
  FieldSource known_eta = FieldSource::zero();  // true eta* for the baseline
  RegularizedStepSpec prior_step{StepMode::PriorAugmented, 0.0, 0.0, std::nullopt, std::nullopt, {}};
  GNConfig cfg;
  TruncationRule trunc = TruncationRule::diagonal();
  SpectralCoeffs q0 = SpectralCoeffs(1);
  InversionContext ctx;
  SimdnpVariant simdnp_variant = SimdnpVariant::Algorithm;
};

struct StrategyResult {
  // Aggregate reconstruction. freqs[j].q holds the aggregate after k_j; its
  // residuals are the member means at the warm start and at the end.
  InversionReport report;
  std::vector<InversionReport> members;
};

StrategyResult run_rla(const StrategyInput& in);  // plain RLA on datasets[0]
StrategyResult sisdnp(const StrategyInput& in);
StrategyResult misdnp(const StrategyInput& in);
StrategyResult mimdnp(const StrategyInput& in);
StrategyResult simdnp(const StrategyInput& in);
StrategyResult sisdp(const StrategyInput& in);
StrategyResult mimdp(const StrategyInput& in);
StrategyResult known_eta_baseline(const StrategyInput& in);

// Dispatch by name: rla, sisdnp, misdnp, mimdnp, simdnp, sisdp, mimdp, known_eta.
StrategyResult run_strategy(const std::string& name, const StrategyInput& in);
bool is_strategy(const std::string& name);
// Whether the strategy consumes one dataset per sample.
bool strategy_uses_multiple_datasets(const std::string& name);

// analyze() of a mean field on a grid fine enough for M modes.
SpectralCoeffs project_mean(const FieldSource& mean, int M);

// Relative discrete L2 error on a common grid.
double relative_error(const GridField& rec, const GridField& truth);
double relative_error(const SpectralCoeffs& rec, const GridField& truth);
double relative_error(const SpectralCoeffs& rec, const SpectralCoeffs& truth, int n = 129);

}  // namespace sb
