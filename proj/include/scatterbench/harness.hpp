#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "scatterbench/strategies.hpp"
#include "scatterbench/tuning.hpp"

namespace sb {

// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitForward = 3, kExitInversion = 4 };

struct ExperimentConfig {
  nlohmann::json raw;  // effective config after CLI overrides; hashed canonically
  std::uint64_t seed = 1;

  std::string scatterer = "bumps";  // bumps | raster | none
  std::string raster_path;
  int scatterer_band = 0;  // keep only modes with m1 + m2 <= band; 0 keeps the field as is

  std::string medium = "none";  // none | laplacian | spectral
  LaplacianMediumSpec laplacian;
  PriorSpec spectral;

  MeasurementSetup setup;
  ResolutionProfile data_profile{10.0, 65};  // node floors keep low-k grids able to resolve the scatterer
  ResolutionProfile inversion_profile{8.0, 49};
  double inversion_min_ppw = 6.0;
  double contrast_hint = 0.3;
  ForwardModel model = ForwardModel::Full;

  std::string strategy = "rla";
  int n_samples = 1;
  TruncationRule trunc = TruncationRule::diagonal();
  int M = 1;
  RegularizedStepSpec prior_step{StepMode::PriorAugmented, 0.0, 0.0, std::nullopt, std::nullopt, {}};
  SimdnpVariant simdnp_variant = SimdnpVariant::Algorithm;
  std::string mean_eta_path;  // optional GRD1; zero otherwise

  GNConfig gn;

  double alpha0 = 1.0;
  int n_trials = 10;
  std::vector<std::vector<double>> scripted_errors;

  std::string sweep_axis;  // n_samples | delta
  std::vector<double> sweep_values;

  std::string output = "out";
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

std::string sha256_hex(const std::string& bytes);
// SHA-256 of the canonical (sorted-key) serialization.
std::string config_hash(const nlohmann::json& j);

// Stream indices used with the config seed.
constexpr std::uint64_t kDataStream = 1000;    // + s: background behind dataset s
constexpr std::uint64_t kSampleStream = 2000;  // + s: samples drawn by the inverter
constexpr std::uint64_t kTrialStream = 3000;   // + s: tuning trial backgrounds

FieldSource scatterer_source(const ExperimentConfig& c);
FieldSource medium_sample(const ExperimentConfig& c, std::uint64_t stream);
int dataset_count(const ExperimentConfig& c);

// Assembles the strategy input (everything except datasets and samples).
StrategyInput strategy_template(const ExperimentConfig& c);

int cmd_generate(const ExperimentConfig& c);
int cmd_invert(const ExperimentConfig& c, const std::vector<std::string>& dataset_paths);
int cmd_sweep(const ExperimentConfig& c);
int cmd_tune_alpha(const ExperimentConfig& c);
int cmd_export(const std::string& in_path, const std::string& out_path);

// Full command-line entry point; returns the exit code.
int run_cli(int argc, char** argv);

}  // namespace sb
