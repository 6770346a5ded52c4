#include "scatterbench/harness.hpp"

#include <omp.h>
#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "scatterbench/io.hpp"

namespace sb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ErrorKind::ConfigError, where + " must be a table");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(ErrorKind::ConfigError, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_or(const json& obj, const char* key, const std::string& where, T dflt) {
  if (!obj.contains(key)) return dflt;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, where + "." + key + ": " + e.what());
  }
}

PriorSpec parse_prior(const json& j, const std::string& where) {
  check_keys(j, where, {"a11", "a22", "delta", "M_eta", "band_min"});
  PriorSpec p;
  p.a11 = get_or(j, "a11", where, p.a11);
  p.a22 = get_or(j, "a22", where, p.a22);
  p.delta = get_or(j, "delta", where, p.delta);
  p.M_eta = get_or(j, "M_eta", where, p.M_eta);
  p.band_min = get_or(j, "band_min", where, p.band_min);
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, where + ": " + e.detail());
  }
  return p;
}

std::vector<double> load_schedule(const json& v) {
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_string()) {
    const std::string path = v.get<std::string>();
    std::ifstream f(path);
    if (!f) fail(ErrorKind::ConfigError, "alpha schedule file not found: " + path);
    try {
      return json::parse(f).at("alpha").get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail(ErrorKind::ConfigError, "bad alpha schedule file " + path + ": " + e.what());
    }
  }
  fail(ErrorKind::ConfigError, "strategy.alpha_schedule must be a list or a schedule file path");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

// Collects every artifact so each one is listed in exactly one manifest.
class OutputWriter {
 public:
  explicit OutputWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::IoError, "cannot create " + dir_.string() + ": " + ec.message());
  }
  fs::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  void text(const std::string& name, const std::string& body) {
    std::ofstream f(path(name), std::ios::binary);
    f << body;
    if (!f) fail(ErrorKind::IoError, "cannot write " + name);
  }
  void spc1(const std::string& name, const SpectralCoeffs& c) { write_spc1(path(name).string(), c); }
  void grd1(const std::string& name, const GridField& g) { write_grd1(path(name).string(), g); }
  void mst1(const std::string& name, const MeasurementSet& m) { write_mst1(path(name).string(), m); }
  // Writes the manifest last, listing everything written through this writer.
  void manifest(const std::string& name, json m) {
    m["files"] = files_;
    std::ofstream f(dir_ / name, std::ios::binary);
    f << m.dump(2) << "\n";
    if (!f) fail(ErrorKind::IoError, "cannot write " + name);
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

json manifest_base(const ExperimentConfig& c, const char* command) {
  json m;
  m["tool"] = "scatterbench";
  m["version"] = SB_VERSION;
  m["command"] = command;
  m["config_hash"] = config_hash(c.raw);
  m["config"] = c.raw;
  m["seed"] = c.seed;
  return m;
}

constexpr int kTruthNodes = 129;

GridField truth_q(const ExperimentConfig& c) { return scatterer_source(c).on(square_grid(kTruthNodes)); }

MeasurementSet make_dataset(const ExperimentConfig& c, const FieldSource& q, int s) {
  SolverOptions opt;
  opt.model = c.model;
  try {
    return generate_data(q, medium_sample(c, kDataStream + s), c.setup, c.data_profile, opt);
  } catch (const Error& e) {
    throw e.with_context("sample " + std::to_string(s));
  }
}

std::vector<std::string> manifest_datasets(const fs::path& dir) {
  std::ifstream f(dir / "manifest_generate.json");
  if (!f) fail(ErrorKind::ConfigError, "no datasets given and no manifest_generate.json in " + dir.string());
  std::vector<std::string> out;
  const json m = json::parse(f);
  for (const auto& s : m.at("samples")) out.push_back((dir / s.at("dataset").get<std::string>()).string());
  return out;
}

std::string history_csv(const InversionReport& r, const GridField* truth) {
  std::string out = "k,residual_rel,error_rel,iters,stop_reason\n";
  for (const auto& h : r.freqs) {
    out += fmt(h.k) + "," + fmt(h.residuals.empty() ? 0.0 : h.residuals.back()) + ",";
    if (truth) out += fmt(relative_error(h.q, *truth));
    out += "," + std::to_string(h.iters) + "," + stop_reason_name(h.stop) + "\n";
  }
  return out;
}

json report_json(const InversionReport& r) {
  json fr = json::array();
  for (const auto& h : r.freqs) {
    fr.push_back({{"k", h.k},
                  {"iters", h.iters},
                  {"n_unknowns", h.n_unknowns},
                  {"residuals", h.residuals},
                  {"step_norms", h.step_norms},
                  {"stop_reason", stop_reason_name(h.stop)},
                  {"grid_n", h.grid_n}});
  }
  return {{"frequencies", fr}, {"wall_time_s", r.wall_time_s}};
}

StrategyInput build_input(const ExperimentConfig& c, std::vector<MeasurementSet> datasets) {
  StrategyInput in = strategy_template(c);
  in.datasets = std::move(datasets);
  if (c.strategy == "misdnp")
    for (int s = 1; s <= c.n_samples; ++s) in.eta_samples.push_back(medium_sample(c, kSampleStream + s));
  if (c.strategy == "known_eta") in.known_eta = medium_sample(c, kDataStream + 1);
  return in;
}

void write_inversion(OutputWriter& w, const ExperimentConfig& c, const InversionReport& r, const json& inputs,
                     bool partial, const std::string& error) {
  const std::string stem = c.strategy;
  std::optional<GridField> truth;
  if (c.scatterer != "none") truth = truth_q(c);
  w.spc1(stem + "_q.spc", r.q);
  w.grd1(stem + "_q.grd", synthesize(r.q, square_grid(kTruthNodes)));
  if (r.eta) w.spc1(stem + "_eta.spc", *r.eta);
  w.text(stem + "_history.csv", history_csv(r, truth ? &*truth : nullptr));
  json m = manifest_base(c, "invert");
  m["strategy"] = c.strategy;
  m["datasets"] = inputs;
  m["report"] = report_json(r);
  m["partial"] = partial;
  if (!error.empty()) m["error"] = error;
  if (!c.prior_step.alpha_schedule.empty()) m["alpha_schedule"] = c.prior_step.alpha_schedule;
  std::vector<std::uint64_t> streams;
  for (int s = 1; s <= c.n_samples && c.strategy == "misdnp"; ++s) streams.push_back(kSampleStream + s);
  m["sample_streams"] = streams;
  w.manifest("manifest_invert_" + stem + ".json", m);
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::FormatError:
    case ErrorKind::BoxMismatch:
    case ErrorKind::IoError:
    case ErrorKind::InvalidModeRange:
      return kExitConfig;
    case ErrorKind::ResolutionTooCoarse:
    case ErrorKind::GridTooCoarse:
    case ErrorKind::NonConvergence:
      return kExitForward;
    default:
      return kExitInversion;
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  c.raw = j;
  check_keys(j, "config",
             {"seed", "scatterer", "medium", "setup", "resolution", "model", "strategy", "gn", "tuning", "sweep",
              "output"});
  c.seed = get_or<std::uint64_t>(j, "seed", "config", c.seed);
  c.output = get_or<std::string>(j, "output", "config", c.output);
  const std::string model = get_or<std::string>(j, "model", "config", "full");
  if (model == "full") c.model = ForwardModel::Full;
  else if (model == "born") c.model = ForwardModel::Born;
  else fail(ErrorKind::ConfigError, "model must be full or born");

  if (j.contains("scatterer")) {
    const json& s = j["scatterer"];
    check_keys(s, "scatterer", {"source", "path", "band"});
    c.scatterer = get_or<std::string>(s, "source", "scatterer", c.scatterer);
    c.raster_path = get_or<std::string>(s, "path", "scatterer", "");
    c.scatterer_band = get_or(s, "band", "scatterer", 0);
    if (c.scatterer != "bumps" && c.scatterer != "raster" && c.scatterer != "none")
      fail(ErrorKind::ConfigError, "scatterer.source must be bumps, raster or none");
    if (c.scatterer == "raster" && !fs::exists(c.raster_path))
      fail(ErrorKind::ConfigError, "raster file not found: " + c.raster_path);
    if (c.scatterer_band < 0 || c.scatterer_band > kMaxModes)
      fail(ErrorKind::ConfigError, "scatterer.band out of range");
  }

  if (j.contains("medium")) {
    const json& m = j["medium"];
    check_keys(m, "medium", {"kind", "n_omega", "mu", "delta", "a11", "a22", "M_eta", "band_min"});
    c.medium = get_or<std::string>(m, "kind", "medium", "none");
    if (c.medium == "laplacian") {
      c.laplacian.n_omega = get_or(m, "n_omega", "medium", c.laplacian.n_omega);
      c.laplacian.mu = get_or(m, "mu", "medium", c.laplacian.mu);
      c.laplacian.delta = get_or(m, "delta", "medium", c.laplacian.delta);
      try {
        c.laplacian.validate();
      } catch (const Error& e) {
        fail(ErrorKind::ConfigError, "medium: " + e.detail());
      }
    } else if (c.medium == "spectral") {
      json p = m;
      p.erase("kind");
      c.spectral = parse_prior(p, "medium");
    } else if (c.medium != "none") {
      fail(ErrorKind::ConfigError, "medium.kind must be none, laplacian or spectral");
    }
  }

  if (j.contains("setup")) {
    const json& s = j["setup"];
    check_keys(s, "setup", {"k_min", "dk", "Q", "n_theta", "n_p", "radius"});
    c.setup.k_min = get_or(s, "k_min", "setup", c.setup.k_min);
    c.setup.dk = get_or(s, "dk", "setup", c.setup.dk);
    c.setup.Q = get_or(s, "Q", "setup", c.setup.Q);
    c.setup.n_theta = get_or(s, "n_theta", "setup", c.setup.n_theta);
    c.setup.ring.n_p = get_or(s, "n_p", "setup", c.setup.ring.n_p);
    c.setup.ring.radius = get_or(s, "radius", "setup", c.setup.ring.radius);
  }
  try {
    c.setup.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, "setup: " + e.detail());
  }

  if (j.contains("resolution")) {
    const json& r = j["resolution"];
    check_keys(r, "resolution",
               {"data_ppw", "data_n_min", "inversion_ppw", "inversion_n_min", "inversion_min_ppw", "contrast_hint"});
    c.data_profile.ppw = get_or(r, "data_ppw", "resolution", c.data_profile.ppw);
    c.data_profile.n_min = get_or(r, "data_n_min", "resolution", c.data_profile.n_min);
    c.inversion_profile.ppw = get_or(r, "inversion_ppw", "resolution", c.inversion_profile.ppw);
    c.inversion_profile.n_min = get_or(r, "inversion_n_min", "resolution", c.inversion_profile.n_min);
    c.inversion_min_ppw = get_or(r, "inversion_min_ppw", "resolution", c.inversion_min_ppw);
    c.contrast_hint = get_or(r, "contrast_hint", "resolution", c.contrast_hint);
    if (!(c.data_profile.ppw > 0 && c.inversion_profile.ppw > 0))
      fail(ErrorKind::ConfigError, "resolution ppw must be positive");
  }

  if (j.contains("strategy")) {
    const json& s = j["strategy"];
    check_keys(s, "strategy",
               {"name", "n_samples", "truncation", "M", "alpha", "beta", "alpha_schedule", "prior_eta", "prior_q",
                "simdnp_variant", "mean_eta", "step"});
    c.strategy = get_or<std::string>(s, "name", "strategy", c.strategy);
    c.n_samples = get_or(s, "n_samples", "strategy", c.n_samples);
    c.M = get_or(s, "M", "strategy", c.M);
    if (s.contains("truncation")) {
      const json& t = s["truncation"];
      if (t.is_string() && t.get<std::string>() == "diagonal") {
        c.trunc = TruncationRule::diagonal();
      } else if (t.is_object()) {
        check_keys(t, "strategy.truncation", {"max_mode"});
        c.trunc = TruncationRule::max_mode_rule(get_or(t, "max_mode", "strategy.truncation", 1));
        if (c.trunc.max_mode < 1 || c.trunc.max_mode > kMaxModes)
          fail(ErrorKind::ConfigError, "strategy.truncation.max_mode out of range");
      } else {
        fail(ErrorKind::ConfigError, "strategy.truncation must be \"diagonal\" or {max_mode = M}");
      }
    }
    const std::string step = get_or<std::string>(s, "step", "strategy", "prior");
    if (step == "prior") c.prior_step.mode = StepMode::PriorAugmented;
    else if (step == "truncation") c.prior_step.mode = StepMode::TruncationOnly;
    else fail(ErrorKind::ConfigError, "strategy.step must be prior or truncation");
    c.prior_step.alpha = get_or(s, "alpha", "strategy", 0.0);
    c.prior_step.beta = get_or(s, "beta", "strategy", 0.0);
    if (s.contains("alpha_schedule")) c.prior_step.alpha_schedule = load_schedule(s["alpha_schedule"]);
    if (s.contains("prior_eta")) c.prior_step.prior_eta = parse_prior(s["prior_eta"], "strategy.prior_eta");
    if (s.contains("prior_q")) c.prior_step.prior_q = parse_prior(s["prior_q"], "strategy.prior_q");
    const std::string v = get_or<std::string>(s, "simdnp_variant", "strategy", "alg");
    if (v == "alg") c.simdnp_variant = SimdnpVariant::Algorithm;
    else if (v == "intro") c.simdnp_variant = SimdnpVariant::Intro;
    else fail(ErrorKind::ConfigError, "strategy.simdnp_variant must be alg or intro");
    c.mean_eta_path = get_or<std::string>(s, "mean_eta", "strategy", "");
    if (!c.mean_eta_path.empty() && !fs::exists(c.mean_eta_path))
      fail(ErrorKind::ConfigError, "mean_eta file not found: " + c.mean_eta_path);
  }
  if (!is_strategy(c.strategy)) fail(ErrorKind::ConfigError, "unknown strategy '" + c.strategy + "'");
  if (c.n_samples < 1) fail(ErrorKind::ConfigError, "strategy.n_samples must be at least 1");
  if (c.M < 1 || c.M > kMaxModes) fail(ErrorKind::ConfigError, "strategy.M out of range");
  if (c.strategy == "sisdp" || c.strategy == "mimdp") {
    try {
      c.prior_step.validate();
    } catch (const Error& e) {
      fail(ErrorKind::ConfigError, "strategy: " + e.detail());
    }
  }

  if (j.contains("gn")) {
    const json& g = j["gn"];
    check_keys(g, "gn", {"max_iters", "eps_res", "eps_step", "reject_worse"});
    c.gn.max_iters = get_or(g, "max_iters", "gn", c.gn.max_iters);
    c.gn.eps_res = get_or(g, "eps_res", "gn", c.gn.eps_res);
    c.gn.eps_step = get_or(g, "eps_step", "gn", c.gn.eps_step);
    c.gn.reject_worse = get_or(g, "reject_worse", "gn", c.gn.reject_worse);
    if (c.gn.max_iters < 1) fail(ErrorKind::ConfigError, "gn.max_iters must be at least 1");
  }

  if (j.contains("tuning")) {
    const json& t = j["tuning"];
    check_keys(t, "tuning", {"alpha0", "n_trials", "scripted_errors"});
    c.alpha0 = get_or(t, "alpha0", "tuning", c.alpha0);
    c.n_trials = get_or(t, "n_trials", "tuning", c.n_trials);
    c.scripted_errors = get_or(t, "scripted_errors", "tuning", c.scripted_errors);
    if (c.n_trials < 1) fail(ErrorKind::ConfigError, "tuning.n_trials must be at least 1");
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep", {"axis", "values"});
    c.sweep_axis = get_or<std::string>(s, "axis", "sweep", "");
    c.sweep_values = get_or(s, "values", "sweep", c.sweep_values);
    if (c.sweep_axis != "n_samples" && c.sweep_axis != "delta")
      fail(ErrorKind::ConfigError, "sweep.axis must be n_samples or delta");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::ConfigError, "cannot open config " + path);
  json j;
  try {
    j = json::parse(f, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigError, path + ": " + e.what());
  }
  return parse_config(j);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::IoError, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// nlohmann::json objects iterate in sorted key order and print doubles in
// shortest round-trip form, so dump() is already canonical.
std::string config_hash(const json& j) { return sha256_hex(j.dump()); }

FieldSource scatterer_source(const ExperimentConfig& c) {
  FieldSource base;
  if (c.scatterer == "none") return FieldSource::zero();
  if (c.scatterer == "bumps") {
    const GridField probe = make_bumps(square_grid(257));
    base = FieldSource::from_function(bumps_value, 1.05 * max_abs(probe));
  } else {
    base = FieldSource::from_grid(load_raster(c.raster_path));
  }
  if (c.scatterer_band <= 0) return base;
  const int M = std::max(1, c.scatterer_band - 1);
  const SpectralCoeffs full = analyze(base.on(square_grid(std::max(analysis_nodes(M), 129))), M);
  return FieldSource::from_coeffs(truncate(full, TruncationRule::diagonal(), 0.5 * c.scatterer_band));
}

FieldSource medium_sample(const ExperimentConfig& c, std::uint64_t stream) {
  if (c.medium == "laplacian") return FieldSource::from_grid(sample_eta_laplacian(c.laplacian, c.seed, stream));
  if (c.medium == "spectral") return FieldSource::from_coeffs(sample_eta_spectral(c.spectral, c.seed, stream));
  return FieldSource::zero();
}

int dataset_count(const ExperimentConfig& c) {
  return strategy_uses_multiple_datasets(c.strategy) ? c.n_samples : 1;
}

StrategyInput strategy_template(const ExperimentConfig& c) {
  StrategyInput in;
  in.cfg = c.gn;
  in.trunc = c.trunc;
  in.q0 = SpectralCoeffs(c.M);
  in.prior_step = c.prior_step;
  in.simdnp_variant = c.simdnp_variant;
  in.ctx.setup = c.setup;
  in.ctx.profile = c.inversion_profile;
  in.ctx.solver.min_ppw = c.inversion_min_ppw;
  in.ctx.solver.model = c.model;
  in.ctx.contrast_hint = c.contrast_hint;
  if (!c.mean_eta_path.empty()) in.mean_eta = FieldSource::from_grid(load_raster(c.mean_eta_path));
  return in;
}

int cmd_generate(const ExperimentConfig& c) {
  OutputWriter w(c.output);
  const FieldSource q = scatterer_source(c);
  const int n = dataset_count(c);
  json samples = json::array();
  std::vector<MeasurementSet> sets;
  for (int s = 1; s <= n; ++s) sets.push_back(make_dataset(c, q, s));
  for (int s = 1; s <= n; ++s) {
    const std::string d = "data_s" + std::to_string(s) + ".mst";
    w.mst1(d, sets[s - 1]);
    json entry = {{"index", s}, {"stream", kDataStream + s}, {"dataset", d}};
    if (c.medium != "none") {
      const std::string e = "truth_eta_s" + std::to_string(s) + ".grd";
      const FieldSource eta = medium_sample(c, kDataStream + s);
      w.grd1(e, c.medium == "laplacian" ? eta.on(square_grid(c.laplacian.n_omega)) : eta.on(square_grid(kTruthNodes)));
      entry["eta"] = e;
    }
    samples.push_back(entry);
  }
  if (c.scatterer != "none") w.grd1("truth_q.grd", truth_q(c));
  json m = manifest_base(c, "generate");
  m["samples"] = samples;
  w.manifest("manifest_generate.json", m);
  return kExitOk;
}

int cmd_invert(const ExperimentConfig& c, const std::vector<std::string>& dataset_paths) {
  std::vector<std::string> paths = dataset_paths.empty() ? manifest_datasets(c.output) : dataset_paths;
  const int want = dataset_count(c);
  if (static_cast<int>(paths.size()) < want)
    fail(ErrorKind::ConfigError, c.strategy + " needs " + std::to_string(want) + " datasets, got " +
                                     std::to_string(paths.size()));
  if (!strategy_uses_multiple_datasets(c.strategy) && paths.size() > 1 && !dataset_paths.empty())
    fail(ErrorKind::ConfigError, c.strategy + " takes one dataset, got " + std::to_string(paths.size()));
  paths.resize(want);
  std::vector<MeasurementSet> sets;
  for (const auto& p : paths) {
    MeasurementSet m = read_mst1(p);
    if (!(m.setup == c.setup)) fail(ErrorKind::ConfigError, "dataset " + p + " does not match the config setup");
    sets.push_back(std::move(m));
  }
  OutputWriter w(c.output);
  const StrategyInput in = build_input(c, std::move(sets));
  try {
    StrategyResult r = run_strategy(c.strategy, in);
    r.report.config_hash = config_hash(c.raw);
    write_inversion(w, c, r.report, paths, false, "");
  } catch (const InversionError& e) {
    write_inversion(w, c, e.partial(), paths, true, e.what());
    throw;
  }
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& c) {
  if (c.sweep_values.empty()) fail(ErrorKind::ConfigError, "sweep.values is empty");
  std::vector<double> values = c.sweep_values;
  std::sort(values.begin(), values.end());
  const FieldSource q = scatterer_source(c);
  const GridField truth = truth_q(c);
  std::map<int, MeasurementSet> cache;  // datasets depend only on (seed, s) along the n_samples axis
  std::string csv = "value,error_rel,wall_time_s\n";
  json rows = json::array();
  for (double v : values) {
    ExperimentConfig ci = c;
    if (c.sweep_axis == "n_samples") {
      ci.n_samples = static_cast<int>(v);
      if (ci.n_samples < 1 || ci.n_samples != v) fail(ErrorKind::ConfigError, "n_samples sweep values must be positive integers");
    } else {
      if (c.medium == "laplacian") ci.laplacian.delta = v;
      else if (c.medium == "spectral") ci.spectral.delta = v;
      else fail(ErrorKind::ConfigError, "delta sweep needs a random medium");
      cache.clear();
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<MeasurementSet> sets;
    for (int s = 1; s <= dataset_count(ci); ++s) {
      auto it = cache.find(s);
      if (it == cache.end()) it = cache.emplace(s, make_dataset(ci, q, s)).first;
      sets.push_back(it->second);
    }
    const StrategyResult r = run_strategy(ci.strategy, build_input(ci, std::move(sets)));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double err = relative_error(r.report.q, truth);
    csv += fmt(v) + "," + fmt(err) + "," + fmt(secs) + "\n";
    rows.push_back({{"value", v}, {"error_rel", err}, {"wall_time_s", secs}});
  }
  OutputWriter w(c.output);
  w.text("sweep.csv", csv);
  json m = manifest_base(c, "sweep");
  m["axis"] = c.sweep_axis;
  m["strategy"] = c.strategy;
  m["rows"] = rows;
  w.manifest("manifest_sweep.json", m);
  return kExitOk;
}

int cmd_tune_alpha(const ExperimentConfig& c) {
  AlphaSchedule sched;
  std::vector<std::uint64_t> streams;
  if (!c.scripted_errors.empty()) {
    std::vector<SampleTuning> tuned;
    for (int s = 1; s <= c.n_trials; ++s) {
      ScriptedTrials runner(c.scripted_errors);
      tuned.push_back(tune_sample(c.alpha0, c.setup.Q, runner));
    }
    sched = average_schedules(tuned);
  } else {
    if (c.medium == "none") fail(ErrorKind::ConfigError, "tune-alpha needs a random medium for the trial set");
    const FieldSource q = scatterer_source(c);
    std::vector<FieldSource> etas;
    std::vector<MeasurementSet> sets;
    SolverOptions opt;
    opt.model = c.model;
    for (int s = 1; s <= c.n_trials; ++s) {
      streams.push_back(kTrialStream + s);
      etas.push_back(medium_sample(c, kTrialStream + s));
      sets.push_back(generate_data(q, etas.back(), c.setup, c.data_profile, opt));
    }
    StrategyInput base = strategy_template(c);
    if (!base.prior_step.prior_eta) fail(ErrorKind::ConfigError, "tune-alpha needs strategy.prior_eta");
    sched = find_alpha(c.alpha0, etas, sets, base);
  }
  OutputWriter w(c.output);
  json s = {{"alpha0", c.alpha0},
            {"alpha", sched.alpha},
            {"per_sample", sched.per_sample},
            {"solves_per_sample", sched.solves_per_sample},
            {"halvings", sched.halvings},
            {"scripted", !c.scripted_errors.empty()},
            {"trial_streams", streams}};
  w.text("alpha_schedule.json", s.dump(2) + "\n");
  json m = manifest_base(c, "tune-alpha");
  m["schedule"] = s;
  w.manifest("manifest_tune_alpha.json", m);
  return kExitOk;
}

int cmd_export(const std::string& in_path, const std::string& out_path) {
  const GridField f = read_grd1(in_path);
  std::string csv = "x,y,value\n";
  for (int i = 0; i < f.geom.nx; ++i)
    for (int jj = 0; jj < f.geom.ny; ++jj)
      csv += fmt(f.geom.x(i)) + "," + fmt(f.geom.y(jj)) + "," + fmt(f.v[f.geom.index(i, jj)]) + "\n";
  std::ofstream o(out_path, std::ios::binary);
  o << csv;
  if (!o) fail(ErrorKind::IoError, "cannot write " + out_path);
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"scatterbench: inverse scattering in random backgrounds"};
  app.require_subcommand(1);
  std::string config_path, out_dir, strategy, variant, in_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> data;
  auto common = [&](CLI::App* s, bool needs_config) {
    auto* o = s->add_option("--config", config_path, "experiment config (JSON)");
    if (needs_config) o->required();
    s->add_option("--seed", seed, "override the config seed");
    s->add_option("--threads", threads, "worker threads (default: SCATTERBENCH_THREADS)");
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--strategy", strategy, "strategy name");
    s->add_option("--simdnp-variant", variant, "alg or intro")->check(CLI::IsMember({"alg", "intro"}));
  };
  auto* gen = app.add_subcommand("generate", "write datasets and truth fields");
  auto* inv = app.add_subcommand("invert", "run a strategy on datasets");
  auto* swp = app.add_subcommand("sweep", "error versus N_s or delta");
  auto* tun = app.add_subcommand("tune-alpha", "regularization schedule search");
  auto* exp = app.add_subcommand("export", "GRD1 to CSV raster");
  for (auto* s : {gen, inv, swp, tun}) common(s, true);
  inv->add_option("--data", data, "MST1 datasets (default: those listed by generate in --out)");
  common(exp, false);
  exp->add_option("--in", in_path, "GRD1 input")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (threads <= 0)
    if (const char* env = std::getenv("SCATTERBENCH_THREADS")) threads = std::atoi(env);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (exp->parsed()) {
      if (out_dir.empty()) fail(ErrorKind::ConfigError, "export needs --out FILE");
      return cmd_export(in_path, out_dir);
    }
    json raw;
    {
      std::ifstream f(config_path);
      if (!f) fail(ErrorKind::ConfigError, "cannot open config " + config_path);
      try {
        raw = json::parse(f, nullptr, true, true);
      } catch (const json::parse_error& e) {
        fail(ErrorKind::ConfigError, config_path + ": " + e.what());
      }
    }
    if (!raw.is_object()) fail(ErrorKind::ConfigError, "config must be a table");
    // CLI overrides become part of the effective (hashed) config.
    if (seed) raw["seed"] = seed;
    if (!out_dir.empty()) raw["output"] = out_dir;
    if (!strategy.empty()) {
      if (!is_strategy(strategy)) {
        std::cerr << "error: unknown strategy '" << strategy << "'\n"
                  << "strategies: rla sisdnp misdnp mimdnp simdnp sisdp mimdp known_eta\n"
                  << app.help();
        return kExitConfig;
      }
      raw["strategy"]["name"] = strategy;
    }
    if (!variant.empty()) raw["strategy"]["simdnp_variant"] = variant;
    const ExperimentConfig c = parse_config(raw);
    if (gen->parsed()) return cmd_generate(c);
    if (inv->parsed()) return cmd_invert(c, data);
    if (swp->parsed()) return cmd_sweep(c);
    return cmd_tune_alpha(c);
  } catch (const InversionError& e) {
    std::cerr << "error: " << e.what() << " (partial report written)\n";
    return kExitInversion;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.kind() == ErrorKind::ConfigError && e.detail().rfind("unknown strategy", 0) == 0) std::cerr << app.help();
    const int code = exit_for(e.kind());
    // Solver failures inside an inversion are inversion failures.
    if (code == kExitForward && inv->parsed()) return kExitInversion;
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInversion;
  }
}

}  // namespace sb
