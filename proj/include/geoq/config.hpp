#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoq/ensemble.hpp"
#include "geoq/sequence.hpp"
#include "geoq/spin_model.hpp"

// Run configuration: a single JSON file with nested sections and explicit
// units in the key names.  Unknown keys are rejected; every field is typed
// and bounds-checked at load.

namespace geoq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TauScanSpec {
  double start_us = 0.5;
  double stop_us = 30.0;
  double step_us = 0.1;
};

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int points = 1;
};

struct RunConfig {
  DriveParams drive{25.0, 130.0, 0.0, 0.0};
  NoiseModel noise{0.3, 2.2, 2.6, 0.0, 2000.0, 0.0};

  // sequence
  int n_gates = 8;
  std::vector<int> n_list;  // optional; empty means use n_gates
  std::optional<double> tau_us;
  std::optional<TauScanSpec> tau_scan;
  EdgeConvention edge = EdgeConvention::kHalfInterval;

  // ensemble
  int samples = 2000;
  uint64_t seed = 12345;

  // sweep grids
  GridSpec sweep_splitting_mhz{-4.0, 4.0, 81};
  GridSpec sweep_tau_us{0.5, 30.0, 60};
  std::vector<int> sweep_n_list{1, 2, 4, 8};

  // integrator
  StepSizes dt;
  double ou_sample_dt_us = 0.5;
  GatePeriod gate_period = GatePeriod::kGeneralized;

  // output
  std::string out_path = "out.csv";
  std::string format = "csv";

  // Resolved tau grid: the scan when present, otherwise the scalar.
  std::vector<double> tau_values() const;
  // n_list when present, otherwise {n_gates}.
  std::vector<int> run_n_list() const;
};

RunConfig default_config();

// Throws ConfigError naming the offending key on schema violations.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

// Applies one dotted-path override, e.g. ("drive.detuning_khz", "0"), by
// patching the JSON form and re-validating the whole document.
void apply_override(nlohmann::json& j, const std::string& dotted_key, const std::string& value);

// Inclusive range [start, stop] with the given step.
std::vector<double> linspace_step(double start, double stop, double step);
// points evenly spaced values covering [min, max].
std::vector<double> linspace_points(double min, double max, int points);

}  // namespace geoq
