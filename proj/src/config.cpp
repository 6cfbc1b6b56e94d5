#include "geoq/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace geoq {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& prefix,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw ConfigError("config: expected an object at \"" + prefix + "\"");
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      throw ConfigError("config: unknown key \"" + path + "\"");
    }
  }
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("config: \"" + path + "." + key + "\" must be a number");
  }
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError("config: \"" + path + "." + key + "\" must be an integer");
  }
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) {
    throw ConfigError("config: \"" + path + "." + key + "\" must be a string");
  }
  return v.get<std::string>();
}

std::vector<int> get_int_list(const json& obj, const std::string& path, const std::string& key,
                              const std::vector<int>& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) {
    throw ConfigError("config: \"" + path + "." + key + "\" must be an array of integers");
  }
  std::vector<int> out;
  for (const auto& item : v) {
    if (!item.is_number_integer() && !item.is_number_unsigned()) {
      throw ConfigError("config: \"" + path + "." + key + "\" must contain integers only");
    }
    out.push_back(item.get<int>());
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

}  // namespace

std::vector<double> RunConfig::tau_values() const {
  if (tau_scan) return linspace_step(tau_scan->start_us, tau_scan->stop_us, tau_scan->step_us);
  if (tau_us) return {*tau_us};
  return {};
}

std::vector<int> RunConfig::run_n_list() const {
  if (!n_list.empty()) return n_list;
  return {n_gates};
}

RunConfig default_config() {
  RunConfig config;
  config.tau_scan = TauScanSpec{0.5, 30.0, 0.1};
  return config;
}

RunConfig parse_config(const json& j) {
  check_keys(j, "", {"drive", "noise", "sequence", "ensemble", "sweep", "sim", "output"});
  RunConfig config = default_config();

  if (j.contains("drive")) {
    const json& d = j.at("drive");
    check_keys(d, "drive", {"rabi_mhz", "detuning_khz", "phase_rad", "pulse_length_error"});
    config.drive.rabi_mhz = get_number(d, "drive", "rabi_mhz", config.drive.rabi_mhz);
    config.drive.detuning_khz = get_number(d, "drive", "detuning_khz", config.drive.detuning_khz);
    config.drive.phase_rad = get_number(d, "drive", "phase_rad", config.drive.phase_rad);
    config.drive.pulse_length_error =
        get_number(d, "drive", "pulse_length_error", config.drive.pulse_length_error);
    require(config.drive.rabi_mhz > 0.0, "\"drive.rabi_mhz\" must be > 0");
    require(std::abs(config.drive.pulse_length_error) < 0.5,
            "\"drive.pulse_length_error\" must lie in (-0.5, 0.5)");
  }

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, "noise",
               {"c13_width_1e_mhz", "n14_splitting_mhz", "t1_ms", "ou_amplitude_mhz", "ou_tau_us",
                "detuning_jitter_khz"});
    config.noise.c13_width_1e_mhz =
        get_number(n, "noise", "c13_width_1e_mhz", config.noise.c13_width_1e_mhz);
    config.noise.n14_splitting_mhz =
        get_number(n, "noise", "n14_splitting_mhz", config.noise.n14_splitting_mhz);
    if (n.contains("t1_ms")) {
      const json& t1 = n.at("t1_ms");
      if (t1.is_null() || (t1.is_string() && t1.get<std::string>() == "inf")) {
        config.noise.t1_ms = kInfiniteT1;
      } else if (t1.is_number()) {
        config.noise.t1_ms = t1.get<double>();
      } else {
        throw ConfigError("config: \"noise.t1_ms\" must be a number, null or \"inf\"");
      }
    }
    config.noise.ou_amplitude_mhz =
        get_number(n, "noise", "ou_amplitude_mhz", config.noise.ou_amplitude_mhz);
    config.noise.ou_correlation_time_us =
        get_number(n, "noise", "ou_tau_us", config.noise.ou_correlation_time_us);
    config.noise.detuning_jitter_khz =
        get_number(n, "noise", "detuning_jitter_khz", config.noise.detuning_jitter_khz);
    require(config.noise.c13_width_1e_mhz >= 0.0, "\"noise.c13_width_1e_mhz\" must be >= 0");
    require(config.noise.n14_splitting_mhz >= 0.0, "\"noise.n14_splitting_mhz\" must be >= 0");
    require(config.noise.t1_ms > 0.0, "\"noise.t1_ms\" must be > 0");
    require(config.noise.ou_amplitude_mhz >= 0.0, "\"noise.ou_amplitude_mhz\" must be >= 0");
    require(config.noise.ou_correlation_time_us >= 0.0, "\"noise.ou_tau_us\" must be >= 0");
    require(config.noise.detuning_jitter_khz >= 0.0,
            "\"noise.detuning_jitter_khz\" must be >= 0");
  }

  if (j.contains("sequence")) {
    const json& s = j.at("sequence");
    check_keys(s, "sequence", {"n_gates", "n_list", "tau_us", "edge_convention"});
    config.n_gates = get_int(s, "sequence", "n_gates", config.n_gates);
    require(config.n_gates >= 1, "\"sequence.n_gates\" must be >= 1");
    config.n_list = get_int_list(s, "sequence", "n_list", {});
    for (int n : config.n_list) require(n >= 1, "\"sequence.n_list\" entries must be >= 1");
    if (s.contains("tau_us")) {
      const json& t = s.at("tau_us");
      if (t.is_number()) {
        config.tau_us = t.get<double>();
        config.tau_scan.reset();
        require(*config.tau_us >= 0.0, "\"sequence.tau_us\" must be >= 0");
      } else if (t.is_object()) {
        check_keys(t, "sequence.tau_us", {"start", "stop", "step"});
        TauScanSpec scan;
        scan.start_us = get_number(t, "sequence.tau_us", "start", 0.5);
        scan.stop_us = get_number(t, "sequence.tau_us", "stop", 30.0);
        scan.step_us = get_number(t, "sequence.tau_us", "step", 0.1);
        require(scan.step_us > 0.0, "\"sequence.tau_us.step\" must be > 0");
        require(scan.stop_us >= scan.start_us,
                "\"sequence.tau_us.stop\" must be >= \"sequence.tau_us.start\"");
        require(scan.start_us >= 0.0, "\"sequence.tau_us.start\" must be >= 0");
        config.tau_scan = scan;
        config.tau_us.reset();
      } else {
        throw ConfigError("config: \"sequence.tau_us\" must be a number or {start, stop, step}");
      }
    }
    const std::string edge = get_string(s, "sequence", "edge_convention", "half-interval");
    if (edge == "half-interval") {
      config.edge = EdgeConvention::kHalfInterval;
    } else if (edge == "full-interval") {
      config.edge = EdgeConvention::kFullInterval;
    } else {
      throw ConfigError(
          "config: \"sequence.edge_convention\" must be \"half-interval\" or \"full-interval\"");
    }
  }

  if (j.contains("ensemble")) {
    const json& e = j.at("ensemble");
    check_keys(e, "ensemble", {"samples", "seed"});
    config.samples = get_int(e, "ensemble", "samples", config.samples);
    require(config.samples >= 1, "\"ensemble.samples\" must be >= 1");
    if (e.contains("seed")) {
      const json& seed = e.at("seed");
      if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
        throw ConfigError("config: \"ensemble.seed\" must be an integer");
      }
      config.seed = seed.get<uint64_t>();
    }
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, "sweep", {"splitting_mhz", "tau_us", "n_list"});
    auto parse_grid = [&](const std::string& key, GridSpec spec) {
      if (!s.contains(key)) return spec;
      const json& g = s.at(key);
      check_keys(g, "sweep." + key, {"min", "max", "points"});
      spec.min = get_number(g, "sweep." + key, "min", spec.min);
      spec.max = get_number(g, "sweep." + key, "max", spec.max);
      spec.points = get_int(g, "sweep." + key, "points", spec.points);
      require(spec.points >= 1, "\"sweep." + key + ".points\" must be >= 1");
      require(spec.max >= spec.min,
              "\"sweep." + key + ".max\" must be >= \"sweep." + key + ".min\"");
      return spec;
    };
    config.sweep_splitting_mhz = parse_grid("splitting_mhz", config.sweep_splitting_mhz);
    config.sweep_tau_us = parse_grid("tau_us", config.sweep_tau_us);
    config.sweep_n_list = get_int_list(s, "sweep", "n_list", config.sweep_n_list);
    require(!config.sweep_n_list.empty(), "\"sweep.n_list\" must not be empty");
    for (int n : config.sweep_n_list) require(n >= 1, "\"sweep.n_list\" entries must be >= 1");
  }

  if (j.contains("sim")) {
    const json& s = j.at("sim");
    check_keys(s, "sim", {"dt_us", "dt_free_us", "ou_sample_dt_us", "gate_period"});
    config.dt.drive_on_dt_us = get_number(s, "sim", "dt_us", config.dt.drive_on_dt_us);
    config.dt.drive_off_dt_us = get_number(s, "sim", "dt_free_us", config.dt.drive_off_dt_us);
    config.ou_sample_dt_us = get_number(s, "sim", "ou_sample_dt_us", config.ou_sample_dt_us);
    require(config.dt.drive_on_dt_us > 0.0, "\"sim.dt_us\" must be > 0");
    require(config.dt.drive_off_dt_us > 0.0, "\"sim.dt_free_us\" must be > 0");
    require(config.ou_sample_dt_us > 0.0, "\"sim.ou_sample_dt_us\" must be > 0");
    const std::string period = get_string(s, "sim", "gate_period", "generalized");
    if (period == "generalized") {
      config.gate_period = GatePeriod::kGeneralized;
    } else if (period == "bare") {
      config.gate_period = GatePeriod::kBare;
    } else {
      throw ConfigError("config: \"sim.gate_period\" must be \"generalized\" or \"bare\"");
    }
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"path", "format"});
    config.out_path = get_string(o, "output", "path", config.out_path);
    config.format = get_string(o, "output", "format", config.format);
    require(config.format == "csv" || config.format == "json",
            "\"output.format\" must be \"csv\" or \"json\"");
  }

  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw ConfigError("config: parse failure in \"" + path + "\": " + err.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const RunConfig& config) {
  json j;
  j["drive"] = {{"rabi_mhz", config.drive.rabi_mhz},
                {"detuning_khz", config.drive.detuning_khz},
                {"phase_rad", config.drive.phase_rad},
                {"pulse_length_error", config.drive.pulse_length_error}};
  j["noise"] = {{"c13_width_1e_mhz", config.noise.c13_width_1e_mhz},
                {"n14_splitting_mhz", config.noise.n14_splitting_mhz},
                {"ou_amplitude_mhz", config.noise.ou_amplitude_mhz},
                {"ou_tau_us", config.noise.ou_correlation_time_us},
                {"detuning_jitter_khz", config.noise.detuning_jitter_khz}};
  if (std::isinf(config.noise.t1_ms)) {
    j["noise"]["t1_ms"] = nullptr;
  } else {
    j["noise"]["t1_ms"] = config.noise.t1_ms;
  }
  j["sequence"]["n_gates"] = config.n_gates;
  if (!config.n_list.empty()) j["sequence"]["n_list"] = config.n_list;
  if (config.tau_scan) {
    j["sequence"]["tau_us"] = {{"start", config.tau_scan->start_us},
                               {"stop", config.tau_scan->stop_us},
                               {"step", config.tau_scan->step_us}};
  } else if (config.tau_us) {
    j["sequence"]["tau_us"] = *config.tau_us;
  }
  j["sequence"]["edge_convention"] =
      config.edge == EdgeConvention::kHalfInterval ? "half-interval" : "full-interval";
  j["ensemble"] = {{"samples", config.samples}, {"seed", config.seed}};
  j["sweep"] = {{"splitting_mhz",
                 {{"min", config.sweep_splitting_mhz.min},
                  {"max", config.sweep_splitting_mhz.max},
                  {"points", config.sweep_splitting_mhz.points}}},
                {"tau_us",
                 {{"min", config.sweep_tau_us.min},
                  {"max", config.sweep_tau_us.max},
                  {"points", config.sweep_tau_us.points}}},
                {"n_list", config.sweep_n_list}};
  j["sim"] = {{"dt_us", config.dt.drive_on_dt_us},
              {"dt_free_us", config.dt.drive_off_dt_us},
              {"ou_sample_dt_us", config.ou_sample_dt_us},
              {"gate_period",
               config.gate_period == GatePeriod::kGeneralized ? "generalized" : "bare"}};
  j["output"] = {{"path", config.out_path}, {"format", config.format}};
  return j;
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write \"" + path + "\"");
  out << to_json(config).dump(2) << "\n";
}

void apply_override(nlohmann::json& j, const std::string& dotted_key, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare strings, e.g. edge conventions
  }

  json* node = &j;
  std::stringstream keys(dotted_key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(keys, part, '.')) {
    if (!part.empty()) parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("config: empty override key");
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = parsed;
}

std::vector<double> linspace_step(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("linspace_step: step must be > 0");
  std::vector<double> out;
  const auto count = static_cast<size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::vector<double> linspace_points(double min, double max, int points) {
  if (points < 1) throw std::invalid_argument("linspace_points: need at least 1 point");
  std::vector<double> out;
  out.reserve(points);
  if (points == 1) {
    out.push_back(min);
    return out;
  }
  const double step = (max - min) / (points - 1);
  for (int i = 0; i < points; ++i) out.push_back(min + i * step);
  return out;
}

}  // namespace geoq
