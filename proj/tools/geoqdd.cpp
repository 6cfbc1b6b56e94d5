// geoqdd: command-line front end for the geometric-qubit dynamical
// decoupling simulator.  Subcommands: simulate, sweep, fit, dips, reproduce.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoq/analysis.hpp"
#include "geoq/config.hpp"
#include "geoq/csv.hpp"
#include "geoq/ensemble.hpp"
#include "geoq/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace geoq;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_path;
  std::optional<uint64_t> seed;
  int threads = 0;  // 0: GEOQDD_THREADS or 1
  std::string format;
  std::vector<std::string> sets;                          // --set key=value
  std::vector<std::pair<std::string, std::string>> vals;  // convenience flags
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GEOQDD_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// Convenience flags map one-to-one onto config leaves.
const std::vector<std::pair<std::string, std::string>> kLeafFlags = {
    {"--rabi-mhz", "drive.rabi_mhz"},
    {"--detuning-khz", "drive.detuning_khz"},
    {"--phase-rad", "drive.phase_rad"},
    {"--pulse-length-error", "drive.pulse_length_error"},
    {"--c13-width-1e-mhz", "noise.c13_width_1e_mhz"},
    {"--n14-splitting-mhz", "noise.n14_splitting_mhz"},
    {"--t1-ms", "noise.t1_ms"},
    {"--ou-amplitude-mhz", "noise.ou_amplitude_mhz"},
    {"--ou-tau-us", "noise.ou_tau_us"},
    {"--detuning-jitter-khz", "noise.detuning_jitter_khz"},
    {"--n-gates", "sequence.n_gates"},
    {"--tau-us", "sequence.tau_us"},
    {"--edge-convention", "sequence.edge_convention"},
    {"--samples", "ensemble.samples"},
    {"--dt-us", "sim.dt_us"},
    {"--dt-free-us", "sim.dt_free_us"},
    {"--gate-period", "sim.gate_period"},
};

void add_config_options(CLI::App* cmd, GlobalOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Configuration file (JSON)");
  cmd->add_option("--out", opts.out_path, "Output path");
  cmd->add_option("--seed", opts.seed, "Master seed override");
  cmd->add_option("--threads", opts.threads,
                  "Worker threads (default: GEOQDD_THREADS or 1)");
  cmd->add_option("--format", opts.format, "Output format: csv or json");
  cmd->add_option("--set", opts.sets,
                  "Dotted-path config override, e.g. --set drive.detuning_khz=0");
  for (const auto& [flag, key] : kLeafFlags) {
    cmd->add_option_function<std::string>(
        flag,
        [&opts, key = key](const std::string& value) { opts.vals.emplace_back(key, value); },
        "Override " + key);
  }
}

RunConfig resolve_config(const GlobalOpts& opts) {
  json j = opts.config_path.empty() ? to_json(default_config()) : [&] {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("config: cannot read \"" + opts.config_path + "\"");
    json loaded;
    try {
      in >> loaded;
    } catch (const json::parse_error& err) {
      throw ConfigError("config: parse failure in \"" + opts.config_path + "\": " + err.what());
    }
    return loaded;
  }();

  for (const auto& [key, value] : opts.vals) apply_override(j, key, value);
  for (const auto& assignment : opts.sets) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: --set expects key=value, got \"" + assignment + "\"");
    }
    apply_override(j, assignment.substr(0, eq), assignment.substr(eq + 1));
  }

  RunConfig config = parse_config(j);
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.out_path.empty()) config.out_path = opts.out_path;
  if (!opts.format.empty()) {
    if (opts.format != "csv" && opts.format != "json") {
      throw ConfigError("config: --format must be csv or json");
    }
    config.format = opts.format;
  }
  return config;
}

void write_text(const std::string& path, const std::string& text) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
  out << text;
  if (!out) throw std::runtime_error("write failure on \"" + path + "\"");
}

void write_sidecar(const RunConfig& config) {
  write_text(config.out_path + ".config.json", to_json(config).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const GlobalOpts& opts) {
  const RunConfig config = resolve_config(opts);
  const std::vector<double> taus = config.tau_values();
  if (taus.empty()) {
    throw ConfigError("config: \"sequence.tau_us\" is required for simulate");
  }

  const ScanSettings settings =
      ScanSettings::from_config(config, resolve_threads(opts.threads));
  const std::vector<ScanPoint> points = run_tau_scan(taus, config.run_n_list(), settings);

  if (config.format == "csv") {
    std::string text = "tau_us,n_gates,p_plus,p_zero,p_minus,fidelity,stderr\n";
    for (const auto& pt : points) {
      text += format_full(pt.tau_us) + "," + std::to_string(pt.n_gates) + "," +
              format_full(pt.result.mean.p_plus) + "," + format_full(pt.result.mean.p_zero) +
              "," + format_full(pt.result.mean.p_minus) + "," +
              format_full(pt.result.mean_fidelity) + "," +
              format_full(pt.result.fidelity_std_error) + "\n";
    }
    write_text(config.out_path, text);
  } else {
    json rows = json::array();
    for (const auto& pt : points) {
      rows.push_back({{"tau_us", pt.tau_us},
                      {"n_gates", pt.n_gates},
                      {"p_plus", pt.result.mean.p_plus},
                      {"p_zero", pt.result.mean.p_zero},
                      {"p_minus", pt.result.mean.p_minus},
                      {"fidelity", pt.result.mean_fidelity},
                      {"stderr", pt.result.fidelity_std_error}});
    }
    write_text(config.out_path, json{{"rows", rows}}.dump(2) + "\n");
  }
  write_sidecar(config);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::string sweep_csv(const SweepResult& sweep) {
  std::string text = "splitting_mhz,tau_us,n_gates,p_plus\n";
  for (size_t i_s = 0; i_s < sweep.splitting_mhz.size(); ++i_s) {
    for (size_t i_t = 0; i_t < sweep.tau_us.size(); ++i_t) {
      for (size_t i_n = 0; i_n < sweep.n_gates.size(); ++i_n) {
        text += format_full(sweep.splitting_mhz[i_s]) + "," + format_full(sweep.tau_us[i_t]) +
                "," + std::to_string(sweep.n_gates[i_n]) + "," +
                format_full(sweep.p_plus[sweep.index(i_s, i_t, i_n)]) + "\n";
      }
    }
  }
  return text;
}

int cmd_sweep(const GlobalOpts& opts) {
  RunConfig config = resolve_config(opts);
  if (config.out_path == "out.csv" && opts.out_path.empty()) config.out_path = "sweep.csv";

  const auto splittings = linspace_points(config.sweep_splitting_mhz.min,
                                          config.sweep_splitting_mhz.max,
                                          config.sweep_splitting_mhz.points);
  const auto taus =
      linspace_points(config.sweep_tau_us.min, config.sweep_tau_us.max, config.sweep_tau_us.points);
  const SweepResult sweep =
      sweep_leakage_map(splittings, taus, config.sweep_n_list, config.drive, config.edge,
                        config.gate_period, resolve_threads(opts.threads));
  write_text(config.out_path, sweep_csv(sweep));
  write_sidecar(config);
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

json fit_to_json(const FitResult& fit, const std::string& model, size_t n_points) {
  json report;
  report["model"] = model;
  report["parameters"] = fit.parameters;
  report["standard_errors"] = fit.standard_errors;
  report["residual_norm"] = fit.residual_norm;
  report["converged"] = fit.converged;
  report["n_points"] = n_points;
  return report;
}

int cmd_fit(const std::string& model, const std::string& in_path, const std::string& out_path,
            double prominence, int bootstrap, uint64_t bootstrap_seed) {
  CsvTable table;
  try {
    table = read_csv(in_path);
  } catch (const std::exception& err) {
    throw std::runtime_error(std::string("fit: ") + err.what());
  }

  auto column = [&](const std::string& name) {
    if (table.column_index(name) < 0) {
      throw std::runtime_error("fit: missing column \"" + name + "\"");
    }
    return table.column(name);
  };

  FitOptions options;
  options.bootstrap_resamples = bootstrap;
  options.bootstrap_seed = bootstrap_seed;

  json report;
  if (model == "gate-error") {
    report = fit_to_json(fit_gate_error(column("n_gates"), column("fidelity"), options), model,
                         table.rows.size());
  } else if (model == "envelope") {
    report = fit_to_json(
        fit_coherence_envelope(column("total_time_ms"), column("amplitude"), options), model,
        table.rows.size());
  } else if (model == "power-law") {
    report = fit_to_json(fit_power_law(column("n_gates"), column("t2_pure_ms"), options), model,
                         table.rows.size());
  } else if (model == "dips") {
    const DipReport dips = find_dips(column("tau_us"), column("fidelity"), prominence);
    report["model"] = model;
    report["n_points"] = table.rows.size();
    report["prominence"] = prominence;
    report["dip_positions_us"] = dips.dip_positions_us;
    report["dip_widths_us"] = dips.dip_widths_us;
    if (!dips.empty()) {
      report["mean_spacing_us"] = dips.mean_spacing_us;
      report["estimated_detuning_khz"] = *dips.estimated_detuning_khz;
    }
  } else {
    throw std::runtime_error(
        "fit: unknown model \"" + model +
        "\" (valid: gate-error, envelope, power-law, dips)");
  }

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

void write_manifest(const std::string& dir, const std::string& figure, const RunConfig& config,
                    const std::vector<std::string>& files) {
  json manifest;
  manifest["figure"] = figure;
  manifest["config"] = to_json(config);
  manifest["files"] = files;
  write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
}

int cmd_reproduce(const std::string& figure, const GlobalOpts& opts) {
  GlobalOpts defaults;
  defaults.seed = opts.seed;
  RunConfig config = resolve_config(defaults);  // shipped defaults otherwise
  const int threads = resolve_threads(opts.threads);
  const std::string dir = opts.out_path.empty() ? figure : opts.out_path;
  fs::create_directories(dir);

  if (figure == "fig2a" || figure == "fig2b") {
    config.drive.detuning_khz = figure == "fig2a" ? 0.0 : 130.0;
    const auto splittings = linspace_points(config.sweep_splitting_mhz.min,
                                            config.sweep_splitting_mhz.max,
                                            config.sweep_splitting_mhz.points);
    const auto taus = linspace_points(config.sweep_tau_us.min, config.sweep_tau_us.max,
                                      config.sweep_tau_us.points);
    const SweepResult sweep = sweep_leakage_map(splittings, taus, config.sweep_n_list,
                                                config.drive, config.edge, config.gate_period,
                                                threads);
    write_text(dir + "/sweep.csv", sweep_csv(sweep));
    config.out_path = dir + "/sweep.csv";
    write_manifest(dir, figure, config, {"sweep.csv"});
    return 0;
  }

  if (figure == "fig3a") {
    config.samples = std::min(config.samples, 200);
    ScanSettings settings = ScanSettings::from_config(config, threads);
    const std::vector<int> n_list = {1, 2, 4, 8, 16, 32, 64, 128};
    const double tau_us = 4.0;  // off resonance for the default detuning
    const FidelityVsN data = run_fidelity_vs_n(n_list, tau_us, settings);

    std::string text = "n_gates,fidelity,stderr\n";
    std::vector<double> n_values, fidelities;
    for (size_t i = 0; i < data.n_gates.size(); ++i) {
      text += std::to_string(data.n_gates[i]) + "," + format_full(data.fidelity[i]) + "," +
              format_full(data.std_error[i]) + "\n";
      n_values.push_back(data.n_gates[i]);
      fidelities.push_back(std::min(1.0, std::max(0.0, data.fidelity[i])));
    }
    write_text(dir + "/fidelity_vs_n.csv", text);
    const FitResult fit = fit_gate_error(n_values, fidelities);
    write_text(dir + "/gate_error_fit.json",
               fit_to_json(fit, "gate-error", n_values.size()).dump(2) + "\n");
    config.out_path = dir + "/fidelity_vs_n.csv";
    config.tau_us = tau_us;
    config.tau_scan.reset();
    write_manifest(dir, figure, config, {"fidelity_vs_n.csv", "gate_error_fit.json"});
    return 0;
  }

  if (figure == "fig3c") {
    // Slow splitting noise turns the N scaling on; the full static noise
    // model stays in place.
    config.noise.ou_amplitude_mhz = 0.01;
    config.noise.ou_correlation_time_us = 2000.0;
    config.samples = std::min(config.samples, 16);
    ScanSettings settings = ScanSettings::from_config(config, threads);
    const std::vector<int> n_list = {1, 2, 4, 8, 16};
    const CoherenceStudy study = run_coherence_study(n_list, settings, 7);

    std::string envelopes = "n_gates,total_time_ms,amplitude\n";
    std::string summary =
        "n_gates,t2_ms,t2_stderr_ms,p,t2_pure_ms,t2_pure_stderr_ms\n";
    for (const auto& per : study.per_n) {
      for (size_t k = 0; k < per.total_time_ms.size(); ++k) {
        envelopes += std::to_string(per.n_gates) + "," + format_full(per.total_time_ms[k]) +
                     "," + format_full(per.amplitude[k]) + "\n";
      }
      summary += std::to_string(per.n_gates) + "," + format_full(per.t2_ms.value) + "," +
                 format_full(per.t2_ms.std_error) + "," + format_full(per.p) + "," +
                 format_full(per.t2_pure_ms.value) + "," +
                 format_full(per.t2_pure_ms.std_error) + "\n";
    }
    write_text(dir + "/envelopes.csv", envelopes);
    write_text(dir + "/coherence_vs_n.csv", summary);
    write_text(dir + "/scaling_fit.json",
               fit_to_json(study.scaling, "power-law", study.per_n.size()).dump(2) + "\n");
    config.out_path = dir + "/coherence_vs_n.csv";
    write_manifest(dir, figure, config,
                   {"envelopes.csv", "coherence_vs_n.csv", "scaling_fit.json"});
    return 0;
  }

  throw std::runtime_error("reproduce: unknown figure \"" + figure +
                           "\" (valid: fig2a, fig2b, fig3a, fig3c)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical-decoupling simulator for a geometric qutrit qubit"};
  app.require_subcommand(1);

  GlobalOpts simulate_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "Ensemble-averaged decoupling tau scan");
  add_config_options(simulate, simulate_opts);

  GlobalOpts sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "Leakage map over the splitting grid");
  add_config_options(sweep, sweep_opts);

  std::string fit_model, fit_in, fit_out;
  double prominence = 0.05;
  int bootstrap = 0;
  uint64_t bootstrap_seed = 1;
  CLI::App* fit = app.add_subcommand("fit", "Fit a model to a CSV data set");
  fit->add_option("--model", fit_model, "gate-error, envelope, power-law or dips")->required();
  fit->add_option("--in", fit_in, "Input CSV")->required();
  fit->add_option("--out", fit_out, "Report path (default: stdout)");
  fit->add_option("--prominence", prominence, "Dip prominence (absolute fidelity)");
  fit->add_option("--bootstrap", bootstrap, "Bootstrap resamples for standard errors");
  fit->add_option("--seed", bootstrap_seed, "Bootstrap seed");

  std::string dips_in, dips_out;
  double dips_prominence = 0.05;
  CLI::App* dips = app.add_subcommand("dips", "Alias of fit --model dips");
  dips->add_option("--in", dips_in, "Input CSV")->required();
  dips->add_option("--out", dips_out, "Report path (default: stdout)");
  dips->add_option("--prominence", dips_prominence, "Dip prominence (absolute fidelity)");

  std::string figure;
  GlobalOpts reproduce_opts;
  CLI::App* reproduce = app.add_subcommand("reproduce", "Write the data behind a figure");
  reproduce->add_option("figure", figure, "fig2a, fig2b, fig3a or fig3c")->required();
  reproduce->add_option("--out", reproduce_opts.out_path, "Output directory");
  reproduce->add_option("--seed", reproduce_opts.seed, "Master seed override");
  reproduce->add_option("--threads", reproduce_opts.threads, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(simulate_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (fit->parsed()) {
      return cmd_fit(fit_model, fit_in, fit_out, prominence, bootstrap, bootstrap_seed);
    }
    if (dips->parsed()) return cmd_fit("dips", dips_in, dips_out, dips_prominence, 0, 1);
    if (reproduce->parsed()) return cmd_reproduce(figure, reproduce_opts);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
