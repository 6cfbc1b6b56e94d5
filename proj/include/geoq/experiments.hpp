#pragma once

#include <optional>
#include <vector>

#include "geoq/analysis.hpp"
#include "geoq/config.hpp"
#include "geoq/ensemble.hpp"

// Orchestration shared by the CLI and the acceptance suite: tau scans,
// leakage sweeps, fidelity-vs-N runs and the coherence-time study.

namespace geoq {

struct ScanSettings {
  DriveParams drive;
  NoiseModel noise;
  int samples = 1;
  uint64_t seed = 0;
  EdgeConvention edge = EdgeConvention::kHalfInterval;
  GatePeriod period = GatePeriod::kGeneralized;
  StepSizes dt;
  double ou_sample_dt_us = 0.5;
  int threads = 1;

  static ScanSettings from_config(const RunConfig& config, int threads);
};

struct ScanPoint {
  double tau_us = 0.0;
  int n_gates = 0;
  EnsembleResult result;

  ScanPoint(double tau, int n, EnsembleResult r)
      : tau_us(tau), n_gates(n), result(std::move(r)) {}
};

// Ensemble-averaged decoupling from |+> over every (tau, N) combination,
// tau-major then N.
std::vector<ScanPoint> run_tau_scan(const std::vector<double>& taus_us,
                                    const std::vector<int>& n_list,
                                    const ScanSettings& settings);

struct FidelityVsN {
  std::vector<int> n_gates;
  std::vector<double> fidelity;
  std::vector<double> std_error;
};

FidelityVsN run_fidelity_vs_n(const std::vector<int>& n_list, double tau_us,
                              const ScanSettings& settings);

struct CoherenceStudy {
  struct PerGateCount {
    int n_gates = 0;
    std::vector<double> total_time_ms;
    std::vector<double> amplitude;  // qubit coherence of the averaged state
    FitResult envelope;
    ValueWithError t2_ms;
    double p = 0.0;
    ValueWithError t2_pure_ms;
  };
  std::vector<PerGateCount> per_n;
  FitResult scaling;  // power law of t2_pure vs N
};

// Coherence decay vs total time for each N: gate intervals snap to
// anti-resonant values (odd half-multiples of the resonance spacing) and the
// time window scales with the expected decay for that N.  t2_pure comes from
// the T2/T1 relation using settings.noise.t1_ms.
CoherenceStudy run_coherence_study(const std::vector<int>& n_list,
                                   const ScanSettings& settings, int points_per_n = 6);

}  // namespace geoq
