#include "geoq/experiments.hpp"

#include <cmath>
#include <stdexcept>

namespace geoq {

namespace {

Dissipator make_dissipator(const NoiseModel& noise) {
  return build_dissipator(noise.t1_ms);
}

EnsembleResult run_point(const StateVector& initial, int n, double tau,
                         const ScanSettings& settings, const Dissipator& dissipator) {
  const DDSequence seq =
      build_dd_sequence(n, tau, settings.drive, settings.edge, settings.period);
  EnsembleSpec spec;
  spec.sample_count = settings.samples;
  spec.master_seed = settings.seed;
  spec.noise = settings.noise;
  EnsembleOptions options;
  options.dt = settings.dt;
  options.ou_sample_dt_us = settings.ou_sample_dt_us;
  options.threads = settings.threads;
  return run_ensemble(initial, seq, spec, dissipator.empty() ? nullptr : &dissipator, options);
}

}  // namespace

ScanSettings ScanSettings::from_config(const RunConfig& config, int threads) {
  ScanSettings s;
  s.drive = config.drive;
  s.noise = config.noise;
  s.samples = config.samples;
  s.seed = config.seed;
  s.edge = config.edge;
  s.period = config.gate_period;
  s.dt = config.dt;
  s.ou_sample_dt_us = config.ou_sample_dt_us;
  s.threads = threads;
  return s;
}

std::vector<ScanPoint> run_tau_scan(const std::vector<double>& taus_us,
                                    const std::vector<int>& n_list,
                                    const ScanSettings& settings) {
  if (taus_us.empty() || n_list.empty()) {
    throw std::invalid_argument("run_tau_scan: empty tau grid or gate-count list");
  }
  const Dissipator dissipator = make_dissipator(settings.noise);
  const StateVector initial = StateVector::bright();

  std::vector<ScanPoint> points;
  points.reserve(taus_us.size() * n_list.size());
  for (double tau : taus_us) {
    for (int n : n_list) {
      points.emplace_back(tau, n, run_point(initial, n, tau, settings, dissipator));
    }
  }
  return points;
}

FidelityVsN run_fidelity_vs_n(const std::vector<int>& n_list, double tau_us,
                              const ScanSettings& settings) {
  const Dissipator dissipator = make_dissipator(settings.noise);
  const StateVector initial = StateVector::bright();

  FidelityVsN out;
  for (int n : n_list) {
    const EnsembleResult r = run_point(initial, n, tau_us, settings, dissipator);
    out.n_gates.push_back(n);
    out.fidelity.push_back(r.mean_fidelity);
    out.std_error.push_back(r.fidelity_std_error);
  }
  return out;
}

CoherenceStudy run_coherence_study(const std::vector<int>& n_list,
                                   const ScanSettings& settings, int points_per_n) {
  if (points_per_n < 4) {
    throw std::invalid_argument("run_coherence_study: need at least 4 points per N");
  }
  const Dissipator dissipator = make_dissipator(settings.noise);
  const StateVector initial = StateVector::bright();
  const double t1_us = settings.noise.t1_ms * 1e3;

  // Resonance spacing for anti-resonant snapping of the gate interval.
  const double spacing =
      settings.drive.detuning_khz > 0.0 ? 1e3 / settings.drive.detuning_khz : 0.0;

  CoherenceStudy study;
  std::vector<double> n_fit, t2_pure_fit;

  for (int n : n_list) {
    // Expected decay scale: OU dephasing under N-gate decoupling combined
    // with relaxation; sets the sampling window only, not any assertion.
    double t_rough_us = std::isinf(t1_us) ? 0.0 : t1_us;
    if (settings.noise.has_ou()) {
      const double sigma = kTwoPi * settings.noise.ou_amplitude_mhz;
      const double t_dephase = std::cbrt(
          12.0 * n * n * settings.noise.ou_correlation_time_us / (sigma * sigma));
      t_rough_us = t_rough_us > 0.0
                       ? 1.0 / (1.0 / t_dephase + 1.0 / t_rough_us)
                       : t_dephase;
    }
    if (!(t_rough_us > 0.0)) {
      throw std::invalid_argument(
          "run_coherence_study: no decay channel enabled (need OU noise or finite t1)");
    }

    CoherenceStudy::PerGateCount per;
    per.n_gates = n;
    const double lo = 0.35, hi = 2.2;
    for (int k = 0; k < points_per_n; ++k) {
      const double factor =
          lo * std::pow(hi / lo, static_cast<double>(k) / (points_per_n - 1));
      double tau = t_rough_us * factor / n;
      if (spacing > 0.0) {
        // Snap to odd half-multiples of the resonance spacing.
        const double m = std::max(0.0, std::round(tau / spacing - 0.5));
        tau = (m + 0.5) * spacing;
      }
      const EnsembleResult r = run_point(initial, n, tau, settings, dissipator);
      per.total_time_ms.push_back(r.total_time_us * 1e-3);
      per.amplitude.push_back(std::min(r.mean_coherence, 1.05));
    }

    per.envelope = fit_coherence_envelope(per.total_time_ms, per.amplitude);
    per.t2_ms = {per.envelope.parameters.at("t2_ms"), per.envelope.standard_errors.at("t2_ms")};
    per.p = per.envelope.parameters.at("p");
    if (std::isinf(settings.noise.t1_ms)) {
      per.t2_pure_ms = per.t2_ms;
    } else {
      per.t2_pure_ms = pure_coherence_time(per.t2_ms, {settings.noise.t1_ms, 0.0});
    }
    n_fit.push_back(n);
    t2_pure_fit.push_back(per.t2_pure_ms.value);
    study.per_n.push_back(std::move(per));
  }

  study.scaling = fit_power_law(n_fit, t2_pure_fit);
  return study;
}

}  // namespace geoq
