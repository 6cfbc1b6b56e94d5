#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Curve fitting and derived quantities: gate-error decomposition, coherence
// envelopes, the T2/T1 relation, power-law scaling and dip detection.

namespace geoq {

struct FitResult {
  std::map<std::string, double> parameters;
  std::map<std::string, double> standard_errors;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct FitOptions {
  // When > 0, standard errors come from residual-resampling bootstrap
  // instead of the residual-scaled covariance.
  int bootstrap_resamples = 0;
  uint64_t bootstrap_seed = 1;
};

// F(N) = (1 - epsilon0) (1 - epsilon_gate)^N, parameters "epsilon0" and
// "epsilon_gate".  Requires >= 3 points with fidelities in [0, 1].
FitResult fit_gate_error(const std::vector<double>& n_values,
                         const std::vector<double>& fidelities,
                         const FitOptions& options = {});

// A(t) = plateau * exp(-(t/T2)^p) with p constrained to [1, 4]; parameters
// "t2_ms", "p" and "plateau" (the fitted fidelity plateau that normalizes
// the amplitudes).  Requires >= 4 points, times > 0, amplitudes in
// [0, 1.05] and not all zero.
FitResult fit_coherence_envelope(const std::vector<double>& times_ms,
                                 const std::vector<double>& amplitudes,
                                 const FitOptions& options = {});

// 1/T2 = 1/T2_pure + 1/T1 solved for T2_pure.  Throws std::domain_error
// when t2 >= t1: the observed coherence time is limited by t1.
double pure_coherence_time(double t2_ms, double t1_ms);

struct ValueWithError {
  double value = 0.0;
  double std_error = 0.0;
};

// First-order propagation of the input standard errors.
ValueWithError pure_coherence_time(const ValueWithError& t2_ms, const ValueWithError& t1_ms);

// T(N) = prefactor * N^exponent via linear regression in log-log space;
// parameters "exponent" and "prefactor".  Requires >= 3 positive points.
FitResult fit_power_law(const std::vector<double>& n_values,
                        const std::vector<double>& t_values,
                        const FitOptions& options = {});

struct DipReport {
  std::vector<double> dip_positions_us;  // strictly increasing
  std::vector<double> dip_widths_us;     // full width at half prominence
  double mean_spacing_us = 0.0;
  std::optional<double> estimated_detuning_khz;  // 1e3 / mean spacing

  bool empty() const { return dip_positions_us.empty(); }
};

// Local minima lying below (rolling median - prominence), with parabolic
// position refinement.  A single dip is treated as the n = 1 resonance, so
// its position doubles as the spacing.  Requires >= 5 strictly increasing
// tau values.
DipReport find_dips(const std::vector<double>& taus_us,
                    const std::vector<double>& fidelities, double prominence = 0.05);

}  // namespace geoq
