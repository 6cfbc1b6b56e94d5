#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "geoq/sequence.hpp"

// Monte Carlo averaging over bath realizations and the deterministic
// leakage maps on a splitting grid.

namespace geoq {

struct EnsembleSpec {
  int sample_count = 1;
  uint64_t master_seed = 0;
  NoiseModel noise;
};

struct EnsembleOptions {
  StepSizes dt;
  double ou_sample_dt_us = 0.5;  // OU path sampling grid, independent of dt
  int threads = 1;
};

struct EnsembleResult {
  Populations mean;
  Populations std_error;
  double mean_fidelity = 0.0;
  double fidelity_std_error = 0.0;
  // Qubit coherence 2 |<+1| rho_mean |-1>| of the ensemble-averaged state.
  double mean_coherence = 0.0;
  DensityOperator mean_state;
  double total_time_us = 0.0;
  int sample_count = 0;

  explicit EnsembleResult(DensityOperator state) : mean_state(std::move(state)) {}
};

// Realization i draws its bath from a seed derived deterministically from
// (master_seed, i); aggregation runs in fixed index order, so the result is
// independent of the execution schedule.
EnsembleResult run_ensemble(const StateVector& initial, const DDSequence& seq,
                            const EnsembleSpec& spec, const Dissipator* dissipator = nullptr,
                            const EnsembleOptions& options = {});

struct SweepResult {
  std::vector<double> splitting_mhz;
  std::vector<double> tau_us;
  std::vector<int> n_gates;
  // Splitting-major, then tau, then N.
  std::vector<double> p_plus;
  std::vector<double> p_plus_std_error;

  size_t index(size_t i_split, size_t i_tau, size_t i_n) const {
    return (i_split * tau_us.size() + i_tau) * n_gates.size() + i_n;
  }
};

// Deterministic per-point map of the |+> population after decoupling: the
// splitting axis is the bath variable, so no Monte Carlo is involved and the
// standard errors are zero.
SweepResult sweep_leakage_map(const std::vector<double>& splitting_grid_mhz,
                              const std::vector<double>& tau_grid_us,
                              const std::vector<int>& n_list, const DriveParams& drive,
                              EdgeConvention edge = EdgeConvention::kHalfInterval,
                              GatePeriod period = GatePeriod::kGeneralized, int threads = 1);

namespace detail {
// Deterministic parallel map: fn(i) for i in [0, count), results written to
// index i regardless of scheduling.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn);
}  // namespace detail

}  // namespace geoq
