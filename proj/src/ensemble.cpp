#include "geoq/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "geoq/rng.hpp"

namespace geoq {

namespace detail {

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<size_t>(threads, count);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace detail

namespace {

// OU streams get their own sub-seed so the static draws are unchanged when
// the OU process is toggled.
constexpr uint64_t kOuStreamTag = 0x6F75;

// Two-pass mean / standard error over values extracted in fixed index order.
struct Accumulator {
  std::vector<double> values;

  void add(double x) { values.push_back(x); }
  double mean() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  double std_error() const {
    const size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

}  // namespace

EnsembleResult run_ensemble(const StateVector& initial, const DDSequence& seq,
                            const EnsembleSpec& spec, const Dissipator* dissipator,
                            const EnsembleOptions& options) {
  if (spec.sample_count < 1) {
    throw std::invalid_argument("run_ensemble: sample_count must be >= 1");
  }
  spec.noise.validate();

  const size_t n = static_cast<size_t>(spec.sample_count);
  const double duration = seq.total_time_us();
  std::vector<std::optional<SimulationResult>> results(n);

  detail::parallel_for(n, options.threads, [&](size_t i) {
    const uint64_t seed = derive_seed(spec.master_seed, i);
    BathRealization bath = sample_bath_realization(spec.noise, seed);
    if (spec.noise.has_ou()) {
      bath.ou = ou_trajectory(spec.noise, duration, options.ou_sample_dt_us,
                              derive_seed(seed, kOuStreamTag));
    }
    results[i] = propagate_sequence(initial, seq, bath, dissipator, options.dt);
  });

  // Fixed-index aggregation keeps the result bit-identical for any schedule.
  Accumulator p_plus, p_zero, p_minus, fidelity;
  Operator3 rho_sum = Operator3::Zero();
  for (size_t i = 0; i < n; ++i) {
    const SimulationResult& r = *results[i];
    p_plus.add(r.p_plus);
    p_zero.add(r.p_zero);
    p_minus.add(r.p_minus);
    fidelity.add(r.fidelity_vs_target);
    rho_sum += r.final_state.matrix();
  }

  const int count = spec.sample_count;
  EnsembleResult out(DensityOperator::sanitized(rho_sum / static_cast<double>(count), 1e-9));
  out.mean.p_plus = p_plus.mean(count);
  out.mean.p_zero = p_zero.mean(count);
  out.mean.p_minus = p_minus.mean(count);
  out.std_error.p_plus = p_plus.std_error(count);
  out.std_error.p_zero = p_zero.std_error(count);
  out.std_error.p_minus = p_minus.std_error(count);
  out.mean_fidelity = fidelity.mean(count);
  out.fidelity_std_error = fidelity.std_error(count);
  out.mean_coherence = 2.0 * std::abs(out.mean_state.matrix()(0, 2));
  out.total_time_us = duration;
  out.sample_count = count;
  return out;
}

SweepResult sweep_leakage_map(const std::vector<double>& splitting_grid_mhz,
                              const std::vector<double>& tau_grid_us,
                              const std::vector<int>& n_list, const DriveParams& drive,
                              EdgeConvention edge, GatePeriod period, int threads) {
  if (splitting_grid_mhz.empty() || tau_grid_us.empty() || n_list.empty()) {
    throw std::invalid_argument("sweep_leakage_map: empty grid");
  }
  drive.validate();

  SweepResult sweep;
  sweep.splitting_mhz = splitting_grid_mhz;
  sweep.tau_us = tau_grid_us;
  sweep.n_gates = n_list;
  sweep.p_plus.assign(splitting_grid_mhz.size() * tau_grid_us.size() * n_list.size(), 0.0);
  sweep.p_plus_std_error.assign(sweep.p_plus.size(), 0.0);

  const StateVector initial = StateVector::bright();
  detail::parallel_for(splitting_grid_mhz.size(), threads, [&](size_t i_split) {
    BathRealization bath;
    bath.splitting_mhz = splitting_grid_mhz[i_split];
    for (size_t i_tau = 0; i_tau < tau_grid_us.size(); ++i_tau) {
      for (size_t i_n = 0; i_n < n_list.size(); ++i_n) {
        const DDSequence seq =
            build_dd_sequence(n_list[i_n], tau_grid_us[i_tau], drive, edge, period);
        const SimulationResult r = propagate_sequence(initial, seq, bath);
        sweep.p_plus[sweep.index(i_split, i_tau, i_n)] = r.p_plus;
      }
    }
  });
  return sweep;
}

}  // namespace geoq
