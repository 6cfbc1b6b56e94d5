#include "geoq/spin_model.hpp"

#include <cmath>
#include <stdexcept>

#include "geoq/rng.hpp"

namespace geoq {

void DriveParams::validate() const {
  if (!(rabi_mhz > 0.0)) {
    throw std::invalid_argument("DriveParams: rabi_mhz must be > 0");
  }
  if (!(std::abs(pulse_length_error) < 0.5)) {
    throw std::invalid_argument("DriveParams: |pulse_length_error| must be < 0.5");
  }
}

void NoiseModel::validate() const {
  if (c13_width_1e_mhz < 0.0 || n14_splitting_mhz < 0.0 ||
      ou_amplitude_mhz < 0.0 || ou_correlation_time_us < 0.0 ||
      detuning_jitter_khz < 0.0) {
    throw std::invalid_argument("NoiseModel: widths and times must be >= 0");
  }
  if (!(t1_ms > 0.0)) {
    throw std::invalid_argument("NoiseModel: t1_ms must be > 0 or infinite");
  }
}

Operator3 rotating_hamiltonian(const DriveParams& drive, double splitting_mhz,
                               bool drive_on) {
  drive.validate();
  const double delta_ang = kTwoPi * drive.detuning_khz * 1e-3;  // rad/us
  const double split_ang = kTwoPi * splitting_mhz;              // rad/us

  Operator3 h = Operator3::Zero();
  h(0, 0) = -delta_ang + 0.5 * split_ang;
  h(2, 2) = -delta_ang - 0.5 * split_ang;
  if (drive_on) {
    const double omega = kTwoPi * drive.rabi_mhz;
    h += 0.5 * omega *
         (std::cos(drive.phase_rad) * spin_operator(Axis::X) +
          std::sin(drive.phase_rad) * spin_operator(Axis::Y));
  }
  return h;
}

BathRealization sample_bath_realization(const NoiseModel& noise, uint64_t seed) {
  noise.validate();
  Rng rng(seed);
  // Fixed draw order keeps the stream layout independent of which noise
  // terms are enabled.
  const double g_split = rng.gaussian();
  const double u_line = rng.uniform();
  const double g_detuning = rng.gaussian();

  const double sigma = noise.c13_width_1e_mhz / (2.0 * std::sqrt(2.0));
  const int line = std::min(2, static_cast<int>(u_line * 3.0));
  static const double kLineSign[3] = {-1.0, 0.0, 1.0};

  BathRealization bath;
  bath.splitting_mhz = sigma * g_split + kLineSign[line] * noise.n14_splitting_mhz;
  bath.detuning_offset_khz = noise.detuning_jitter_khz * g_detuning;
  return bath;
}

OuTrajectory ou_trajectory(const NoiseModel& noise, double duration_us,
                           double dt_us, uint64_t seed) {
  if (!(dt_us > 0.0)) {
    throw std::invalid_argument("ou_trajectory: dt must be > 0");
  }
  if (noise.ou_amplitude_mhz == 0.0) {
    // Disabled process: identically zero path.
    OuTrajectory path;
    path.dt_us = dt_us;
    path.values_mhz.assign(static_cast<size_t>(std::ceil(duration_us / dt_us)) + 1, 0.0);
    return path;
  }
  if (!(noise.ou_amplitude_mhz > 0.0) || !(noise.ou_correlation_time_us > 0.0)) {
    throw std::invalid_argument("ou_trajectory: OU amplitude and correlation time must be > 0");
  }
  const double a = noise.ou_amplitude_mhz;
  const double decay = std::exp(-dt_us / noise.ou_correlation_time_us);
  const double kick = a * std::sqrt(-std::expm1(-2.0 * dt_us / noise.ou_correlation_time_us));

  const auto steps = static_cast<size_t>(std::ceil(duration_us / dt_us)) + 1;
  OuTrajectory path;
  path.dt_us = dt_us;
  path.values_mhz.resize(steps);

  Rng rng(seed);
  double x = a * rng.gaussian();  // stationary initial sample
  path.values_mhz[0] = x;
  for (size_t i = 1; i < steps; ++i) {
    x = x * decay + kick * rng.gaussian();
    path.values_mhz[i] = x;
  }
  return path;
}

Dissipator build_dissipator(double t1_ms) {
  if (!(t1_ms > 0.0)) {
    throw std::invalid_argument("build_dissipator: t1 must be > 0");
  }
  Dissipator d;
  if (std::isinf(t1_ms)) return d;

  const double rate = 1.0 / t1_ms;
  const int pairs[4][2] = {{1, 0}, {0, 1}, {1, 2}, {2, 1}};  // (to, from)
  for (const auto& p : pairs) {
    Operator3 op = Operator3::Zero();
    op(p[0], p[1]) = 1.0;
    d.jumps.push_back({op, rate});
  }
  return d;
}

std::vector<double> resonance_taus(double detuning_khz, int n_max) {
  if (!(detuning_khz > 0.0)) {
    throw std::invalid_argument("resonance_taus: detuning must be > 0 (no resonance structure)");
  }
  if (n_max < 1) {
    throw std::invalid_argument("resonance_taus: n_max must be >= 1");
  }
  const double f_mhz = detuning_khz * 1e-3;
  std::vector<double> taus(n_max);
  for (int n = 1; n <= n_max; ++n) {
    taus[n - 1] = static_cast<double>(n) / f_mhz;
  }
  return taus;
}

}  // namespace geoq
