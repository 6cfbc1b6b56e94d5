#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "geoq/qutrit.hpp"

// Rotating-frame Hamiltonian of the driven spin-1 system, the classical
// noise ensemble (13C Gaussian broadening, 14N hyperfine lines, detuning
// jitter, optional time-correlated splitting noise) and the T1 dissipator.

namespace geoq {

struct DriveParams {
  double rabi_mhz = 25.0;           // Omega / 2*pi
  double detuning_khz = 0.0;        // Delta / 2*pi
  double phase_rad = 0.0;           // drive phase, selects the rotation axis
  double pulse_length_error = 0.0;  // fractional error on the gate duration

  // rabi_mhz > 0 and |pulse_length_error| < 0.5; throws otherwise.
  void validate() const;
};

inline constexpr double kInfiniteT1 = std::numeric_limits<double>::infinity();

struct NoiseModel {
  double c13_width_1e_mhz = 0.0;   // full width at 1/e of the splitting distribution
  double n14_splitting_mhz = 0.0;  // discrete lines at -A, 0, +A, weight 1/3 each
  double t1_ms = kInfiniteT1;
  double ou_amplitude_mhz = 0.0;   // stationary std-dev; 0 disables the OU process
  double ou_correlation_time_us = 0.0;
  double detuning_jitter_khz = 0.0;  // per-run detuning offset (temperature proxy)

  void validate() const;
  bool has_ou() const { return ou_amplitude_mhz > 0.0 && ou_correlation_time_us > 0.0; }
};

// Sampled splitting-noise path, piecewise constant on a uniform grid.
struct OuTrajectory {
  double dt_us = 0.0;
  std::vector<double> values_mhz;

  double value_at(double t_us) const {
    if (values_mhz.empty()) return 0.0;
    auto idx = static_cast<size_t>(t_us / dt_us);
    if (idx >= values_mhz.size()) idx = values_mhz.size() - 1;
    return values_mhz[idx];
  }
};

// One static draw of the classical environment.
struct BathRealization {
  double splitting_mhz = 0.0;      // static |+1> <-> |-1> splitting, our delta
  double detuning_offset_khz = 0.0;
  std::optional<OuTrajectory> ou;

  double splitting_at(double t_us) const {
    return splitting_mhz + (ou ? ou->value_at(t_us) : 0.0);
  }
};

struct Dissipator {
  struct Jump {
    Operator3 op;
    double rate_per_ms = 0.0;
  };
  std::vector<Jump> jumps;

  bool empty() const { return jumps.empty(); }
};

// H = -Delta (P_{+1} + P_{-1}) + (omega_delta/2)(P_{+1} - P_{-1})
//     + drive_on * (Omega/2) S_phi,   in rad/us,
// with S_phi = cos(phi) S_x + sin(phi) S_y.  The detuning raises |0>
// relative to the qubit levels; observable dip positions depend only on
// |Delta|.
Operator3 rotating_hamiltonian(const DriveParams& drive, double splitting_mhz,
                               bool drive_on);

// splitting = gaussian(0, w / (2*sqrt(2))) + one of {-A, 0, +A};
// detuning_offset = gaussian(0, jitter).  Deterministic given the seed.
// The OU path is not attached here; see ou_trajectory.
BathRealization sample_bath_realization(const NoiseModel& noise, uint64_t seed);

// Stationary Ornstein-Uhlenbeck path with std-dev ou_amplitude_mhz and
// correlation time ou_correlation_time_us, exact discrete update
//   x' = x e^{-dt/tau_c} + gaussian(0, a * sqrt(1 - e^{-2 dt/tau_c})).
OuTrajectory ou_trajectory(const NoiseModel& noise, double duration_us,
                           double dt_us, uint64_t seed);

// Jump operators {|0><+1|, |+1><0|, |0><-1|, |-1><0|}, each at rate 1/t1.
// With this calibration the qubit-space coherence <+1|rho|-1> relaxes with
// time constant t1, which is what bounds the observed coherence time; the
// population difference between the qubit manifold and |0> then decays with
// time constant t1/3, and I/3 is stationary.  t1 = infinity gives an empty
// dissipator.
Dissipator build_dissipator(double t1_ms);

// Resonant gate intervals tau = n / f_Delta, n = 1..n_max, in us.
std::vector<double> resonance_taus(double detuning_khz, int n_max);

}  // namespace geoq
