#pragma once

#include <vector>

#include "geoq/qutrit.hpp"
#include "geoq/spin_model.hpp"

// Geometric bit-flip gate and the N-gate decoupling sequence, with a
// unitary propagation path for pure states and a Lindblad path for density
// operators.

namespace geoq {

enum class EdgeConvention { kHalfInterval, kFullInterval };

// Duration of the cyclic rotation: the generalized Rabi period
// 2*pi/sqrt(Omega^2 + Delta^2) keeps the operational-space rotation cyclic
// under detuning; kBare uses plain 2*pi/Omega for sensitivity studies.
enum class GatePeriod { kGeneralized, kBare };

struct PulseSegment {
  double duration_us = 0.0;
  bool drive_on = false;
};

struct DDSequence {
  int gate_count = 1;
  double interval_us = 0.0;  // tau
  EdgeConvention edge = EdgeConvention::kHalfInterval;
  GatePeriod period = GatePeriod::kGeneralized;
  DriveParams drive;
  double gate_duration_us = 0.0;
  std::vector<PulseSegment> segments;

  double total_time_us() const;
};

// Gate duration (1 + pulse_length_error) * period for the chosen convention.
double gate_duration(const DriveParams& drive, GatePeriod period = GatePeriod::kGeneralized);

// Propagator of the full rotating-frame Hamiltonian (drive on) over one
// gate duration.  With ideal parameters it acts as -1 on {|0>, |+>} and +1
// on the dark state: a bit flip in the qubit space.
Operator3 geometric_flip_unitary(const DriveParams& drive, double splitting_mhz,
                                 GatePeriod period = GatePeriod::kGeneralized);

// The error-free flip: -1 on |0> and a sign-flipped exchange of |+1>, |-1>.
Operator3 ideal_flip_operator();

// Half-interval edges: [tau/2, gate, tau, gate, ..., gate, tau/2];
// full-interval edges: [gate, tau] * N.  Zero-duration segments are omitted.
DDSequence build_dd_sequence(int n, double tau_us, const DriveParams& drive,
                             EdgeConvention edge = EdgeConvention::kHalfInterval,
                             GatePeriod period = GatePeriod::kGeneralized);

// Integrator step sizes for the Lindblad path.  Drive-on segments need to
// resolve the Rabi oscillation; drive-off segments only the splitting and
// detuning scales.
struct StepSizes {
  double drive_on_dt_us = 5e-4;
  double drive_off_dt_us = 1e-2;
};

struct SimulationResult {
  DensityOperator final_state;
  double p_plus = 0.0;
  double p_zero = 0.0;
  double p_minus = 0.0;
  double fidelity_vs_target = 0.0;
  double qubit_coherence = 0.0;  // 2 |<+1| rho |-1>|
  double total_time_us = 0.0;
  double norm_drift = 0.0;         // unitary path: | ||psi|| - 1 |
  double trace_drift = 0.0;        // Lindblad path: max |Tr rho - 1|
  double hermiticity_drift = 0.0;  // Lindblad path: max ||rho - rho^dag||

  explicit SimulationResult(DensityOperator state) : final_state(std::move(state)) {}
};

// Pure-state entry: exact segment propagators unless a dissipator or an OU
// trajectory forces the density-operator path.
SimulationResult propagate_sequence(const StateVector& initial, const DDSequence& seq,
                                    const BathRealization& bath,
                                    const Dissipator* dissipator = nullptr,
                                    const StepSizes& dt = {});

// Density-operator entry.  The Lindblad path integrates
//   drho/dt = -i[H, rho] + sum_k gamma_k (L rho L^dag - {L^dag L, rho}/2)
// with a fixed-step classical RK4 integrator whenever the drive is on or
// the splitting is time dependent, refreshing H from the OU trajectory at
// each step; drive-off segments with a static Hamiltonian use the exact
// closed-form map (the free Hamiltonian is diagonal, so phase rotation,
// coherence damping and population exchange commute).  Throws
// std::runtime_error if the trace drifts by more than 1e-6.
SimulationResult propagate_sequence(const DensityOperator& initial, const DDSequence& seq,
                                    const BathRealization& bath,
                                    const Dissipator* dissipator = nullptr,
                                    const StepSizes& dt = {});

}  // namespace geoq
