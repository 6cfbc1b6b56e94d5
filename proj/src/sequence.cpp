#include "geoq/sequence.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

namespace geoq {

double DDSequence::total_time_us() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration_us;
  return t;
}

double gate_duration(const DriveParams& drive, GatePeriod period) {
  drive.validate();
  const double omega = kTwoPi * drive.rabi_mhz;
  const double delta = kTwoPi * drive.detuning_khz * 1e-3;
  const double base = (period == GatePeriod::kGeneralized)
                          ? kTwoPi / std::sqrt(omega * omega + delta * delta)
                          : kTwoPi / omega;
  return (1.0 + drive.pulse_length_error) * base;
}

Operator3 geometric_flip_unitary(const DriveParams& drive, double splitting_mhz,
                                 GatePeriod period) {
  return propagator(rotating_hamiltonian(drive, splitting_mhz, true),
                    gate_duration(drive, period));
}

Operator3 ideal_flip_operator() {
  Operator3 u = Operator3::Zero();
  u(0, 2) = -1.0;
  u(1, 1) = -1.0;
  u(2, 0) = -1.0;
  return u;
}

DDSequence build_dd_sequence(int n, double tau_us, const DriveParams& drive,
                             EdgeConvention edge, GatePeriod period) {
  if (n < 1) throw std::invalid_argument("build_dd_sequence: gate count must be >= 1");
  if (tau_us < 0.0) throw std::invalid_argument("build_dd_sequence: tau must be >= 0");
  drive.validate();

  DDSequence seq;
  seq.gate_count = n;
  seq.interval_us = tau_us;
  seq.edge = edge;
  seq.period = period;
  seq.drive = drive;
  seq.gate_duration_us = gate_duration(drive, period);

  auto push = [&seq](double duration, bool on) {
    if (duration > 0.0) seq.segments.push_back({duration, on});
  };

  const PulseSegment gate{seq.gate_duration_us, true};
  if (edge == EdgeConvention::kHalfInterval) {
    push(0.5 * tau_us, false);
    for (int k = 0; k < n; ++k) {
      seq.segments.push_back(gate);
      if (k + 1 < n) push(tau_us, false);
    }
    push(0.5 * tau_us, false);
  } else {
    for (int k = 0; k < n; ++k) {
      seq.segments.push_back(gate);
      push(tau_us, false);
    }
  }
  return seq;
}

namespace {

struct BasisJump {
  int to = 0;
  int from = 0;
  double rate_per_us = 0.0;
};

// Jump operators of the form |a><b| admit an exact closed-form map; anything
// else goes through the integrator.
std::optional<std::vector<BasisJump>> classify_basis_jumps(const Dissipator& d) {
  std::vector<BasisJump> out;
  for (const auto& jump : d.jumps) {
    int to = -1, from = -1;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (std::abs(jump.op(i, j)) > 0.0) {
          if (to >= 0 || std::abs(jump.op(i, j) - Complex(1.0, 0.0)) > 1e-14 || i == j) {
            return std::nullopt;
          }
          to = i;
          from = j;
        }
      }
    }
    if (to < 0) continue;  // zero operator
    if (jump.rate_per_ms > 0.0) out.push_back({to, from, jump.rate_per_ms * 1e-3});
  }
  return out;
}

struct LindbladTerms {
  std::vector<std::pair<Operator3, double>> jumps;  // (L, gamma) with gamma in 1/us
  Operator3 anticomm = Operator3::Zero();           // sum gamma L^dag L
};

LindbladTerms prepare_terms(const Dissipator* dissipator) {
  LindbladTerms terms;
  if (dissipator == nullptr) return terms;
  for (const auto& jump : dissipator->jumps) {
    if (jump.rate_per_ms < 0.0) {
      throw std::invalid_argument("Dissipator: negative jump rate");
    }
    const double rate_per_us = jump.rate_per_ms * 1e-3;
    if (rate_per_us == 0.0) continue;
    terms.jumps.emplace_back(jump.op, rate_per_us);
    terms.anticomm += rate_per_us * (jump.op.adjoint() * jump.op);
  }
  return terms;
}

template <typename Rhs>
void rk4_steps(Operator3& rho, const Rhs& rhs, double duration, double dt_max) {
  const int n = std::max(1, static_cast<int>(std::ceil(duration / dt_max)));
  const double h_step = duration / n;
  for (int i = 0; i < n; ++i) {
    const Operator3 k1 = rhs(rho);
    const Operator3 k2 = rhs(Operator3(rho + 0.5 * h_step * k1));
    const Operator3 k3 = rhs(Operator3(rho + 0.5 * h_step * k2));
    const Operator3 k4 = rhs(Operator3(rho + h_step * k3));
    rho += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

// Propagates one interval of constant Hamiltonian, picking the cheapest
// exact route available.
class ChunkStepper {
 public:
  ChunkStepper(const Dissipator* dissipator, const StepSizes& dt)
      : terms_(prepare_terms(dissipator)),
        basis_jumps_(dissipator ? classify_basis_jumps(*dissipator)
                                : std::optional<std::vector<BasisJump>>(std::vector<BasisJump>{})),
        dt_(dt) {
    if (basis_jumps_) {
      for (const auto& j : *basis_jumps_) {
        out_rate_(j.from) += j.rate_per_us;
        pop_gen_(j.to, j.from) += j.rate_per_us;
        pop_gen_(j.from, j.from) -= j.rate_per_us;
      }
    }
  }

  void advance(Operator3& rho, const Operator3& h, bool drive_on, double duration) {
    if (duration <= 0.0) return;
    if (!drive_on && (terms_.jumps.empty() || basis_jumps_)) {
      // The drive-off Hamiltonian is diagonal: exact map.
      exact_free_map(rho, h, duration);
      return;
    }
    if (terms_.jumps.empty()) {
      // Purely unitary interval, exact regardless of length.
      const Operator3 u = propagator(h, duration);
      rho = u * rho * u.adjoint();
      return;
    }
    const double dt_max = drive_on ? dt_.drive_on_dt_us : dt_.drive_off_dt_us;
    if (basis_jumps_) {
      // Elementwise dissipator for |a><b| jumps.
      rk4_steps(rho,
                [&](const Operator3& r) {
                  Operator3 out = Complex(0.0, -1.0) * (h * r - r * h);
                  for (const auto& j : *basis_jumps_) {
                    out(j.to, j.to) += j.rate_per_us * r(j.from, j.from);
                  }
                  for (int i = 0; i < 3; ++i) {
                    for (int k = 0; k < 3; ++k) {
                      out(i, k) -= 0.5 * (out_rate_(i) + out_rate_(k)) * r(i, k);
                    }
                  }
                  return out;
                },
                duration, dt_max);
      return;
    }
    rk4_steps(rho,
              [&](const Operator3& r) {
                Operator3 out = Complex(0.0, -1.0) * (h * r - r * h);
                for (const auto& [op, rate] : terms_.jumps) {
                  out += rate * (op * r * op.adjoint());
                }
                out -= 0.5 * (terms_.anticomm * r + r * terms_.anticomm);
                return out;
              },
              duration, dt_max);
  }

 private:
  // Drive-off map: the free Hamiltonian is diagonal, so for basis jumps the
  // unitary phases, the coherence damping and the classical population
  // exchange act elementwise and commute; the map is exact.
  void exact_free_map(Operator3& rho, const Operator3& h_diag, double duration) {
    Eigen::Vector3d pops(rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real());
    pops = population_map(duration) * pops;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i == j) {
          rho(i, i) = pops(i);
        } else {
          const double phase = -(h_diag(i, i).real() - h_diag(j, j).real()) * duration;
          const double damp = -0.5 * (out_rate_(i) + out_rate_(j)) * duration;
          rho(i, j) *= std::exp(Complex(damp, phase));
        }
      }
    }
  }

  const Eigen::Matrix3d& population_map(double duration) {
    for (const auto& [t, m] : pop_map_cache_) {
      if (t == duration) return m;
    }
    pop_map_cache_.emplace_back(duration, (pop_gen_ * duration).exp());
    return pop_map_cache_.back().second;
  }

  LindbladTerms terms_;
  std::optional<std::vector<BasisJump>> basis_jumps_;
  StepSizes dt_;
  Eigen::Vector3d out_rate_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d pop_gen_ = Eigen::Matrix3d::Zero();
  std::vector<std::pair<double, Eigen::Matrix3d>> pop_map_cache_;
};

DriveParams effective_drive(const DriveParams& nominal, const BathRealization& bath) {
  DriveParams d = nominal;
  d.detuning_khz += bath.detuning_offset_khz;
  return d;
}

DensityOperator target_state(const DensityOperator& initial, int n_gates) {
  Operator3 flip_n = Operator3::Identity();
  const Operator3 flip = ideal_flip_operator();
  for (int i = 0; i < n_gates; ++i) flip_n = flip * flip_n;
  return DensityOperator::sanitized(flip_n * initial.matrix() * flip_n.adjoint(), 1e-9);
}

SimulationResult package(Operator3 rho, const DDSequence& seq, const DensityOperator& target,
                         double trace_drift, double herm_drift, double norm_drift) {
  SimulationResult result(DensityOperator::sanitized(rho, 1e-5));
  const Populations p = populations(result.final_state);
  result.p_plus = p.p_plus;
  result.p_zero = p.p_zero;
  result.p_minus = p.p_minus;
  result.fidelity_vs_target = state_fidelity(result.final_state, target);
  result.qubit_coherence = 2.0 * std::abs(result.final_state.matrix()(0, 2));
  result.total_time_us = seq.total_time_us();
  result.trace_drift = trace_drift;
  result.hermiticity_drift = herm_drift;
  result.norm_drift = norm_drift;
  return result;
}

SimulationResult propagate_unitary(const Operator3& rho0, const DDSequence& seq,
                                   const BathRealization& bath, const DensityOperator& target) {
  const DriveParams drive = effective_drive(seq.drive, bath);

  // Distinct (duration, drive_on) pairs share one propagator.
  std::vector<std::pair<PulseSegment, Operator3>> cache;
  auto segment_propagator = [&](const PulseSegment& seg) -> const Operator3& {
    for (const auto& [key, u] : cache) {
      if (key.drive_on == seg.drive_on && key.duration_us == seg.duration_us) return u;
    }
    const Operator3 h = rotating_hamiltonian(drive, bath.splitting_mhz, seg.drive_on);
    cache.emplace_back(seg, propagator(h, seg.duration_us));
    return cache.back().second;
  };

  Operator3 u_total = Operator3::Identity();
  for (const auto& seg : seq.segments) {
    u_total = segment_propagator(seg) * u_total;
  }

  Operator3 rho = u_total * rho0 * u_total.adjoint();
  const double norm_drift = std::abs(std::sqrt(std::abs(rho.trace())) - 1.0);
  return package(std::move(rho), seq, target, 0.0, 0.0, norm_drift);
}

SimulationResult propagate_lindblad(const Operator3& rho0, const DDSequence& seq,
                                    const BathRealization& bath, const Dissipator* dissipator,
                                    const StepSizes& dt, const DensityOperator& target) {
  if (!(dt.drive_on_dt_us > 0.0) || !(dt.drive_off_dt_us > 0.0)) {
    throw std::invalid_argument("propagate_sequence: step sizes must be > 0");
  }
  const DriveParams drive = effective_drive(seq.drive, bath);
  ChunkStepper stepper(dissipator, dt);

  Operator3 rho = rho0;
  double t_abs = 0.0;
  double trace_drift = 0.0;
  double herm_drift = 0.0;

  auto note_drift = [&]() {
    trace_drift = std::max(trace_drift, std::abs(rho.trace() - Complex(1.0, 0.0)));
    herm_drift = std::max(herm_drift, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (trace_drift > 1e-6) {
      throw std::runtime_error("propagate_sequence: trace drift above 1e-6, reduce the step size");
    }
  };

  for (const auto& seg : seq.segments) {
    if (seg.duration_us <= 0.0) continue;

    if (!bath.ou) {
      const Operator3 h = rotating_hamiltonian(drive, bath.splitting_mhz, seg.drive_on);
      stepper.advance(rho, h, seg.drive_on, seg.duration_us);
    } else {
      // Chunk the segment at the OU sampling boundaries so every chunk sees
      // one piecewise-constant splitting value.
      const double ou_dt = bath.ou->dt_us;
      double t = t_abs;
      const double t_end = t_abs + seg.duration_us;
      while (t < t_end - 1e-12) {
        const double boundary = (std::floor(t / ou_dt + 1e-9) + 1.0) * ou_dt;
        const double chunk_end = std::min(t_end, boundary);
        if (chunk_end - t > 1e-12) {
          const Operator3 h = rotating_hamiltonian(drive, bath.splitting_at(t), seg.drive_on);
          stepper.advance(rho, h, seg.drive_on, chunk_end - t);
        }
        t = chunk_end;
      }
    }
    t_abs += seg.duration_us;
    note_drift();
  }

  return package(std::move(rho), seq, target, trace_drift, herm_drift, 0.0);
}

}  // namespace

SimulationResult propagate_sequence(const StateVector& initial, const DDSequence& seq,
                                    const BathRealization& bath, const Dissipator* dissipator,
                                    const StepSizes& dt) {
  return propagate_sequence(DensityOperator::pure(initial), seq, bath, dissipator, dt);
}

SimulationResult propagate_sequence(const DensityOperator& initial, const DDSequence& seq,
                                    const BathRealization& bath, const Dissipator* dissipator,
                                    const StepSizes& dt) {
  const DensityOperator target = target_state(initial, seq.gate_count);
  const bool lindblad = (dissipator != nullptr && !dissipator->empty()) || bath.ou.has_value();
  if (!lindblad) {
    return propagate_unitary(initial.matrix(), seq, bath, target);
  }
  return propagate_lindblad(initial.matrix(), seq, bath, dissipator, dt, target);
}

}  // namespace geoq
