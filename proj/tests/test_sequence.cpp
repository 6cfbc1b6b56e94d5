#include <cmath>
#include <vector>

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "geoq/analysis.hpp"
#include "geoq/sequence.hpp"

using namespace geoq;

namespace {
const DriveParams kIdeal{25.0, 0.0, 0.0, 0.0};
const BathRealization kCleanBath;
}  // namespace

TEST_CASE("gate duration conventions") {
  CHECK(gate_duration(kIdeal) == doctest::Approx(0.040).epsilon(1e-12));

  DriveParams stretched = kIdeal;
  stretched.pulse_length_error = 0.01;
  CHECK(gate_duration(stretched) == doctest::Approx(0.0404).epsilon(1e-12));

  DriveParams detuned{25.0, 130.0, 0.0, 0.0};
  const double omega = kTwoPi * 25.0, delta = kTwoPi * 0.13;
  CHECK(gate_duration(detuned, GatePeriod::kGeneralized) ==
        doctest::Approx(kTwoPi / std::sqrt(omega * omega + delta * delta)).epsilon(1e-12));
  CHECK(gate_duration(detuned, GatePeriod::kBare) == doctest::Approx(0.040).epsilon(1e-12));
}

TEST_CASE("ideal geometric flip is a bit flip in the qubit space") {
  const Operator3 u = geometric_flip_unitary(kIdeal, 0.0);
  const Amplitudes flipped = u * StateVector::plus_one().amplitudes();
  CHECK(std::norm(flipped(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(flipped(2) + Complex(1.0)) < 1e-10);  // phase: -|-1>

  const Amplitudes dark = u * StateVector::dark().amplitudes();
  CHECK(std::abs(dark.dot(StateVector::dark().amplitudes())) ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK((u - ideal_flip_operator()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("flip unitary agrees with an independent matrix-exponential route") {
  // Pade scaling-and-squaring vs the eigendecomposition path.
  for (double splitting : {0.0, 0.4, 2.2}) {
    DriveParams drive{25.0, 130.0, 0.3, 0.01};
    const Operator3 h = rotating_hamiltonian(drive, splitting, true);
    const double t = gate_duration(drive);
    const Operator3 reference = (Complex(0.0, -1.0) * h * t).exp();
    CHECK((geometric_flip_unitary(drive, splitting) - reference).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sequence construction follows the edge convention") {
  const DDSequence single = build_dd_sequence(1, 0.0, kIdeal);
  CHECK(single.segments.size() == 1);
  CHECK(single.segments[0].drive_on);

  const DDSequence half = build_dd_sequence(4, 2.0, kIdeal);
  CHECK(half.segments.size() == 9);
  double free_time = 0.0;
  for (const auto& seg : half.segments) {
    if (!seg.drive_on) free_time += seg.duration_us;
  }
  CHECK(free_time == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(half.total_time_us() ==
        doctest::Approx(4.0 * half.gate_duration_us + 4.0 * 2.0).epsilon(1e-12));
  CHECK(half.segments.front().duration_us == doctest::Approx(1.0).epsilon(1e-12));

  const DDSequence full = build_dd_sequence(4, 2.0, kIdeal, EdgeConvention::kFullInterval);
  CHECK(full.segments.size() == 8);
  CHECK(full.segments.front().drive_on);

  // Resonant interval: the inter-gate phase Delta tau is 2 pi.
  DriveParams detuned{25.0, 130.0, 0.0, 0.0};
  const DDSequence resonant = build_dd_sequence(8, 1.0 / 0.13, detuned);
  CHECK(kTwoPi * 0.13 * resonant.interval_us == doctest::Approx(kTwoPi).epsilon(1e-9));

  CHECK_THROWS_AS(build_dd_sequence(0, 1.0, kIdeal), std::invalid_argument);
  CHECK_THROWS_AS(build_dd_sequence(1, -1.0, kIdeal), std::invalid_argument);
}

TEST_CASE("two ideal flips restore the initial state") {
  const DDSequence seq = build_dd_sequence(2, 3.7, kIdeal);
  const SimulationResult r = propagate_sequence(StateVector::bright(), seq, kCleanBath);
  CHECK(r.fidelity_vs_target == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.p_plus == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("axis error leaks and cancels every two gates") {
  BathRealization bath;
  bath.splitting_mhz = 0.3;
  const SimulationResult one =
      propagate_sequence(StateVector::plus_one(), build_dd_sequence(1, 0.0, kIdeal), bath);
  const SimulationResult two =
      propagate_sequence(StateVector::plus_one(), build_dd_sequence(2, 0.0, kIdeal), bath);
  CHECK(one.p_zero > 1e-5);
  CHECK(two.p_zero < 0.01 * one.p_zero);
}

TEST_CASE("axis-error leakage scaling exponents") {
  std::vector<double> ratios, leak_one, leak_two;
  for (int k = 0; k < 9; ++k) {
    const double ratio = 1e-3 * std::pow(10.0, k / 8.0);
    const Operator3 g = geometric_flip_unitary(kIdeal, 25.0 * ratio);
    const Amplitudes v1 = g * StateVector::plus_one().amplitudes();
    const Amplitudes v2 = g * v1;
    ratios.push_back(ratio);
    leak_one.push_back(std::norm(v1(1)));
    leak_two.push_back(std::norm(v2(1)));
  }
  const double slope_one = fit_power_law(ratios, leak_one).parameters.at("exponent");
  const double slope_two = fit_power_law(ratios, leak_two).parameters.at("exponent");
  CHECK(slope_one == doctest::Approx(2.0).epsilon(0.1));
  CHECK(slope_two == doctest::Approx(4.0).epsilon(0.075));
}

TEST_CASE("angle-error accumulation follows sin^2(N pi eps)") {
  DriveParams drive = kIdeal;
  drive.pulse_length_error = 0.01;
  for (int n = 1; n <= 16; ++n) {
    const DDSequence seq = build_dd_sequence(n, 1.0, drive);
    const SimulationResult r = propagate_sequence(StateVector::bright(), seq, kCleanBath);
    CHECK(std::abs(r.p_zero - std::pow(std::sin(n * M_PI * 0.01), 2)) < 0.01);
  }
}

TEST_CASE("detuning with non-resonant tau keeps the angle error bounded") {
  DriveParams drive{25.0, 130.0, 0.0, 0.01};
  const double tau = 0.5 / 0.13;  // half-resonant interval
  const double bound = 4.0 * std::pow(std::sin(M_PI * 0.01), 2);
  for (int n = 1; n <= 64; ++n) {
    const DDSequence seq = build_dd_sequence(n, tau, drive);
    const SimulationResult r = propagate_sequence(StateVector::bright(), seq, kCleanBath);
    CHECK(r.p_zero < bound);
  }
}

TEST_CASE("exact decoupling identity for even gate counts") {
  for (int n : {2, 8, 32}) {
    const DDSequence seq = build_dd_sequence(n, 2.3, kIdeal);
    const SimulationResult r = propagate_sequence(StateVector::bright(), seq, kCleanBath);
    CHECK(std::abs(1.0 - r.fidelity_vs_target) < 1e-9);
  }
}

TEST_CASE("unitary path preserves the norm over 128 gates") {
  DriveParams drive{25.0, 130.0, 0.0, 0.0};
  BathRealization bath;
  bath.splitting_mhz = 0.7;
  const DDSequence seq = build_dd_sequence(128, 4.0, drive);
  const SimulationResult r = propagate_sequence(StateVector::bright(), seq, bath);
  CHECK(r.norm_drift < 1e-9);
}

TEST_CASE("Lindblad path: trace and Hermiticity over millisecond scales") {
  DriveParams drive{25.0, 130.0, 0.0, 0.01};
  NoiseModel noise;
  noise.ou_amplitude_mhz = 0.05;
  noise.ou_correlation_time_us = 500.0;
  noise.t1_ms = 2.6;
  const Dissipator diss = build_dissipator(noise.t1_ms);
  BathRealization bath = sample_bath_realization(noise, 5);
  bath.splitting_mhz = 0.3;
  const DDSequence seq = build_dd_sequence(8, 250.0, drive);  // 2 ms total
  bath.ou = ou_trajectory(noise, seq.total_time_us(), 0.5, 17);

  REQUIRE(seq.total_time_us() >= 2000.0);
  const SimulationResult r = propagate_sequence(StateVector::bright(), seq, bath, &diss);
  CHECK(r.trace_drift < 1e-6);
  CHECK(r.hermiticity_drift < 1e-8);

  // Halving both step sizes moves the final populations by less than 1e-6.
  StepSizes halved;
  halved.drive_on_dt_us /= 2.0;
  halved.drive_off_dt_us /= 2.0;
  const SimulationResult r2 = propagate_sequence(StateVector::bright(), seq, bath, &diss, halved);
  CHECK(std::abs(r.p_plus - r2.p_plus) < 1e-6);
  CHECK(std::abs(r.p_zero - r2.p_zero) < 1e-6);
  CHECK(std::abs(r.p_minus - r2.p_minus) < 1e-6);
}

TEST_CASE("free relaxation drives the leaked population toward 1/3") {
  const double t1_ms = 1.9;
  const Dissipator diss = build_dissipator(t1_ms);
  DDSequence seq;
  seq.gate_count = 2;
  seq.drive = kIdeal;
  seq.segments = {{t1_ms * 1e3, false}};
  const SimulationResult r = propagate_sequence(StateVector::bright(), seq, kCleanBath, &diss);
  // p0(t1) = (1/3)(1 - e^{-3}) under the 1/t1 jump-rate calibration.
  CHECK(r.p_zero == doctest::Approx((1.0 - std::exp(-3.0)) / 3.0).epsilon(1e-6));
}

TEST_CASE("an unstable step size is reported, not silently accepted") {
  DriveParams drive{25.0, 0.0, 0.0, 0.0};
  const Dissipator diss = build_dissipator(2.6);
  const DDSequence seq = build_dd_sequence(2, 1.0, drive);
  StepSizes coarse;
  coarse.drive_on_dt_us = 0.02;  // RK4 unstable at omega * dt ~ pi
  CHECK_THROWS_AS(
      propagate_sequence(StateVector::bright(), seq, kCleanBath, &diss, coarse),
      std::runtime_error);
}

TEST_CASE("fidelity target follows the ideal flip of the initial state") {
  // Odd flip count maps |+1> to |-1> up to phase.
  const DDSequence seq = build_dd_sequence(3, 1.3, kIdeal);
  const SimulationResult r = propagate_sequence(StateVector::plus_one(), seq, kCleanBath);
  CHECK(r.fidelity_vs_target == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(r.final_state.matrix()(2, 2).real() - 1.0) < 1e-9);
}
