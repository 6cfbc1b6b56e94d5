#include "geoq/qutrit.hpp"

#include <cmath>
#include <stdexcept>

namespace geoq {

namespace {

const Complex kI(0.0, 1.0);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Unitary taking (|+1>, |0>, |-1>) amplitudes to (|+>, |0>, |->) amplitudes.
Operator3 bright_dark_matrix() {
  Operator3 u;
  u << kInvSqrt2, 0.0, kInvSqrt2,
       0.0,       1.0, 0.0,
       kInvSqrt2, 0.0, -kInvSqrt2;
  return u;
}

bool is_hermitian(const Operator3& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

Operator3 spin_operator(Axis axis) {
  Operator3 s = Operator3::Zero();
  switch (axis) {
    case Axis::X:
      s << 0.0, kInvSqrt2, 0.0,
           kInvSqrt2, 0.0, kInvSqrt2,
           0.0, kInvSqrt2, 0.0;
      break;
    case Axis::Y:
      s << 0.0, -kI * kInvSqrt2, 0.0,
           kI * kInvSqrt2, 0.0, -kI * kInvSqrt2,
           0.0, kI * kInvSqrt2, 0.0;
      break;
    case Axis::Z:
      s << 1.0, 0.0, 0.0,
           0.0, 0.0, 0.0,
           0.0, 0.0, -1.0;
      break;
  }
  return s;
}

StateVector::StateVector(const Amplitudes& amplitudes) : amp_(amplitudes) {
  const double norm = amp_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("StateVector: amplitudes have zero or non-finite norm");
  }
  amp_ /= norm;
}

StateVector StateVector::plus_one() { return StateVector(Amplitudes(1.0, 0.0, 0.0)); }
StateVector StateVector::zero() { return StateVector(Amplitudes(0.0, 1.0, 0.0)); }
StateVector StateVector::minus_one() { return StateVector(Amplitudes(0.0, 0.0, 1.0)); }
StateVector StateVector::bright() {
  return StateVector(Amplitudes(kInvSqrt2, 0.0, kInvSqrt2));
}
StateVector StateVector::dark() {
  return StateVector(Amplitudes(kInvSqrt2, 0.0, -kInvSqrt2));
}

StateVector bright_dark_transform(const StateVector& v) {
  return StateVector(bright_dark_matrix() * v.amplitudes());
}

StateVector bright_dark_inverse(const StateVector& v) {
  // The transform is self-inverse (real symmetric involution).
  return bright_dark_transform(v);
}

Operator3 bright_dark_transform(const Operator3& op) {
  const Operator3 u = bright_dark_matrix();
  return u * op * u.adjoint();
}

DensityOperator::DensityOperator(const Operator3& matrix) : rho_(matrix) {
  if (!is_hermitian(rho_, 1e-12)) {
    throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
  }
  if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > 1e-12) {
    throw std::invalid_argument("DensityOperator: trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Operator3> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("DensityOperator: negative eigenvalue");
  }
}

DensityOperator DensityOperator::pure(const StateVector& v) {
  DensityOperator rho;
  rho.rho_ = v.amplitudes() * v.amplitudes().adjoint();
  return rho;
}

DensityOperator DensityOperator::maximally_mixed() {
  DensityOperator rho;
  rho.rho_ = Operator3::Identity() / 3.0;
  return rho;
}

DensityOperator DensityOperator::sanitized(const Operator3& matrix, double clamp_tol) {
  if (!is_hermitian(matrix, clamp_tol)) {
    throw std::invalid_argument("DensityOperator::sanitized: Hermiticity drift beyond tolerance");
  }
  Operator3 sym = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator3> es(sym);
  Eigen::Vector3d vals = es.eigenvalues();
  if (vals.minCoeff() < -clamp_tol) {
    throw std::invalid_argument("DensityOperator::sanitized: negative eigenvalue beyond tolerance");
  }
  vals = vals.cwiseMax(0.0);
  const double total = vals.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("DensityOperator::sanitized: zero trace");
  }
  vals /= total;
  DensityOperator rho;
  rho.rho_ = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
  // Exact re-Hermitization of the reconstruction.
  rho.rho_ = 0.5 * (rho.rho_ + rho.rho_.adjoint());
  return rho;
}

Operator3 propagator(const Operator3& h, double t_us) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (!is_hermitian(h, 1e-10 * scale)) {
    throw std::invalid_argument("propagator: Hamiltonian is not Hermitian");
  }
  if (t_us < 0.0) {
    throw std::invalid_argument("propagator: negative evolution time");
  }
  Eigen::SelfAdjointEigenSolver<Operator3> es(0.5 * (h + h.adjoint()));
  Amplitudes phases;
  for (int k = 0; k < 3; ++k) {
    phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t_us));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Populations populations(const StateVector& v) {
  const Amplitudes bd = bright_dark_matrix() * v.amplitudes();
  Populations p;
  p.p_plus = std::norm(bd(0));
  p.p_zero = std::norm(bd(1));
  p.p_minus = std::norm(bd(2));
  return p;
}

Populations populations(const DensityOperator& rho) {
  const Operator3 bd = bright_dark_transform(rho.matrix());
  Populations p;
  p.p_plus = bd(0, 0).real();
  p.p_zero = bd(1, 1).real();
  p.p_minus = bd(2, 2).real();
  return p;
}

double state_fidelity(const DensityOperator& rho_a, const DensityOperator& rho_b) {
  return (rho_a.matrix() * rho_b.matrix()).trace().real();
}

}  // namespace geoq
