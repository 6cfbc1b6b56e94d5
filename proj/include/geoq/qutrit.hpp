#pragma once

#include <complex>

#include <Eigen/Dense>

// Dense three-level (spin-1) linear algebra on the ordered basis
// (|+1>, |0>, |-1>), index 0, 1, 2.  Hamiltonians are in rad/us, times in
// us; all public configuration elsewhere uses ordinary frequency with the
// 2*pi factor applied at the boundary.

namespace geoq {

using Complex = std::complex<double>;
using Operator3 = Eigen::Matrix3cd;
using Amplitudes = Eigen::Vector3cd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class Axis { X, Y, Z };

// Standard spin-1 matrix for the given axis, m_s basis (+1, 0, -1).
Operator3 spin_operator(Axis axis);

// Normalized pure state of the qutrit.
class StateVector {
 public:
  // Normalizes the amplitudes; throws std::invalid_argument on zero norm.
  explicit StateVector(const Amplitudes& amplitudes);

  const Amplitudes& amplitudes() const { return amp_; }
  Complex amplitude(int i) const { return amp_(i); }

  static StateVector plus_one();   // |+1>
  static StateVector zero();       // |0>
  static StateVector minus_one();  // |-1>
  static StateVector bright();     // |+> = (|+1> + |-1>)/sqrt(2)
  static StateVector dark();       // |-> = (|+1> - |-1>)/sqrt(2)

 private:
  Amplitudes amp_;
};

// Amplitudes of v re-expressed in the ordered basis (|+>, |0>, |->).
// A view of the same state, not a second storage convention.
StateVector bright_dark_transform(const StateVector& v);
// Inverse map: amplitudes given in (|+>, |0>, |->) back to (|+1>, |0>, |-1>).
StateVector bright_dark_inverse(const StateVector& v);
// The same change of basis applied to an operator.
Operator3 bright_dark_transform(const Operator3& op);

// Mixed state.  Construction enforces Hermiticity (1e-12), unit trace
// (1e-12) and eigenvalues >= -1e-10; throws std::invalid_argument otherwise.
class DensityOperator {
 public:
  explicit DensityOperator(const Operator3& matrix);

  const Operator3& matrix() const { return rho_; }

  static DensityOperator pure(const StateVector& v);
  static DensityOperator maximally_mixed();

  // For matrices produced by numerical integration: re-Hermitizes, floors
  // eigenvalues at zero (only if above -clamp_tol) and renormalizes the
  // trace.  Throws if the input is further than the tolerances allow.
  static DensityOperator sanitized(const Operator3& matrix,
                                   double clamp_tol = 1e-6);

 private:
  DensityOperator() = default;
  Operator3 rho_;
};

// Propagator exp(-i H t) for Hermitian H (rad/us) over t (us), computed by
// eigendecomposition so the result is unitary to machine precision.
// Throws std::invalid_argument for non-Hermitian input or t < 0.
Operator3 propagator(const Operator3& h, double t_us);

struct Populations {
  double p_plus = 0.0;   // bright |+>
  double p_zero = 0.0;   // ancilla |0> (the leaked population)
  double p_minus = 0.0;  // dark |->
};

// Populations in the bright/dark frame; they sum to 1.
Populations populations(const StateVector& v);
Populations populations(const DensityOperator& rho);

// Tr(rho_a rho_b).  For two valid density operators this is real in
// [0, 1 + 1e-9] and symmetric in its arguments.
double state_fidelity(const DensityOperator& rho_a, const DensityOperator& rho_b);

}  // namespace geoq
