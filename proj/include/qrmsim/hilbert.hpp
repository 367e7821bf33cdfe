#pragma once

// Operators and states on the composite qubit (x) truncated-Fock space.
//
// Ordering is qubit-major: amplitude index = q * N + n, with q = 0 for |g>
// and q = 1 for |e>. Conventions: sigma_z|e> = +|e>, sigma_z|g> = -|g>,
// sigma_plus = |e><g|.

#include <complex>
#include <span>

#include <Eigen/Dense>

#include "qrmsim/error.hpp"

namespace qrmsim {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Truncated bosonic mode: `dim` retained Fock levels plus `guard` extra
/// levels used only while constructing operators whose matrix elements
/// depend on the truncation (the exponential displacement route).
class FockSpace {
public:
    FockSpace(int dim, int guard = 0);

    int dim() const noexcept { return dim_; }
    int guard() const noexcept { return guard_; }
    int composite_dim() const noexcept { return 2 * dim_; }

    bool operator==(const FockSpace&) const = default;

private:
    int dim_;
    int guard_;
};

/// Dense square complex matrix. Composite operators are 2N x 2N, mode
/// operators N x N, spin operators 2 x 2.
using Operator = CMatrix;

enum class Qubit { g = 0, e = 1 };

struct StateVector {
    CVector amplitudes;
    double time = 0.0;

    Eigen::Index size() const { return amplitudes.size(); }
    double norm() const { return amplitudes.norm(); }
};

// Mode operators.
Operator annihilation(const FockSpace& space);
Operator creation(const FockSpace& space);
Operator number(const FockSpace& space);
Operator mode_identity(const FockSpace& space);
/// diag((-1)^n)
Operator mode_parity(const FockSpace& space);

// Spin operators (2 x 2, basis order |g>, |e>).
Operator pauli_x();
Operator pauli_y();
Operator pauli_z();
Operator sigma_plus();
Operator sigma_minus();
Operator spin_identity();

enum class DisplacementMethod { closed_form, exponential };

/// D(alpha) = exp(alpha a^dag - alpha^* a), projected onto the first
/// space.dim() levels. The closed form evaluates exact matrix elements of
/// the untruncated operator through associated Laguerre polynomials; the
/// exponential route exponentiates the generator in dim + guard levels.
Operator displacement(cplx alpha, const FockSpace& space,
                      DisplacementMethod method = DisplacementMethod::closed_form);

/// Real orthogonal D(beta) for real beta, closed form.
RMatrix displacement_real(double beta, int dim);

/// Associated Laguerre polynomial L_n^{(k)}(x) by upward recurrence in n.
double assoc_laguerre(int n, int k, double x);

/// D(alpha e^{i theta}) from D(alpha) via conjugation with diag(e^{i theta n}).
Operator rotate_displacement(const Operator& d_base, double theta, const FockSpace& space);

/// Kronecker product spin (x) mode in qubit-major order.
Operator embed(const Operator& spin_op, const Operator& mode_op);

/// Matrix exponential exp(m) by scaling and squaring (Pade).
CMatrix expm(const CMatrix& m);

/// <psi|O|psi>
cplx expectation(const StateVector& state, const Operator& op);
cplx expectation(const CVector& psi, const Operator& op);

/// |q>|n>
StateVector basis_state(Qubit q, int fock, const FockSpace& space);

/// (c_g |g> + c_e |e>) (x) |n>, normalized.
StateVector product_state(cplx c_g, cplx c_e, int fock, const FockSpace& space);

/// Populations of the Fock levels, summed over the qubit.
Eigen::VectorXd fock_populations(const CVector& psi, int dim);

}  // namespace qrmsim
