#include "qrmsim/hilbert.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qrmsim {

FockSpace::FockSpace(int dim, int guard) : dim_(dim), guard_(guard) {
    require(dim >= 2, "FockSpace: dim must be >= 2, got " + std::to_string(dim));
    require(guard >= 0, "FockSpace: guard must be >= 0, got " + std::to_string(guard));
}

namespace {

Operator annihilation_n(int n) {
    Operator a = Operator::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

}  // namespace

Operator annihilation(const FockSpace& space) { return annihilation_n(space.dim()); }

Operator creation(const FockSpace& space) { return annihilation(space).adjoint(); }

Operator number(const FockSpace& space) {
    Operator n = Operator::Zero(space.dim(), space.dim());
    for (int k = 0; k < space.dim(); ++k) n(k, k) = static_cast<double>(k);
    return n;
}

Operator mode_identity(const FockSpace& space) { return Operator::Identity(space.dim(), space.dim()); }

Operator mode_parity(const FockSpace& space) {
    Operator p = Operator::Zero(space.dim(), space.dim());
    for (int k = 0; k < space.dim(); ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

// Basis order |g>, |e>.
Operator pauli_x() {
    Operator s(2, 2);
    s << 0.0, 1.0, 1.0, 0.0;
    return s;
}

Operator pauli_y() {
    // sigma_y = -i sigma_plus + i sigma_minus, sigma_plus = |e><g|
    Operator s(2, 2);
    s << 0.0, I, -I, 0.0;
    return s;
}

Operator pauli_z() {
    Operator s(2, 2);
    s << -1.0, 0.0, 0.0, 1.0;
    return s;
}

Operator sigma_plus() {
    Operator s = Operator::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

Operator sigma_minus() { return sigma_plus().adjoint(); }

Operator spin_identity() { return Operator::Identity(2, 2); }

double assoc_laguerre(int n, int k, double x) {
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 + k - x;
    for (int j = 1; j < n; ++j) {
        const double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

// <m|D(alpha)|n> for m >= n; the m < n entries follow from
// <m|D(alpha)|n> = <n|D(-alpha)|m>^*.
cplx displacement_element_lower(int m, int n, cplx alpha) {
    const double r = std::abs(alpha);
    const double x = r * r;
    const int k = m - n;
    if (r == 0.0) return k == 0 ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
    const double log_mag = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) + k * std::log(r) - 0.5 * x;
    const cplx phase = std::polar(1.0, k * std::arg(alpha));
    return std::exp(log_mag) * assoc_laguerre(n, k, x) * phase;
}

Operator displacement_closed_form(cplx alpha, int dim) {
    Operator d(dim, dim);
    for (int n = 0; n < dim; ++n) {
        for (int m = n; m < dim; ++m) {
            d(m, n) = displacement_element_lower(m, n, alpha);
            if (m != n) d(n, m) = std::conj(displacement_element_lower(m, n, -alpha));
        }
    }
    return d;
}

Operator displacement_exponential(cplx alpha, const FockSpace& space) {
    const int full = space.dim() + space.guard();
    const Operator a = annihilation_n(full);
    const CMatrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
    return expm(generator).topLeftCorner(space.dim(), space.dim());
}

}  // namespace

Operator displacement(cplx alpha, const FockSpace& space, DisplacementMethod method) {
    require(std::isfinite(alpha.real()) && std::isfinite(alpha.imag()), "displacement: alpha must be finite");
    if (method == DisplacementMethod::exponential) return displacement_exponential(alpha, space);
    return displacement_closed_form(alpha, space.dim());
}

RMatrix displacement_real(double beta, int dim) {
    require(std::isfinite(beta), "displacement_real: beta must be finite");
    return displacement_closed_form(cplx{beta, 0.0}, dim).real();
}

Operator rotate_displacement(const Operator& d_base, double theta, const FockSpace& space) {
    require(d_base.rows() == space.dim() && d_base.cols() == space.dim(),
            "rotate_displacement: operator does not match the Fock space");
    CVector phase(space.dim());
    for (int n = 0; n < space.dim(); ++n) phase(n) = std::polar(1.0, theta * n);
    return phase.asDiagonal() * d_base * phase.conjugate().asDiagonal();
}

Operator embed(const Operator& spin_op, const Operator& mode_op) {
    require(spin_op.rows() == 2 && spin_op.cols() == 2, "embed: spin operator must be 2x2");
    require(mode_op.rows() == mode_op.cols() && mode_op.rows() >= 2, "embed: mode operator must be square");
    return Eigen::kroneckerProduct(spin_op, mode_op).eval();
}

CMatrix expm(const CMatrix& m) {
    require(m.rows() == m.cols(), "expm: matrix must be square");
    return m.exp();
}

cplx expectation(const CVector& psi, const Operator& op) {
    require(op.rows() == psi.size() && op.cols() == psi.size(), "expectation: dimension mismatch");
    return psi.dot(op * psi);
}

cplx expectation(const StateVector& state, const Operator& op) { return expectation(state.amplitudes, op); }

StateVector basis_state(Qubit q, int fock, const FockSpace& space) {
    require(fock >= 0 && fock < space.dim(), "basis_state: Fock index out of range");
    StateVector s;
    s.amplitudes = CVector::Zero(space.composite_dim());
    s.amplitudes(static_cast<int>(q) * space.dim() + fock) = 1.0;
    return s;
}

StateVector product_state(cplx c_g, cplx c_e, int fock, const FockSpace& space) {
    require(fock >= 0 && fock < space.dim(), "product_state: Fock index out of range");
    const double norm = std::sqrt(std::norm(c_g) + std::norm(c_e));
    require(norm > 0.0, "product_state: zero spin amplitudes");
    StateVector s;
    s.amplitudes = CVector::Zero(space.composite_dim());
    s.amplitudes(fock) = c_g / norm;
    s.amplitudes(space.dim() + fock) = c_e / norm;
    return s;
}

Eigen::VectorXd fock_populations(const CVector& psi, int dim) {
    require(psi.size() == 2 * dim, "fock_populations: dimension mismatch");
    Eigen::VectorXd p(dim);
    for (int n = 0; n < dim; ++n) p(n) = std::norm(psi(n)) + std::norm(psi(dim + n));
    return p;
}

}  // namespace qrmsim
