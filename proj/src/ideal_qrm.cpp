#include "qrmsim/ideal_qrm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qrmsim {

void QrmParams::validate() const {
    require(std::isfinite(omega) && std::isfinite(omega0) && std::isfinite(lambda), "QrmParams: non-finite value");
    require(omega0 > 0.0, "QrmParams: omega0 must be positive");
    require(lambda >= 0.0, "QrmParams: lambda must be non-negative");
}

Operator qrm_hamiltonian(const QrmParams& params, const FockSpace& space) {
    params.validate();
    const Operator a = annihilation(space);
    const Operator x = a + a.adjoint();
    return 0.5 * params.omega * embed(pauli_z(), mode_identity(space)) +
           params.omega0 * embed(spin_identity(), number(space)) - params.lambda * embed(pauli_x(), x);
}

Operator parity_operator(const FockSpace& space) { return -embed(pauli_z(), mode_parity(space)); }

OmegaZeroPropagator::OmegaZeroPropagator(const QrmParams& params, const FockSpace& space)
    : params_(params), dim_(space.dim()) {
    params.validate();
    require(params.omega == 0.0, "omega_zero_propagate: requires omega == 0");
    const double g = params.coupling_ratio();
    d_plus_ = displacement(cplx{g, 0.0}, space);
    d_minus_ = displacement(cplx{-g, 0.0}, space);
}

CVector OmegaZeroPropagator::propagate(const CVector& psi0, double t) const {
    require(psi0.size() == 2 * dim_, "omega_zero_propagate: dimension mismatch");
    const int n = dim_;
    const double s = 1.0 / std::sqrt(2.0);
    // sx eigenbasis: |+> = (|g> + |e>)/sqrt2, |-> = (|e> - |g>)/sqrt2 (real).
    const CVector g_part = psi0.head(n);
    const CVector e_part = psi0.tail(n);
    const CVector plus = s * (g_part + e_part);
    const CVector minus = s * (e_part - g_part);

    CVector free_phase(n);
    for (int k = 0; k < n; ++k) free_phase(k) = std::polar(1.0, -params_.omega0 * t * k);
    const cplx global = std::polar(1.0, params_.lambda * params_.lambda * t / params_.omega0);

    // H+ = omega0 a^dag a - lambda (a + a^dag) = omega0 D(g) a^dag a D(-g) - lambda^2/omega0.
    const CVector plus_t = global * (d_plus_ * free_phase.cwiseProduct(d_minus_ * plus));
    // H- = omega0 a^dag a + lambda (a + a^dag) = omega0 D(-g) a^dag a D(g) - lambda^2/omega0.
    const CVector minus_t = global * (d_minus_ * free_phase.cwiseProduct(d_plus_ * minus));

    CVector out(2 * n);
    out.head(n) = s * (plus_t - minus_t);
    out.tail(n) = s * (plus_t + minus_t);
    return out;
}

StateVector omega_zero_propagate(const QrmParams& params, const StateVector& psi0, double t, const FockSpace& space) {
    const OmegaZeroPropagator prop(params, space);
    StateVector out;
    out.amplitudes = prop.propagate(psi0.amplitudes, t);
    out.time = psi0.time + t;
    return out;
}

SpectralPropagator::SpectralPropagator(const Operator& hamiltonian) {
    require(hamiltonian.rows() == hamiltonian.cols(), "SpectralPropagator: matrix must be square");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian);
    require(solver.info() == Eigen::Success, "SpectralPropagator: eigendecomposition failed", ErrorCode::internal);
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

CVector SpectralPropagator::propagate(const CVector& psi0, double t) const {
    require(psi0.size() == eigenvectors_.rows(), "SpectralPropagator: dimension mismatch");
    CVector coeff = eigenvectors_.adjoint() * psi0;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) *= std::polar(1.0, -eigenvalues_(k) * t);
    return eigenvectors_ * coeff;
}

ReferenceEvolution evolve_reference(const QrmParams& params, const StateVector& psi0, std::span<const double> times,
                                    const FockSpace& space) {
    params.validate();
    require(psi0.size() == space.composite_dim(), "evolve_reference: dimension mismatch");
    for (std::size_t k = 0; k < times.size(); ++k) {
        require(times[k] >= 0.0 && (k == 0 || times[k] > times[k - 1]),
                "evolve_reference: times must be increasing from 0");
    }

    ReferenceEvolution ref;
    ref.states.reserve(times.size());
    auto record = [&](CVector amplitudes, double t) {
        const Eigen::VectorXd pop = fock_populations(amplitudes, space.dim());
        ref.max_tail_population = std::max(ref.max_tail_population, pop(space.dim() - 1));
        ref.states.push_back(StateVector{std::move(amplitudes), t});
    };

    if (params.omega == 0.0) {
        const OmegaZeroPropagator prop(params, space);
        for (double t : times) record(prop.propagate(psi0.amplitudes, t), t);
    } else {
        const SpectralPropagator prop(qrm_hamiltonian(params, space));
        for (double t : times) record(prop.propagate(psi0.amplitudes, t), t);
    }

    if (ref.max_tail_population > kReferenceTailWarning) {
        std::ostringstream msg;
        msg << "reference evolution: population " << ref.max_tail_population << " in top Fock level " << space.dim() - 1
            << " exceeds " << kReferenceTailWarning << "; increase fock_dim";
        ref.warnings.push_back(msg.str());
    }
    return ref;
}

double survival_probability(const CVector& psi0, const CVector& psi_t) {
    require(psi0.size() == psi_t.size(), "survival_probability: dimension mismatch");
    return std::clamp(std::norm(psi0.dot(psi_t)), 0.0, 1.0);
}

double survival_probability(const StateVector& psi0, const StateVector& psi_t) {
    return survival_probability(psi0.amplitudes, psi_t.amplitudes);
}

double fidelity(const CVector& a, const CVector& b) {
    require(a.size() == b.size(), "fidelity: dimension mismatch");
    return std::clamp(std::abs(a.dot(b)), 0.0, 1.0);
}

}  // namespace qrmsim
