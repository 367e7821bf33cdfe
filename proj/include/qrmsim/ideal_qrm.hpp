#pragma once

// Reference quantum Rabi model H = omega/2 sz + omega0 a^dag a - lambda sx (a + a^dag).

#include <span>
#include <string>
#include <vector>

#include "qrmsim/hilbert.hpp"

namespace qrmsim {

/// All frequencies in rad/s.
struct QrmParams {
    double omega = 0.0;
    double omega0 = kTwoPi * 1e3;
    double lambda = kTwoPi * 1e3;

    double coupling_ratio() const { return lambda / omega0; }
    double revival_period() const { return kTwoPi / omega0; }
    void validate() const;
};

Operator qrm_hamiltonian(const QrmParams& params, const FockSpace& space);

/// -sz (-1)^{a^dag a}
Operator parity_operator(const FockSpace& space);

/// Exact evolution for omega = 0 on the sx = +-1 branches,
/// e^{-iH+- t} = e^{i lambda^2 t / omega0} D(+-g) e^{-i omega0 a^dag a t} D(-+g).
StateVector omega_zero_propagate(const QrmParams& params, const StateVector& psi0, double t, const FockSpace& space);

/// omega_zero_propagate with the branch displacements built once.
class OmegaZeroPropagator {
public:
    OmegaZeroPropagator(const QrmParams& params, const FockSpace& space);
    CVector propagate(const CVector& psi0, double t) const;

private:
    QrmParams params_;
    int dim_;
    CMatrix d_plus_;   // D(+g)
    CMatrix d_minus_;  // D(-g)
};

struct ReferenceEvolution {
    std::vector<StateVector> states;
    double max_tail_population = 0.0;
    std::vector<std::string> warnings;
};

/// Population above which the top Fock level triggers a truncation warning.
inline constexpr double kReferenceTailWarning = 1e-6;

/// States under the ideal model at `times`. omega == 0 uses the exact branch
/// propagator; otherwise a one-time dense eigendecomposition.
ReferenceEvolution evolve_reference(const QrmParams& params, const StateVector& psi0, std::span<const double> times,
                                    const FockSpace& space);

/// Dense spectral propagator e^{-iHt} of a time-independent Hermitian H.
class SpectralPropagator {
public:
    explicit SpectralPropagator(const Operator& hamiltonian);
    CVector propagate(const CVector& psi0, double t) const;
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

private:
    Eigen::VectorXd eigenvalues_;
    CMatrix eigenvectors_;
};

/// |<psi0|psi_t>|^2
double survival_probability(const StateVector& psi0, const StateVector& psi_t);
double survival_probability(const CVector& psi0, const CVector& psi_t);

/// |<a|b>|
double fidelity(const CVector& a, const CVector& b);

}  // namespace qrmsim
