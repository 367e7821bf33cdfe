#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qrmsim/ideal_qrm.hpp"

using namespace qrmsim;

namespace {

const double w0 = kTwoPi * 1e3;

double survival_closed_form(double g, double t) { return std::exp(-2.0 * g * g * (1.0 - std::cos(w0 * t))); }

StateVector minus_state(int fock, const FockSpace& s) {
    const double r = 1.0 / std::sqrt(2.0);
    return product_state(-r, r, fock, s);
}

}  // namespace

TEST_CASE("hamiltonian structure") {
    const FockSpace s(12);
    const QrmParams p{kTwoPi * 300.0, w0, kTwoPi * 700.0};
    const Operator h = qrm_hamiltonian(p, s);
    CHECK((h - h.adjoint()).norm() == 0.0);
    // H|g,0> = -omega/2 |g,0> - lambda |e,1>
    const CVector out = h * basis_state(Qubit::g, 0, s).amplitudes;
    CHECK(out(0).real() == doctest::Approx(-p.omega / 2));
    CHECK(out(12 + 1).real() == doctest::Approx(-p.lambda));

    CHECK_THROWS_AS(qrm_hamiltonian(QrmParams{0.0, 0.0, 1.0}, s), Error);
    CHECK_THROWS_AS(qrm_hamiltonian(QrmParams{0.0, 1.0, -1.0}, s), Error);
}

TEST_CASE("decoupled spectrum") {
    const FockSpace s(6);
    const QrmParams p{kTwoPi * 250.0, w0, 0.0};
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(qrm_hamiltonian(p, s));
    std::vector<double> expected;
    for (int n = 0; n < 6; ++n) {
        expected.push_back(-p.omega / 2 + w0 * n);
        expected.push_back(p.omega / 2 + w0 * n);
    }
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < 12; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(expected[k]).epsilon(1e-12));
}

TEST_CASE("ground energy of the displaced oscillator") {
    const FockSpace s(60);
    const QrmParams p{0.0, w0, w0};
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(qrm_hamiltonian(p, s));
    CHECK(std::abs(es.eigenvalues()(0) + w0) < 1e-8 * w0);
}

TEST_CASE("parity operator") {
    const FockSpace s(10);
    const Operator par = parity_operator(s);
    CHECK((par * par - CMatrix::Identity(20, 20)).norm() < 1e-15);
    CHECK(expectation(basis_state(Qubit::g, 0, s), par).real() == doctest::Approx(1.0));
    CHECK(expectation(basis_state(Qubit::e, 0, s), par).real() == doctest::Approx(-1.0));
    for (double omega : {0.0, 0.37 * w0, 2.1 * w0}) {
        for (double lambda : {0.3 * w0, 1.25 * w0}) {
            const Operator h = qrm_hamiltonian(QrmParams{omega, w0, lambda}, s);
            CHECK((h * par - par * h).norm() <= 1e-10 * h.norm());
        }
    }
}

TEST_CASE("omega zero propagator collapse and revival") {
    const FockSpace s(60);
    const QrmParams p{0.0, w0, w0};
    const StateVector psi0 = basis_state(Qubit::g, 0, s);

    CHECK(survival_probability(psi0, omega_zero_propagate(p, psi0, 0.0, s)) == doctest::Approx(1.0));
    const StateVector half = omega_zero_propagate(p, psi0, kPi / w0, s);
    CHECK(survival_probability(psi0, half) == doctest::Approx(std::exp(-4.0)).epsilon(1e-10));
    CHECK(survival_probability(psi0, half) == doctest::Approx(0.018316).epsilon(1e-4));
    CHECK(half.norm() == doctest::Approx(1.0).epsilon(1e-12));

    for (double g : {0.5, 1.0, 1.5}) {
        const QrmParams pg{0.0, w0, g * w0};
        CHECK(survival_probability(psi0, omega_zero_propagate(pg, psi0, kTwoPi / w0, s)) >= 1.0 - 1e-8);
    }

    const StateVector m2 = minus_state(2, s);
    const QrmParams p125{0.0, w0, 1.25 * w0};
    CHECK(survival_probability(m2, omega_zero_propagate(p125, m2, kTwoPi / w0, s)) >= 1.0 - 1e-8);

    CHECK_THROWS_AS(omega_zero_propagate(QrmParams{1.0, w0, w0}, psi0, 1e-3, s), Error);
}

TEST_CASE("omega zero propagator matches dense exponentiation") {
    const FockSpace s(60);
    for (double g : {0.5, 1.0, 1.5}) {
        const QrmParams p{0.0, w0, g * w0};
        const SpectralPropagator dense(qrm_hamiltonian(p, s));
        const OmegaZeroPropagator branch(p, s);
        for (const StateVector& psi0 : {basis_state(Qubit::g, 0, s), minus_state(2, s)}) {
            for (double t : {0.13e-3, 0.5e-3, 1.0e-3, 2.37e-3, 3.0e-3}) {
                const CVector a = dense.propagate(psi0.amplitudes, t);
                const CVector b = branch.propagate(psi0.amplitudes, t);
                // Phase-exact agreement, not only in modulus.
                CHECK(std::abs(a.dot(b) - 1.0) < 1e-8);
                CHECK(fidelity(a, b) >= 1.0 - 1e-8);
            }
        }
    }
}

TEST_CASE("reference evolution observables") {
    const FockSpace s(60);
    const QrmParams p{0.0, w0, w0};
    const StateVector psi0 = basis_state(Qubit::g, 0, s);
    std::vector<double> times;
    for (int k = 0; k <= 60; ++k) times.push_back(k * 50e-6);
    const auto ref = evolve_reference(p, psi0, times, s);
    REQUIRE(ref.states.size() == times.size());
    CHECK(ref.warnings.empty());
    const Operator n = embed(spin_identity(), number(s));
    const Operator par = parity_operator(s);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        CHECK(survival_probability(psi0, ref.states[k]) == doctest::Approx(survival_closed_form(1.0, t)).epsilon(1e-9));
        CHECK(expectation(ref.states[k], n).real() ==
              doctest::Approx(2.0 * (1.0 - std::cos(w0 * t))).epsilon(1e-9));
        CHECK(expectation(ref.states[k], par).real() == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(ref.states[k].norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(expectation(ref.states[10], n).real() == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("dense reference route conserves norm and parity") {
    const FockSpace s(60);
    const QrmParams p{0.4 * w0, w0, 1.25 * w0};
    const StateVector psi0 = minus_state(2, s);
    const std::vector<double> times{0.0, 0.7e-3, 1.9e-3, 3.0e-3};
    const auto ref = evolve_reference(p, psi0, times, s);
    const Operator par = parity_operator(s);
    const double p0 = expectation(psi0, par).real();
    for (const auto& st : ref.states) {
        CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(expectation(st, par).real() - p0) < 1e-8);
    }
}

TEST_CASE("decoupled evolution keeps the state up to a phase") {
    const FockSpace s(10);
    const QrmParams p{kTwoPi * 100.0, w0, 0.0};
    const StateVector psi0 = basis_state(Qubit::g, 0, s);
    const std::vector<double> times{0.0, 1.7e-3};
    const auto ref = evolve_reference(p, psi0, times, s);
    CHECK(survival_probability(psi0, ref.states[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncation tail warning") {
    const FockSpace small(8);
    const QrmParams p{0.0, w0, 1.5 * w0};
    const std::vector<double> times{0.0, 0.5e-3};
    const auto ref = evolve_reference(p, basis_state(Qubit::g, 0, small), times, small);
    CHECK(ref.max_tail_population > kReferenceTailWarning);
    CHECK(ref.warnings.size() == 1);

    const std::vector<double> bad{0.0, 1e-3, 0.5e-3};
    CHECK_THROWS_AS(evolve_reference(p, basis_state(Qubit::g, 0, small), bad, small), Error);
}

TEST_CASE("overlap measures") {
    const FockSpace s(4);
    const StateVector a = basis_state(Qubit::g, 1, s);
    const StateVector b = basis_state(Qubit::e, 1, s);
    CHECK(survival_probability(a, a) == doctest::Approx(1.0));
    CHECK(survival_probability(a, b) == 0.0);
    CHECK(fidelity(a.amplitudes, (cplx{0.0, 1.0} * a.amplitudes).eval()) == doctest::Approx(1.0));
    CHECK_THROWS_AS(survival_probability(a, basis_state(Qubit::g, 0, FockSpace(3))), Error);
}
