#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qrmsim/noise.hpp"

using namespace qrmsim;

TEST_CASE("diffusion from coherence time") {
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    CHECK(p.diffusion == doctest::Approx(6.6667e10).epsilon(1e-4));
    CHECK(p.noise_power() == doctest::Approx(3.3333e6).epsilon(1e-4));
    CHECK(p.noise_power() == doctest::Approx(1.0 / (100e-6 * 3e-3)).epsilon(1e-14));
    CHECK(std::sqrt(p.noise_power()) == doctest::Approx(1825.7).epsilon(1e-4));
    CHECK(std::sqrt(p.noise_power()) / (2.0 * 3.14159265358979) == doctest::Approx(290.6).epsilon(1e-3));
    CHECK(p.spectral_width() == doctest::Approx(1.0 / (2.0 * 3.14159265358979 * 100e-6)));

    const OuParams quiet = ou_params_from_coherence(100e-6, std::numeric_limits<double>::infinity());
    CHECK(quiet.diffusion == 0.0);
    CHECK(quiet.noise_power() == 0.0);

    CHECK_THROWS_AS(ou_params_from_coherence(100e-6, 300e-6), Error);
    CHECK_NOTHROW(ou_params_from_coherence(100e-6, 500e-6));
    CHECK_THROWS_AS(OuParams(0.0, 1.0), Error);
    CHECK_THROWS_AS(OuParams(1e-4, -1.0), Error);
}

TEST_CASE("amplitude noise process") {
    const AmplitudeNoiseParams amp{5e-4, 1e-3, 2.0 * 3.14159265358979 * 200e3};
    const OuParams p = amp.process();
    CHECK(p.tau == 1e-3);
    CHECK(p.noise_power() == doctest::Approx(25e-8).epsilon(1e-12));
    CHECK(amp.power() == doctest::Approx(std::pow(5e-4 * amp.carrier_rabi, 2)));
}

TEST_CASE("xoshiro256** reference output") {
    // First outputs for state seeded by splitmix64(0), computed independently.
    std::uint64_t sm = 0;
    const std::uint64_t first = splitmix64(sm);
    CHECK(first == 0xe220a8397b1dcdafULL);
    Xoshiro256 a(42);
    Xoshiro256 b(42);
    for (int k = 0; k < 100; ++k) CHECK(a() == b());
    Xoshiro256 c(43);
    CHECK(Xoshiro256(42)() != c());
    for (int k = 0; k < 1000; ++k) {
        const double u = a.uniform_open();
        CHECK((u > 0.0 && u < 1.0));
    }
}

TEST_CASE("derived seeds separate trajectories and channels") {
    const auto s1 = derive_seed(7, 0, NoiseChannel::dephasing);
    CHECK(s1 == derive_seed(7, 0, NoiseChannel::dephasing));
    CHECK(s1 != derive_seed(7, 1, NoiseChannel::dephasing));
    CHECK(s1 != derive_seed(7, 0, NoiseChannel::amplitude));
    CHECK(s1 != derive_seed(8, 0, NoiseChannel::dephasing));
}

TEST_CASE("ou step limits") {
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    NormalSource n(1);
    CHECK(ou_step(3.0, 0.0, p, n) == 3.0);
    const OuParams silent(100e-6, 0.0);
    CHECK(ou_step(2.0, 50e-6, silent, n) == doctest::Approx(2.0 * std::exp(-0.5)));
    CHECK(stationary_sample(silent, n) == 0.0);
    CHECK_THROWS_AS(ou_step(1.0, -1e-6, p, n), Error);
}

TEST_CASE("stationary samples have the closed-form moments") {
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    NormalSource n(2024);
    const int draws = 100000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int k = 0; k < draws; ++k) {
        const double x = stationary_sample(p, n);
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / draws;
    const double var = sum_sq / draws - mean * mean;
    CHECK(std::abs(mean) < 3.0 * std::sqrt(p.noise_power() / draws));
    CHECK(var == doctest::Approx(p.noise_power()).epsilon(0.03));
}

TEST_CASE("long ou runs relax to the stationary variance") {
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    NormalSource n(99);
    const int runs = 10000;
    double sum_sq = 0.0;
    for (int k = 0; k < runs; ++k) {
        double x = 0.0;
        for (int s = 0; s < 20; ++s) x = ou_step(x, 100e-6, p, n);  // 20 tau
        sum_sq += x * x;
    }
    CHECK(sum_sq / runs == doctest::Approx(p.noise_power()).epsilon(0.05));
}

TEST_CASE("two half steps match one full step in distribution") {
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    const double x0 = 1500.0;
    const double dt = 40e-6;
    const int draws = 100000;
    NormalSource n1(5);
    NormalSource n2(6);
    double m1 = 0.0, q1 = 0.0, m2 = 0.0, q2 = 0.0;
    for (int k = 0; k < draws; ++k) {
        const double a = ou_step(x0, dt, p, n1);
        const double b = ou_step(ou_step(x0, dt / 2, p, n2), dt / 2, p, n2);
        m1 += a;
        q1 += a * a;
        m2 += b;
        q2 += b * b;
    }
    m1 /= draws;
    m2 /= draws;
    const double v1 = q1 / draws - m1 * m1;
    const double v2 = q2 / draws - m2 * m2;
    const double mean_se = std::sqrt((v1 + v2) / draws);
    CHECK(std::abs(m1 - m2) < 3.0 * mean_se);
    CHECK(m1 == doctest::Approx(x0 * std::exp(-dt / p.tau)).epsilon(0.01));
    // Standard error of a sample variance of a normal: v sqrt(2/n).
    const double var_se = std::sqrt(2.0 / draws) * std::sqrt(v1 * v1 + v2 * v2);
    CHECK(std::abs(v1 - v2) < 3.0 * var_se);
}

TEST_CASE("trajectories are reproducible") {
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    const auto a = generate_trajectory(p, 1e-6, 500, 17);
    const auto b = generate_trajectory(p, 1e-6, 500, 17);
    const auto c = generate_trajectory(p, 1e-6, 500, 18);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    CHECK(a.samples.size() == 500);
    CHECK(a.seed == 17);
    const auto zero_start = generate_trajectory(p, 1e-6, 10, 17, false);
    CHECK(zero_start.samples[0] == 0.0);
}

TEST_CASE("autocorrelation estimator") {
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    std::vector<NoiseTrajectory> trajs;
    for (std::uint64_t k = 0; k < 2000; ++k) {
        trajs.push_back(generate_trajectory(p, 1e-6, 6001, derive_seed(1, k, NoiseChannel::dephasing)));
    }
    const double c0 = autocorrelation_estimate(trajs, 0.0);
    const double c_tau = autocorrelation_estimate(trajs, 100e-6);
    CHECK(c0 == doctest::Approx(p.noise_power()).epsilon(0.05));
    CHECK(c_tau / c0 == doctest::Approx(std::exp(-1.0)).epsilon(0.10));

    CHECK_THROWS_AS(autocorrelation_estimate(trajs, 1.5e-6), Error);
    CHECK_THROWS_AS(autocorrelation_estimate(trajs, 7e-3), Error);

    std::vector<NoiseTrajectory> quiet;
    for (std::uint64_t k = 0; k < 10; ++k) quiet.push_back(generate_trajectory(OuParams(1e-4, 0.0), 1e-6, 100, k));
    CHECK(autocorrelation_estimate(quiet, 0.0) == 0.0);
    CHECK(autocorrelation_estimate(quiet, 10e-6) == 0.0);
}

TEST_CASE("spectral half width matches 1/(2 pi tau)") {
    // Lorentzian S(f) = 2 C0 tau / (1 + (2 pi f tau)^2): half maximum at f = 1/(2 pi tau).
    const OuParams p = ou_params_from_coherence(100e-6, 3e-3);
    const double dt = 5e-6;
    const int len = 4096;
    const int runs = 400;
    Eigen::FFT<double> fft;
    std::vector<double> psd(len / 2, 0.0);
    for (int r = 0; r < runs; ++r) {
        const auto t = generate_trajectory(p, dt, len, derive_seed(3, r, NoiseChannel::dephasing));
        std::vector<std::complex<double>> spec;
        fft.fwd(spec, t.samples);
        for (int k = 0; k < len / 2; ++k) psd[k] += std::norm(spec[k]);
    }
    // Average the lowest bins for the plateau, then find the half-maximum crossing.
    const double plateau = (psd[1] + psd[2] + psd[3]) / 3.0;
    int k_half = 1;
    while (k_half < len / 2 - 1 && psd[k_half] > plateau / 2.0) ++k_half;
    const double df = 1.0 / (len * dt);
    const double f_half = (k_half - 0.5) * df;
    CHECK(f_half == doctest::Approx(p.spectral_width()).epsilon(0.20));
}
