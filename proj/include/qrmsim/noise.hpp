#pragma once

// Ornstein-Uhlenbeck noise for magnetic dephasing xi(t) and relative carrier
// amplitude fluctuation beta(t).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qrmsim/error.hpp"

namespace qrmsim {

/// Zero-mean OU process with relaxation time tau [s] and diffusion constant
/// c [s^-3]. Stationary variance (total noise power) is c * tau / 2.
struct OuParams {
    double tau = 100e-6;
    double diffusion = 0.0;

    OuParams() = default;
    OuParams(double tau, double diffusion);

    double noise_power() const { return diffusion * tau / 2.0; }
    double spectral_width() const;
    bool silent() const { return diffusion == 0.0; }
};

/// c = 2 / (tau^2 T2), valid when T2 >> tau. Rejects t2 < 5 tau.
/// An infinite t2 gives the noiseless process.
OuParams ou_params_from_coherence(double tau, double t2);

/// beta(t) multiplies the carrier Rabi frequency: Omega_c (1 + beta(t)).
/// Stationary variance zeta^2, so P_AF = (zeta Omega_c)^2.
struct AmplitudeNoiseParams {
    double zeta = 0.0;
    double tau_beta = 1e-3;
    double carrier_rabi = 0.0;

    double power() const { return (zeta * carrier_rabi) * (zeta * carrier_rabi); }
    OuParams process() const;
};

/// xoshiro256** 1.0 (Blackman and Vigna), seeded through splitmix64.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed);

    std::uint64_t operator()();
    /// Uniform on (0, 1), never exactly 0.
    double uniform_open();

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

private:
    std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

enum class NoiseChannel : std::uint64_t { dephasing = 1, amplitude = 2 };

/// Seed of trajectory `index` on `channel`; depends only on its arguments,
/// so ensembles are independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index, NoiseChannel channel);

/// Standard normal variates by Box-Muller; the second variate of each pair
/// is cached, so every call consumes exactly one normal from the stream.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : rng_(seed) {}
    double operator()();

private:
    Xoshiro256 rng_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Exact OU update over dt: x e^{-dt/tau} + sqrt(c tau/2 (1 - e^{-2 dt/tau})) n.
double ou_step(double x, double dt, const OuParams& params, NormalSource& normal);

/// Draw from the stationary distribution N(0, c tau / 2).
double stationary_sample(const OuParams& params, NormalSource& normal);

/// Precomputed fixed-dt version of ou_step for the integrator loop.
class OuStepper {
public:
    OuStepper(const OuParams& params, double dt);
    double step(double x, NormalSource& normal) const { return x * decay_ + amplitude_ * normal(); }

private:
    double decay_;
    double amplitude_;
};

struct NoiseTrajectory {
    std::vector<double> samples;
    double dt = 0.0;
    std::uint64_t seed = 0;
    OuParams params;
};

/// samples[k] is the value at t = k dt. The first sample is drawn from the
/// stationary distribution unless `stationary_start` is false (then 0).
NoiseTrajectory generate_trajectory(const OuParams& params, double dt, std::size_t length, std::uint64_t seed,
                                    bool stationary_start = true);

/// Ensemble- and time-averaged estimate of <x(t) x(t + lag)>.
double autocorrelation_estimate(std::span<const NoiseTrajectory> trajs, double lag);

}  // namespace qrmsim
