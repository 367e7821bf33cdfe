#include "qrmsim/noise.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qrmsim/error.hpp"
#include "qrmsim/hilbert.hpp"

namespace qrmsim {

OuParams::OuParams(double tau_, double diffusion_) : tau(tau_), diffusion(diffusion_) {
    require(tau > 0.0 && std::isfinite(tau), "OuParams: tau must be positive");
    require(diffusion >= 0.0 && std::isfinite(diffusion), "OuParams: diffusion must be non-negative");
}

double OuParams::spectral_width() const { return 1.0 / (kTwoPi * tau); }

OuParams ou_params_from_coherence(double tau, double t2) {
    require(tau > 0.0, "ou_params_from_coherence: tau must be positive");
    if (std::isinf(t2) && t2 > 0.0) return OuParams(tau, 0.0);
    require(t2 >= 5.0 * tau,
            "ou_params_from_coherence: T2 = " + std::to_string(t2) + " s is not >> tau = " + std::to_string(tau) +
                " s (need T2 >= 5 tau)");
    return OuParams(tau, 2.0 / (tau * tau * t2));
}

OuParams AmplitudeNoiseParams::process() const {
    require(zeta >= 0.0, "AmplitudeNoiseParams: zeta must be non-negative");
    return OuParams(tau_beta, 2.0 * zeta * zeta / tau_beta);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t Xoshiro256::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256::uniform_open() {
    // 53 random bits, shifted by half an ulp off zero.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index, NoiseChannel channel) {
    std::uint64_t state = master_seed;
    std::uint64_t h = splitmix64(state);
    state = h ^ (index * 0xd1342543de82ef95ULL);
    h = splitmix64(state);
    state = h ^ (static_cast<std::uint64_t>(channel) * 0xa0761d6478bd642fULL);
    return splitmix64(state);
}

double NormalSource::operator()() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = rng_.uniform_open();
    const double u2 = rng_.uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = kTwoPi * u2;
    cached_ = r * std::sin(phi);
    has_cached_ = true;
    return r * std::cos(phi);
}

double ou_step(double x, double dt, const OuParams& params, NormalSource& normal) {
    require(dt >= 0.0, "ou_step: dt must be non-negative");
    const double decay = std::exp(-dt / params.tau);
    const double amplitude = std::sqrt(params.noise_power() * (1.0 - decay * decay));
    return x * decay + amplitude * normal();
}

double stationary_sample(const OuParams& params, NormalSource& normal) {
    return std::sqrt(params.noise_power()) * normal();
}

OuStepper::OuStepper(const OuParams& params, double dt) {
    require(dt >= 0.0, "OuStepper: dt must be non-negative");
    decay_ = std::exp(-dt / params.tau);
    amplitude_ = std::sqrt(params.noise_power() * (1.0 - decay_ * decay_));
}

NoiseTrajectory generate_trajectory(const OuParams& params, double dt, std::size_t length, std::uint64_t seed,
                                    bool stationary_start) {
    NoiseTrajectory traj;
    traj.dt = dt;
    traj.seed = seed;
    traj.params = params;
    traj.samples.resize(length);
    if (length == 0) return traj;
    NormalSource normal(seed);
    const OuStepper stepper(params, dt);
    double x = stationary_start ? stationary_sample(params, normal) : 0.0;
    traj.samples[0] = x;
    for (std::size_t k = 1; k < length; ++k) {
        x = stepper.step(x, normal);
        traj.samples[k] = x;
    }
    return traj;
}

double autocorrelation_estimate(std::span<const NoiseTrajectory> trajs, double lag) {
    require(!trajs.empty(), "autocorrelation_estimate: no trajectories");
    const double dt = trajs.front().dt;
    require(dt > 0.0, "autocorrelation_estimate: trajectory dt must be positive");
    const double steps = lag / dt;
    const auto shift = static_cast<std::size_t>(std::llround(steps));
    require(lag >= 0.0 && std::abs(steps - static_cast<double>(shift)) < 1e-6 * std::max(1.0, steps),
            "autocorrelation_estimate: lag must be a non-negative multiple of dt");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& t : trajs) {
        require(t.dt == dt, "autocorrelation_estimate: trajectories have different dt");
        require(shift < t.samples.size(), "autocorrelation_estimate: lag out of range");
        for (std::size_t k = 0; k + shift < t.samples.size(); ++k) sum += t.samples[k] * t.samples[k + shift];
        count += t.samples.size() - shift;
    }
    return sum / static_cast<double>(count);
}

}  // namespace qrmsim
