#include "qrmsim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace qrmsim {

IntegratorConfig IntegratorConfig::make(double step, int sample_every, double fastest_frequency,
                                        double renorm_threshold) {
    require(step > 0.0 && std::isfinite(step), "IntegratorConfig: step must be positive");
    require(sample_every >= 1, "IntegratorConfig: sample_every must be >= 1");
    require(renorm_threshold > 0.0, "IntegratorConfig: renorm_threshold must be positive");
    if (step * fastest_frequency > kTwoPi / kMinStepsPerPeriod * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "IntegratorConfig: step " << step << " s resolves the fastest frequency " << fastest_frequency
            << " rad/s with only " << kTwoPi / (step * fastest_frequency) << " steps per period (need >= "
            << kMinStepsPerPeriod << ")";
        throw Error(ErrorCode::invalid_argument, msg.str());
    }
    return IntegratorConfig{step, sample_every, renorm_threshold};
}

IntegratorConfig IntegratorConfig::for_sampling(double sample_interval, double fastest_frequency,
                                                double steps_per_period) {
    require(sample_interval > 0.0, "IntegratorConfig: sample interval must be positive");
    require(steps_per_period >= kMinStepsPerPeriod, "IntegratorConfig: steps_per_period below the minimum");
    const double per_interval = sample_interval * fastest_frequency * steps_per_period / kTwoPi;
    const int sample_every = std::max(1, static_cast<int>(std::ceil(per_interval - 1e-9)));
    return make(sample_interval / sample_every, sample_every, fastest_frequency);
}

Rk4Stepper::Rk4Stepper(Eigen::Index dim)
    : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

int sample_count(const IntegratorConfig& cfg, double t_end) {
    require(t_end >= 0.0, "t_end must be non-negative");
    const double intervals = t_end / cfg.sample_interval();
    const double rounded = std::round(intervals);
    require(std::abs(intervals - rounded) < 1e-6, "t_end must be a multiple of the sample interval");
    return static_cast<int>(rounded);
}

namespace {

// Restores the norm when it has drifted; returns the drift.
double check_norm(CVector& psi, double threshold, int& renormalizations) {
    const double norm = psi.norm();
    const double drift = std::abs(norm - 1.0);
    if (drift > threshold) {
        psi /= norm;
        ++renormalizations;
    }
    return drift;
}

}  // namespace

Propagation propagate(const HamiltonianApply& h, const StateVector& psi0, const IntegratorConfig& cfg, double t_end) {
    require(std::abs(psi0.norm() - 1.0) < 1e-9, "propagate: initial state is not normalized");
    const int intervals = sample_count(cfg, t_end);
    Propagation out;
    out.samples.reserve(static_cast<std::size_t>(intervals) + 1);
    CVector psi = psi0.amplitudes;
    out.samples.push_back(StateVector{psi, 0.0});
    Rk4Stepper stepper(psi.size());
    long long step_index = 0;
    for (int s = 1; s <= intervals; ++s) {
        for (int k = 0; k < cfg.sample_every; ++k, ++step_index) {
            stepper.step(h, static_cast<double>(step_index) * cfg.step, cfg.step, psi);
        }
        out.max_norm_drift =
            std::max(out.max_norm_drift, check_norm(psi, cfg.renorm_threshold, out.renormalizations));
        out.samples.push_back(StateVector{psi, static_cast<double>(step_index) * cfg.step});
    }
    return out;
}

Propagation propagate(const std::function<Operator(double)>& h_provider, const StateVector& psi0,
                      const IntegratorConfig& cfg, double t_end) {
    HamiltonianApply apply = [&](double t, const CVector& in, CVector& out) { out.noalias() = h_provider(t) * in; };
    return propagate(apply, psi0, cfg, t_end);
}

namespace {

std::vector<double> sample_times(const RunSpec& spec) {
    const int intervals = sample_count(spec.integrator, spec.t_end);
    std::vector<double> times(static_cast<std::size_t>(intervals) + 1);
    const long long every = spec.integrator.sample_every;
    for (int s = 0; s <= intervals; ++s) times[s] = static_cast<double>(s * every) * spec.integrator.step;
    return times;
}

struct Observables {
    double sigma_z = 0.0;
    double phonons = 0.0;
    double parity = 0.0;
};

Observables measure(const CVector& chi, int n) {
    Observables o;
    for (int k = 0; k < n; ++k) {
        const double pg = std::norm(chi(k));
        const double pe = std::norm(chi(n + k));
        o.sigma_z += pe - pg;
        o.phonons += k * (pg + pe);
        o.parity += ((k % 2 == 0) ? -1.0 : 1.0) * (pe - pg);
    }
    // The norm is only restored to within renorm_threshold; keep the
    // observables inside their exact ranges.
    o.sigma_z = std::clamp(o.sigma_z, -1.0, 1.0);
    o.parity = std::clamp(o.parity, -1.0, 1.0);
    o.phonons = std::max(o.phonons, 0.0);
    return o;
}

}  // namespace

ReferenceEvolution reference_for(const RunSpec& spec) {
    const auto times = sample_times(spec);
    return evolve_reference(spec.scheme.target, spec.psi0_qrm, times, spec.ion.space);
}

TrajectoryResult run_trajectory(const RunSpec& spec, const ReferenceEvolution& reference, std::uint64_t master_seed,
                                std::uint64_t index) {
    const FockSpace& space = spec.ion.space;
    const int n = space.dim();
    require(spec.psi0_qrm.size() == space.composite_dim(), "run_trajectory: initial state dimension mismatch");
    require(std::abs(spec.psi0_qrm.norm() - 1.0) < 1e-9, "run_trajectory: initial state is not normalized");
    // Re-validate the step against this scheme.
    IntegratorConfig::make(spec.integrator.step, spec.integrator.sample_every,
                           fastest_frequency(spec.scheme, spec.ion), spec.integrator.renorm_threshold);
    const auto times = sample_times(spec);
    require(reference.states.size() == times.size(), "run_trajectory: reference does not match the sample grid");

    TrajectoryResult res;
    res.xi_seed = derive_seed(master_seed, index, NoiseChannel::dephasing);
    res.beta_seed = derive_seed(master_seed, index, NoiseChannel::amplitude);
    res.times = times;
    for (auto* v : {&res.sigma_z, &res.phonons, &res.survival, &res.fidelity, &res.parity}) v->reserve(times.size());

    const double h = spec.integrator.step;
    const std::optional<AmplitudeNoiseParams> amp = spec.scheme.amplitude_noise();
    const bool xi_on = !spec.dephasing.silent();
    const bool beta_on = amp.has_value() && amp->zeta > 0.0;
    const OuParams beta_params = beta_on ? amp->process() : OuParams{};
    NormalSource xi_normal(res.xi_seed);
    NormalSource beta_normal(res.beta_seed);
    const OuStepper xi_step(spec.dephasing, h);
    const OuStepper beta_step(beta_params, h);
    double xi = xi_on ? stationary_sample(spec.dephasing, xi_normal) : 0.0;
    double beta = (beta_on && spec.beta_stationary_start) ? stationary_sample(beta_params, beta_normal) : 0.0;

    HamiltonianAction action(spec.scheme, spec.ion);
    auto apply = [&](double t, const CVector& in, CVector& out) { action.apply(t, xi, beta, in, out); };

    CVector psi = from_qrm_frame(spec.psi0_qrm, 0.0, spec.scheme.frame, space).amplitudes;
    Rk4Stepper stepper(psi.size());

    auto record = [&](std::size_t s) {
        const StateVector chi = to_qrm_frame(StateVector{psi, times[s]}, times[s], spec.scheme.frame, space);
        const Observables o = measure(chi.amplitudes, n);
        res.sigma_z.push_back(o.sigma_z);
        res.phonons.push_back(o.phonons);
        res.parity.push_back(o.parity);
        res.survival.push_back(survival_probability(spec.psi0_qrm.amplitudes, chi.amplitudes));
        res.fidelity.push_back(fidelity(reference.states[s].amplitudes, chi.amplitudes));
        const Eigen::VectorXd pop = fock_populations(psi, n);
        const double tail = pop(n - 1) + pop(n - 2);
        res.max_tail_population = std::max(res.max_tail_population, tail);
        if (tail > kTrajectoryTailLimit) {
            std::ostringstream msg;
            msg << "truncation: population " << tail << " in the top two Fock levels at t = " << times[s]
                << " s exceeds " << kTrajectoryTailLimit << "; increase fock_dim";
            throw Error(ErrorCode::truncation, msg.str());
        }
    };

    record(0);
    long long step_index = 0;
    for (std::size_t s = 1; s < times.size(); ++s) {
        for (int k = 0; k < spec.integrator.sample_every; ++k, ++step_index) {
            stepper.step(apply, static_cast<double>(step_index) * h, h, psi);
            if (xi_on) xi = xi_step.step(xi, xi_normal);
            if (beta_on) beta = beta_step.step(beta, beta_normal);
        }
        res.norm_drift =
            std::max(res.norm_drift, check_norm(psi, spec.integrator.renorm_threshold, res.renormalizations));
        record(s);
    }
    return res;
}

TrajectoryResult run_trajectory(const RunSpec& spec, std::uint64_t master_seed, std::uint64_t index) {
    return run_trajectory(spec, reference_for(spec), master_seed, index);
}

namespace {

ObservableStats stats(const std::vector<TrajectoryResult>& trajs, std::vector<double> TrajectoryResult::*field) {
    const std::size_t len = (trajs.front().*field).size();
    const auto n = static_cast<double>(trajs.size());
    ObservableStats out;
    out.mean.assign(len, 0.0);
    out.sem.assign(len, 0.0);
    for (std::size_t s = 0; s < len; ++s) {
        double sum = 0.0;
        for (const auto& t : trajs) sum += (t.*field)[s];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& t : trajs) {
            const double d = (t.*field)[s] - mean;
            ss += d * d;
        }
        out.mean[s] = mean;
        out.sem[s] = trajs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    }
    return out;
}

}  // namespace

EnsembleResult aggregate(const std::vector<TrajectoryResult>& trajs) {
    require(!trajs.empty(), "aggregate: no trajectories");
    EnsembleResult out;
    out.times = trajs.front().times;
    out.sigma_z = stats(trajs, &TrajectoryResult::sigma_z);
    out.phonons = stats(trajs, &TrajectoryResult::phonons);
    out.survival = stats(trajs, &TrajectoryResult::survival);
    out.fidelity = stats(trajs, &TrajectoryResult::fidelity);
    out.parity = stats(trajs, &TrajectoryResult::parity);
    out.n_traj = static_cast<int>(trajs.size());
    for (const auto& t : trajs) {
        out.max_norm_drift = std::max(out.max_norm_drift, t.norm_drift);
        out.renormalizations += t.renormalizations;
        out.max_tail_population = std::max(out.max_tail_population, t.max_tail_population);
    }
    return out;
}

EnsembleResult run_ensemble(const RunSpec& spec, int n_traj, std::uint64_t master_seed, int threads) {
    require(n_traj >= 1, "run_ensemble: n_traj must be >= 1");
    const ReferenceEvolution reference = reference_for(spec);

    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n_traj);

    std::vector<TrajectoryResult> results(static_cast<std::size_t>(n_traj));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_traj) return;
            try {
                results[static_cast<std::size_t>(k)] =
                    run_trajectory(spec, reference, master_seed, static_cast<std::uint64_t>(k));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_traj);
                return;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    EnsembleResult out = aggregate(results);
    out.master_seed = master_seed;
    out.config_digest = spec_digest(spec);
    out.warnings = reference.warnings;
    return out;
}

namespace {

void put(std::ostringstream& os, const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << key << '=' << buf << '\n';
}

}  // namespace

std::string spec_digest(const RunSpec& spec) {
    std::ostringstream os;
    os << "scheme=" << to_string(spec.scheme.kind) << '\n';
    put(os, "omega", spec.scheme.target.omega);
    put(os, "omega0", spec.scheme.target.omega0);
    put(os, "lambda", spec.scheme.target.lambda);
    put(os, "dd_drive", spec.scheme.dd_drive.value_or(0.0));
    os << "amp_all=" << spec.scheme.amplitude_noise_all_tones << '\n';
    for (const auto& tone : spec.scheme.tones) {
        put(os, "tone.detuning", tone.detuning);
        put(os, "tone.rabi", tone.rabi);
        put(os, "tone.eta", tone.lamb_dicke);
        put(os, "tone.phase", tone.phase);
        if (tone.amplitude_noise) {
            put(os, "tone.zeta", tone.amplitude_noise->zeta);
            put(os, "tone.tau_beta", tone.amplitude_noise->tau_beta);
        }
    }
    put(os, "nu", spec.ion.nu);
    os << "dim=" << spec.ion.space.dim() << "\nguard=" << spec.ion.space.guard() << '\n';
    put(os, "tau", spec.dephasing.tau);
    put(os, "diffusion", spec.dephasing.diffusion);
    for (Eigen::Index k = 0; k < spec.psi0_qrm.size(); ++k) {
        put(os, "psi.re", spec.psi0_qrm.amplitudes(k).real());
        put(os, "psi.im", spec.psi0_qrm.amplitudes(k).imag());
    }
    put(os, "step", spec.integrator.step);
    os << "sample_every=" << spec.integrator.sample_every << '\n';
    put(os, "renorm", spec.integrator.renorm_threshold);
    put(os, "t_end", spec.t_end);
    os << "beta_stationary=" << spec.beta_stationary_start << '\n';

    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : os.str()) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace qrmsim
