#pragma once

// Fixed-step propagation of i d/dt psi = H(t) psi, single noisy trajectories
// and Monte Carlo ensembles.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qrmsim/hilbert.hpp"
#include "qrmsim/ideal_qrm.hpp"
#include "qrmsim/noise.hpp"
#include "qrmsim/schemes.hpp"

namespace qrmsim {

/// Minimum number of integrator steps per period of the fastest frequency.
inline constexpr double kMinStepsPerPeriod = 100.0;
/// Default steps per period.
inline constexpr double kDefaultStepsPerPeriod = 200.0;
/// Population of the top two Fock levels that aborts a trajectory.
inline constexpr double kTrajectoryTailLimit = 1e-6;

struct IntegratorConfig {
    double step = 0.0;         // s
    int sample_every = 1;      // steps between observable samples
    double renorm_threshold = 1e-12;

    double sample_interval() const { return step * sample_every; }

    /// Rejects steps coarser than kMinStepsPerPeriod per period of
    /// `fastest_frequency` (rad/s).
    static IntegratorConfig make(double step, int sample_every, double fastest_frequency,
                                 double renorm_threshold = 1e-12);

    /// Largest step that divides `sample_interval` and resolves
    /// `fastest_frequency` with at least `steps_per_period` steps.
    static IntegratorConfig for_sampling(double sample_interval, double fastest_frequency,
                                         double steps_per_period = kDefaultStepsPerPeriod);
};

/// out = H(t) in
using HamiltonianApply = std::function<void(double t, const CVector& in, CVector& out)>;

/// Classical fourth-order Runge-Kutta step for psi' = -i H(t) psi.
class Rk4Stepper {
public:
    explicit Rk4Stepper(Eigen::Index dim);
    template <typename Apply>
    void step(Apply&& apply, double t, double h, CVector& psi);

private:
    CVector k1_, k2_, k3_, k4_, tmp_;
};

template <typename Apply>
void Rk4Stepper::step(Apply&& apply, double t, double h, CVector& psi) {
    const cplx mi{0.0, -1.0};
    apply(t, psi, k1_);
    tmp_ = psi + (0.5 * h * mi) * k1_;
    apply(t + 0.5 * h, tmp_, k2_);
    tmp_ = psi + (0.5 * h * mi) * k2_;
    apply(t + 0.5 * h, tmp_, k3_);
    tmp_ = psi + (h * mi) * k3_;
    apply(t + h, tmp_, k4_);
    psi += (h / 6.0 * mi) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

struct Propagation {
    std::vector<StateVector> samples;  // at t = k * sample_interval, k = 0..
    double max_norm_drift = 0.0;
    int renormalizations = 0;
};

/// Number of sample intervals in [0, t_end]; t_end must be a multiple of
/// the interval.
int sample_count(const IntegratorConfig& cfg, double t_end);

Propagation propagate(const HamiltonianApply& h, const StateVector& psi0, const IntegratorConfig& cfg, double t_end);

/// Dense-operator provider form: H(t) is requested once per stage time.
Propagation propagate(const std::function<Operator(double)>& h_provider, const StateVector& psi0,
                      const IntegratorConfig& cfg, double t_end);

/// Everything that determines a trajectory apart from its seed.
struct RunSpec {
    SchemeConfig scheme;
    IonSetup ion;
    OuParams dephasing;             // diffusion 0 disables xi(t)
    StateVector psi0_qrm;           // in the ideal-model basis
    IntegratorConfig integrator;
    double t_end = 6e-3;
    bool beta_stationary_start = true;
};

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<double> sigma_z;
    std::vector<double> phonons;
    std::vector<double> survival;
    std::vector<double> fidelity;
    std::vector<double> parity;
    double norm_drift = 0.0;
    int renormalizations = 0;
    double max_tail_population = 0.0;
    std::uint64_t xi_seed = 0;
    std::uint64_t beta_seed = 0;
};

/// Reference states psi_QRM(t) at the sample times of `spec`.
ReferenceEvolution reference_for(const RunSpec& spec);

/// Trajectory `index` of the ensemble seeded by `master_seed`.
TrajectoryResult run_trajectory(const RunSpec& spec, const ReferenceEvolution& reference, std::uint64_t master_seed,
                                std::uint64_t index = 0);
TrajectoryResult run_trajectory(const RunSpec& spec, std::uint64_t master_seed, std::uint64_t index = 0);

struct ObservableStats {
    std::vector<double> mean;
    std::vector<double> sem;
};

struct EnsembleResult {
    std::vector<double> times;
    ObservableStats sigma_z;
    ObservableStats phonons;
    ObservableStats survival;
    ObservableStats fidelity;
    ObservableStats parity;
    int n_traj = 0;
    std::uint64_t master_seed = 0;
    std::string config_digest;
    double max_norm_drift = 0.0;
    int renormalizations = 0;
    double max_tail_population = 0.0;
    std::vector<std::string> warnings;
};

/// Runs trajectories 0..n_traj-1 on `threads` workers (0 = hardware
/// concurrency). The result does not depend on the worker count.
EnsembleResult run_ensemble(const RunSpec& spec, int n_traj, std::uint64_t master_seed, int threads = 1);

/// Combine per-trajectory results in index order.
EnsembleResult aggregate(const std::vector<TrajectoryResult>& trajs);

/// Digest of every field of `spec` (FNV-1a over a canonical text form).
std::string spec_digest(const RunSpec& spec);

}  // namespace qrmsim
