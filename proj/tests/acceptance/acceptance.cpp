// Acceptance checks. Prints one PASS/FAIL line per criterion, with the
// measured numbers underneath, and exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "qrmsim/experiment.hpp"

using namespace qrmsim;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;
std::FILE* report = nullptr;  // copy of stdout, since ctest hides output of passing tests

void emit(const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (report) {
        std::fprintf(report, "%s\n", line.c_str());
        std::fflush(report);
    }
}

void verdict(int id, bool ok, const std::string& what) {
    emit(std::string(ok ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + ": " + what);
    if (!ok) ++failures;
}

void detail(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    emit(std::string("    ") + buf);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig revival_config() {
    ExperimentConfig c;
    c.scheme = SchemeKind::ideal;
    c.omega_hz = 0.0;
    c.omega0_hz = 1e3;
    c.lambda_hz = 1e3;
    c.fock_dim = 60;
    c.qubit = InitialSpin::g;
    c.fock = 0;
    c.t_end_s = 3e-3;
    c.n_traj = 1;
    c.threads = 1;
    return c;
}

// Noise-free 6 ms run at the reference trapped-ion parameters, target g = 1.
ExperimentConfig noise_free(SchemeKind kind) {
    ExperimentConfig c;
    c.scheme = kind;
    c.fock_dim = 60;
    c.diffusion = 0.0;
    c.zeta = 0.0;
    c.n_traj = 1;
    c.threads = 1;
    return c;
}

struct SingleRun {
    double fidelity = 0.0;
    double seconds = 0.0;
    double tail = 0.0;
    double drift = 0.0;
};

SingleRun run_single(const ExperimentConfig& c) {
    const auto start = Clock::now();
    const ResolvedExperiment r = resolve(c);
    const EnsembleResult res = run_ensemble(r.spec, c.n_traj, c.master_seed, c.threads);
    return {res.fidelity.mean.back(), seconds_since(start), res.max_tail_population, res.max_norm_drift};
}

void criteria_1_and_2() {
    const ExperimentConfig c = revival_config();
    const auto start = Clock::now();
    const ResolvedExperiment r = resolve(c);
    const EnsembleResult res = run_ensemble(r.spec, 1, c.master_seed, 1);
    const double elapsed = seconds_since(start);

    const double w0 = kTwoPi * c.omega0_hz;
    double worst = 0.0;
    double s_1ms = -1.0;
    double n_half = -1.0;
    for (std::size_t k = 0; k < res.times.size(); ++k) {
        const double t = res.times[k];
        worst = std::max(worst, std::abs(res.survival.mean[k] - std::exp(-2.0 * (1.0 - std::cos(w0 * t)))));
        if (std::abs(t - 1e-3) < 1e-9) s_1ms = res.survival.mean[k];
        if (std::abs(t - 0.5e-3) < 1e-9) n_half = res.phonons.mean[k];
    }
    const bool ok1 = worst <= 1e-6 && s_1ms >= 0.999999 && elapsed <= 10.0;
    verdict(1, ok1, "ideal QRM survival matches exp(-2g^2(1-cos w0 t)) on [0, 3 ms]");
    detail("max |S - S_exact| = %.3e (limit 1e-6), S(1 ms) = %.10f (limit 0.999999), runtime %.2f s (limit 10 s)",
           worst, s_1ms, elapsed);

    const bool ok2 = std::abs(n_half - 4.0) <= 1e-3;
    verdict(2, ok2, "phonon number at 0.5 ms equals 4");
    detail("<n>(0.5 ms) = %.10f, |<n> - 4| = %.3e (limit 1e-3)", n_half, std::abs(n_half - 4.0));
}

void criterion_3() {
    ExperimentConfig c;
    c.tau_s = 100e-6;
    c.t2_s = 3e-3;
    c.t_end_s = 6e-3;
    c.noise_dt_s = 1e-6;
    c.noise_trajectories = 2000;
    const auto start = Clock::now();
    const NoiseStatsReport rep = noise_stats(c);
    const double elapsed = seconds_since(start);
    const NoiseChannelReport& ch = rep.channels.front();
    const double var_err = std::abs(ch.variance - 3.3333e6) / 3.3333e6;
    const double ratio = ch.c_tau / ch.c0;
    const double ratio_err = std::abs(ratio - std::exp(-1.0)) / std::exp(-1.0);
    const bool ok = var_err <= 0.05 && ratio_err <= 0.10 && elapsed <= 30.0;
    verdict(3, ok, "OU dephasing statistics over 2000 trajectories x 6 ms");
    detail("variance %.6e s^-2 (target 3.3333e6, rel. error %.2f%%, limit 5%%)", ch.variance, 100.0 * var_err);
    detail("C(tau)/C(0) = %.5f (target %.5f, rel. error %.2f%%, limit 10%%), runtime %.2f s (limit 30 s)", ratio,
           std::exp(-1.0), 100.0 * ratio_err, elapsed);
}

void criteria_4_and_5() {
    const SingleRun standard = run_single(noise_free(SchemeKind::standard));
    const SingleRun sw = run_single(noise_free(SchemeKind::dd_standing_wave));
    const bool ok4 = standard.fidelity >= 0.98 && sw.fidelity >= 0.95 && standard.seconds <= 1200.0 &&
                     sw.seconds <= 1200.0;
    verdict(4, ok4, "noise-free 6 ms fidelity of the standard and DD standing-wave schemes");
    detail("standard: F(6 ms) = %.6f (limit 0.98), runtime %.1f s, tail %.2e, norm drift %.2e", standard.fidelity,
           standard.seconds, standard.tail, standard.drift);
    detail("DD standing wave: F(6 ms) = %.6f (limit 0.95), runtime %.1f s, tail %.2e, norm drift %.2e", sw.fidelity,
           sw.seconds, sw.tail, sw.drift);

    const SingleRun tw = run_single(noise_free(SchemeKind::dd_traveling));
    const bool ok5 = sw.fidelity - tw.fidelity >= 0.05 && tw.seconds <= 1200.0;
    verdict(5, ok5, "DD traveling-wave fidelity falls below standing-wave by at least 0.05");
    detail("DD traveling wave: F(6 ms) = %.6f, F_SW - F_TW = %.6f (limit 0.05), runtime %.1f s", tw.fidelity,
           sw.fidelity - tw.fidelity, tw.seconds);
}

struct EnsembleEnd {
    double mean = 0.0;
    double sem = 0.0;
    double seconds = 0.0;
    double tail = 0.0;
};

EnsembleEnd hierarchy_run(SchemeKind kind, double zeta, std::uint64_t seed) {
    ExperimentConfig c;
    c.scheme = kind;
    c.omega_hz = 0.0;
    c.omega0_hz = 800.0;  // lambda = eta Omega / 2 = 1 kHz, so g = 1.25
    // Dephasing kicks that flip the sigma_x branch while the mode is displaced
    // heat the standard scheme well past the ideal orbit; N = 56 already
    // overflows the tail limit on some trajectories.
    c.fock_dim = 90;
    c.steps_per_period = kMinStepsPerPeriod;
    c.qubit = InitialSpin::minus;
    c.fock = 2;
    c.zeta = zeta;
    c.n_traj = 20;
    c.master_seed = seed;
    c.threads = 0;
    const auto start = Clock::now();
    const ResolvedExperiment r = resolve(c);
    const EnsembleResult res = run_ensemble(r.spec, c.n_traj, c.master_seed, c.threads);
    return {res.fidelity.mean.back(), res.fidelity.sem.back(), seconds_since(start), res.max_tail_population};
}

void criterion_6() {
    const auto start = Clock::now();
    const EnsembleEnd standard = hierarchy_run(SchemeKind::standard, 0.0, 601);
    const EnsembleEnd weak = hierarchy_run(SchemeKind::dd_standing_wave, 5e-4, 602);
    const EnsembleEnd strong = hierarchy_run(SchemeKind::dd_standing_wave, 2e-3, 603);
    const double elapsed = seconds_since(start);

    const double sem_weak = std::hypot(weak.sem, standard.sem);
    const double sem_strong = std::hypot(strong.sem, standard.sem);
    const double gain_weak = weak.mean - standard.mean;
    const double gain_strong = strong.mean - standard.mean;
    const bool weak_ok = gain_weak > 3.0 * sem_weak;
    const bool strong_ok = gain_strong <= 3.0 * sem_strong;
    const bool ok = weak_ok && strong_ok && elapsed <= 90.0 * 60.0;
    verdict(6, ok, "noise hierarchy at g = 1.25, 20 trajectories, 6 ms, N = 90");
    detail("standard:               F = %.6f +- %.6f (%.0f s, tail %.2e)", standard.mean, standard.sem,
           standard.seconds, standard.tail);
    detail("DD-SW zeta = 5e-4:      F = %.6f +- %.6f (%.0f s, tail %.2e)", weak.mean, weak.sem, weak.seconds,
           weak.tail);
    detail("DD-SW zeta = 2e-3:      F = %.6f +- %.6f (%.0f s, tail %.2e)", strong.mean, strong.sem, strong.seconds,
           strong.tail);
    detail("F(5e-4) - F(std) = %.6f, 3 combined SEM = %.6f -> %s", gain_weak, 3.0 * sem_weak,
           weak_ok ? "above" : "NOT above");
    detail("F(2e-3) - F(std) = %.6f, 3 combined SEM = %.6f -> %s", gain_strong, 3.0 * sem_strong,
           strong_ok ? "within or negative" : "clearly positive");
    detail("total runtime %.1f min (limit 90 min)", elapsed / 60.0);
}

void criterion_7(const fs::path& scratch) {
    ExperimentConfig c;
    c.scheme = SchemeKind::dd_standing_wave;
    const SweepOutcome out = sweep_zeta(c, {}, scratch / "sweep");
    const std::string summary = slurp(out.summary_path);
    const auto pos = summary.find("crossover,");
    double reported = 0.0;
    if (pos != std::string::npos) reported = std::stod(summary.substr(pos + 10));
    const double exact = 1.0 / (kTwoPi * 200e3 * std::sqrt(100e-6 * 3e-3));
    // 1.4528e-3 is the closed form cut to five digits, so allow one unit in the last of them.
    const bool ok = std::abs(reported - 1.4528e-3) < 1e-7 && std::abs(reported - exact) <= 1e-15;
    verdict(7, ok, "sweep-zeta reports zeta* = 1/(Omega_c sqrt(tau T2))");
    detail("zeta* = %.10e, closed form %.10e, quoted 1.4528e-3 (tolerance 1e-7)", reported, exact);
}

void criterion_8(const fs::path& scratch) {
    ExperimentConfig c = revival_config();
    c.n_traj = 4;
    c.threads = 1;
    const RunOutcome one = run_experiment(c, scratch / "ideal_1.csv");
    c.threads = 4;
    const RunOutcome four = run_experiment(c, scratch / "ideal_4.csv");
    const bool same_ideal = slurp(one.csv_path) == slurp(four.csv_path);

    // A noisy configuration as well, so the seeds actually matter.
    ExperimentConfig n;
    n.scheme = SchemeKind::dd_standing_wave;
    n.zeta = 1e-3;
    n.fock_dim = 20;
    n.t_end_s = 100e-6;
    n.n_traj = 4;
    n.master_seed = 8;
    n.threads = 1;
    const RunOutcome n1 = run_experiment(n, scratch / "noisy_1.csv");
    n.threads = 3;
    const RunOutcome n3 = run_experiment(n, scratch / "noisy_3.csv");
    const bool same_noisy = slurp(n1.csv_path) == slurp(n3.csv_path);

    verdict(8, same_ideal && same_noisy, "CSV output is byte-identical across thread counts");
    detail("criterion-1 config, 1 vs 4 threads: %s (%.2f s + %.2f s)", same_ideal ? "identical" : "DIFFERENT",
           one.wall_time_s, four.wall_time_s);
    detail("noisy DD config, 1 vs 3 threads: %s", same_noisy ? "identical" : "DIFFERENT");
}

template <typename F>
void guarded(std::initializer_list<int> ids, F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        for (int id : ids) verdict(id, false, std::string("threw: ") + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path report_path = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_report.txt");
    report = std::fopen(report_path.c_str(), "w");
    const fs::path scratch = fs::temp_directory_path() / "qrmsim_acceptance";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    guarded({1, 2}, criteria_1_and_2);
    guarded({3}, criterion_3);
    guarded({4, 5}, criteria_4_and_5);
    guarded({6}, criterion_6);
    guarded({7}, [&] { criterion_7(scratch); });
    guarded({8}, [&] { criterion_8(scratch); });

    fs::remove_all(scratch);
    emit(std::string(failures == 0 ? "ALL PASS" : "FAILED") + ": " + std::to_string(failures) +
         " criterion failure(s)");
    if (report) std::fclose(report);
    return failures == 0 ? 0 : 1;
}
