#pragma once

// Experiment descriptions read from key=value files, and the runners behind
// the command-line subcommands: ensemble runs, noise diagnostics and the
// amplitude-noise sweep.
//
// Frequencies are entered in Hz (keys ending in _hz) and times in seconds
// (keys ending in _s). The 2 pi factor is applied when the run is assembled.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrmsim/dynamics.hpp"
#include "qrmsim/noise.hpp"
#include "qrmsim/schemes.hpp"

namespace qrmsim {

std::string_view library_version();

enum class InitialSpin { g, e, minus };  // minus = (|e> - |g>)/sqrt2

struct ExperimentConfig {
    SchemeKind scheme = SchemeKind::standard;

    double omega_hz = 0.0;
    double omega0_hz = 1e3;
    std::optional<double> lambda_hz;  // derived from the tones when absent

    double nu_hz = 1.5e6;
    int fock_dim = 60;
    int fock_guard = 15;

    double rabi_hz = 50e3;
    double eta = 0.04;
    double omega_d_hz = 200e3;
    double eta_c = 0.01;
    bool amplitude_noise_all_tones = false;

    double tau_s = 100e-6;
    double t2_s = 3e-3;
    std::optional<double> diffusion;  // s^-3, overrides t2_s
    double zeta = 0.0;
    double tau_beta_s = 1e-3;
    bool beta_stationary = true;

    InitialSpin qubit = InitialSpin::g;
    int fock = 0;

    double t_end_s = 6e-3;
    double sample_interval_s = 5e-6;
    double steps_per_period = kDefaultStepsPerPeriod;
    int n_traj = 100;
    std::uint64_t master_seed = 1;
    int threads = 0;

    std::vector<double> zeta_list;
    int noise_trajectories = 2000;
    double noise_dt_s = 1e-6;

    std::string output = "qrmsim_result.csv";

    /// Set one key from its text form. Throws Error(config) on an unknown
    /// key or a malformed value.
    void set(std::string_view key, std::string_view value);

    /// Every key with its current value, in a fixed order. Absent optional
    /// values are omitted. Feeding the pairs back through set() reproduces
    /// the config exactly.
    std::vector<std::pair<std::string, std::string>> entries() const;

    static const std::vector<std::string>& keys();
};

/// Parse `key = value` lines. `[section]` headers, blank lines and lines
/// starting with '#' or ';' are ignored. A file whose first non-blank
/// character is '{' is read as run metadata and its "config" object is used.
ExperimentConfig parse_config(std::string_view text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything a run needs, resolved and validated.
struct ResolvedExperiment {
    RunSpec spec;
    QrmParams target;                         // rad/s
    std::optional<AmplitudeNoiseParams> amplitude;
    std::vector<RegimeWarning> regime;        // non-fatal findings
    std::vector<std::string> notes;
};

/// Builds the scheme, noise processes, initial state and integrator.
/// Hard regime violations throw Error(regime).
ResolvedExperiment resolve(const ExperimentConfig& config);

/// Human-readable summary of a resolved experiment.
std::string describe(const ExperimentConfig& config, const ResolvedExperiment& resolved);

inline constexpr const char* kResultHeader =
    "t_s,sigma_z_mean,sigma_z_sem,n_mean,n_sem,survival_mean,survival_sem,fidelity_mean,fidelity_sem,"
    "parity_mean,parity_sem";

/// Locale-independent shortest round-trip text for a double.
std::string format_double(double value);
/// Fixed 17-significant-digit text, as used in result tables.
std::string format_g17(double value);

void write_result_table(std::ostream& out, const EnsembleResult& result);

struct RunOutcome {
    EnsembleResult result;
    std::filesystem::path csv_path;
    std::filesystem::path metadata_path;
    double wall_time_s = 0.0;
    std::vector<std::string> warnings;
};

/// Metadata file written next to a result table.
std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path);

/// Runs the ensemble and writes the CSV plus its metadata. An empty
/// `csv_path` uses config.output.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& csv_path = {});

struct NoiseChannelReport {
    std::string name;
    OuParams params;
    double variance = 0.0;
    double variance_target = 0.0;
    double c0 = 0.0;
    double c_tau = 0.0;
    double c_2tau = 0.0;
    bool variance_ok = true;
};

struct NoiseStatsReport {
    int n_traj = 0;
    double dt = 0.0;
    double duration = 0.0;
    std::vector<NoiseChannelReport> channels;
    /// True unless a variance is off by more than 10% with >= 2000 trajectories.
    bool passed = true;
};

NoiseStatsReport noise_stats(const ExperimentConfig& config);
std::string format_noise_stats(const NoiseStatsReport& report);

struct SweepRow {
    double zeta = 0.0;
    double fidelity_mean = 0.0;
    double fidelity_sem = 0.0;
    std::filesystem::path csv_path;
};

struct SweepOutcome {
    std::vector<SweepRow> rows;
    double zeta_star = 0.0;
    std::filesystem::path summary_path;
};

/// zeta* = 1 / (Omega_c sqrt(tau T2)) = sqrt(P_MF) / Omega_c.
double crossover_zeta(const ExperimentConfig& config);

/// Writes one result table per entry of `zetas` and summary.csv into
/// `out_dir`. Requires a DD scheme.
SweepOutcome sweep_zeta(const ExperimentConfig& config, const std::vector<double>& zetas,
                        const std::filesystem::path& out_dir);

}  // namespace qrmsim
