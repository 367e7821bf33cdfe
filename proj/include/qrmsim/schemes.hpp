#pragma once

// Laser-tone configurations that realize the Rabi model with a trapped ion,
// the optical-RWA Hamiltonian they generate, and the frame maps that relate
// simulated states to the ideal-model picture.
//
// The simulated Hamiltonian (interaction picture of the qubit splitting and
// the trap frequency nu) is
//
//   H(t) = xi(t)/2 sz + sum_j Omega_j/2 [ s+ D(i eta_j e^{i nu t}) e^{-i Delta_j t} e^{-i phi_j} + h.c. ]
//
// with Delta_j = omega_j - omega_I the detuning of tone j from the qubit.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrmsim/hilbert.hpp"
#include "qrmsim/ideal_qrm.hpp"
#include "qrmsim/noise.hpp"

namespace qrmsim {

enum class SchemeKind { ideal, standard, dd_traveling, dd_standing_wave };

std::string_view to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(std::string_view name);
inline bool is_dd(SchemeKind kind) { return kind == SchemeKind::dd_traveling || kind == SchemeKind::dd_standing_wave; }

/// Largest |eta| accepted as Lamb-Dicke regime.
inline constexpr double kMaxLambDicke = 0.2;

struct LaserTone {
    double detuning = 0.0;    // rad/s, omega_j - omega_I
    double rabi = 0.0;        // rad/s
    double lamb_dicke = 0.0;  // signed; the sign encodes propagation direction
    double phase = 0.0;       // rad
    std::optional<AmplitudeNoiseParams> amplitude_noise;

    void validate() const;
};

struct IonSetup {
    double nu = kTwoPi * 1.5e6;
    FockSpace space{60, 15};

    void validate() const;
};

/// Transformation from the simulated state to the ideal-model picture.
struct FrameMap {
    SchemeKind kind = SchemeKind::ideal;
    double omega = 0.0;
    double omega0 = 0.0;
    double dd_drive = 0.0;
    bool spin_rotation = false;
};

struct SchemeConfig {
    SchemeKind kind = SchemeKind::ideal;
    std::vector<LaserTone> tones;
    QrmParams target;
    FrameMap frame;
    std::optional<double> dd_drive;
    /// Apply beta(t) to every tone instead of only the carrier.
    bool amplitude_noise_all_tones = false;

    /// The amplitude noise carried by the tone list, if any.
    std::optional<AmplitudeNoiseParams> amplitude_noise() const;
};

SchemeConfig ideal_scheme(const QrmParams& target);

/// Red and blue detuned sidebands with phases 3pi/2; requires lambda = eta Omega / 2.
SchemeConfig standard_tones(const QrmParams& target, const IonSetup& ion, double rabi, double eta);

/// Carrier plus standing-wave red and blue sideband pairs.
SchemeConfig dd_standing_wave_tones(const QrmParams& target, const IonSetup& ion, double rabi, double eta,
                                    double dd_drive, double carrier_eta,
                                    std::optional<AmplitudeNoiseParams> amp_noise = std::nullopt);

/// Carrier plus single traveling-wave red and blue sidebands; requires
/// lambda = eta Omega / 4.
SchemeConfig dd_traveling_tones(const QrmParams& target, const IonSetup& ion, double rabi, double eta,
                                double dd_drive, double carrier_eta,
                                std::optional<AmplitudeNoiseParams> amp_noise = std::nullopt);

/// Recover (omega, omega0, lambda) from the tone list.
QrmParams derive_target(const SchemeConfig& config, const IonSetup& ion);

/// Dense H(t). beta_value scales the Rabi frequency of the noisy tones.
Operator hamiltonian_at(double t, const SchemeConfig& config, const IonSetup& ion, double xi_value,
                        double beta_value);
void hamiltonian_at(double t, const SchemeConfig& config, const IonSetup& ion, double xi_value, double beta_value,
                    Operator& out);

/// Fixed spin unitary with R sx R^dag = sz and R sy R^dag = sx.
Operator dd_spin_rotation();

StateVector to_qrm_frame(const StateVector& state, double t, const FrameMap& frame, const FockSpace& space);
/// Inverse of to_qrm_frame.
StateVector from_qrm_frame(const StateVector& state, double t, const FrameMap& frame, const FockSpace& space);

enum class Severity { warning, error };

struct RegimeWarning {
    std::string inequality;
    double ratio = 0.0;
    Severity severity = Severity::warning;
};

/// Ratio below which a ">>" condition is reported.
inline constexpr double kRegimeWarnRatio = 10.0;
/// Ratio below which it is a hard error.
inline constexpr double kRegimeErrorRatio = 2.0;

std::vector<RegimeWarning> validate_regime(const SchemeConfig& config, const IonSetup& ion,
                                           const std::optional<OuParams>& noise = std::nullopt);

/// Throws Error(regime) naming every hard violation.
void enforce_regime(const std::vector<RegimeWarning>& warnings);

/// Fastest angular frequency of the simulated dynamics: nu + max |Delta_j|
/// plus the Hamiltonian norm scale. For the ideal kind, a bound on ||H||.
double fastest_frequency(const SchemeConfig& config, const IonSetup& ion);

/// Magnitude below which base displacement entries are dropped.
inline constexpr double kBandTolerance = 1e-18;

/// Matrix-free application of H(t) to a state. Tones sharing |eta| are
/// summed into one real base displacement D(|eta|) conjugated by the
/// diagonal phase diag(e^{i(nu t + pi/2) n}); the -eta partner of a
/// standing-wave pair reuses it through the Fock parity. Entries of
/// D(|eta|) below kBandTolerance are skipped. Owns scratch buffers, so one
/// instance per trajectory worker.

class HamiltonianAction {
public:
    HamiltonianAction(const SchemeConfig& config, const IonSetup& ion);

    /// out = H(t) in.
    void apply(double t, double xi_value, double beta_value, const CVector& in, CVector& out);

    int dim() const { return dim_; }

private:
    struct Group {
        double abs_eta = 0.0;
        std::vector<int> tones;  // indices into tones_
        // Row-major D(|eta|); row m is used only on columns [lo[m], hi[m]].
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> base;
        std::vector<int> lo;
        std::vector<int> hi;
    };

    void apply_qrm(double xi_value, const CVector& in, CVector& out) const;

    SchemeKind kind_;
    QrmParams target_;
    std::vector<LaserTone> tones_;
    std::vector<bool> noisy_;
    std::vector<Group> groups_;
    std::vector<int> plain_tones_;  // eta == 0
    double nu_;
    int dim_;
    // Scratch. Row k of rotated_ holds (Re u_k, Im u_k, Re w_k, Im w_k).
    std::vector<std::array<double, 4>> rotated_;
    CVector phase_;
    CVector acc_e_;
    CVector acc_g_;
    std::vector<cplx> coeff_;
};

}  // namespace qrmsim
