#include "qrmsim/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace qrmsim {

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::ideal: return "ideal";
        case SchemeKind::standard: return "standard";
        case SchemeKind::dd_traveling: return "dd_traveling";
        case SchemeKind::dd_standing_wave: return "dd_standing_wave";
    }
    return "unknown";
}

SchemeKind scheme_kind_from_string(std::string_view name) {
    if (name == "ideal") return SchemeKind::ideal;
    if (name == "standard") return SchemeKind::standard;
    if (name == "dd_traveling") return SchemeKind::dd_traveling;
    if (name == "dd_standing_wave") return SchemeKind::dd_standing_wave;
    throw Error(ErrorCode::config, "unknown scheme '" + std::string(name) +
                                       "' (expected ideal, standard, dd_traveling or dd_standing_wave)");
}

void LaserTone::validate() const {
    require(std::isfinite(detuning) && std::isfinite(rabi) && std::isfinite(lamb_dicke) && std::isfinite(phase),
            "LaserTone: non-finite field");
    require(rabi >= 0.0, "LaserTone: rabi must be non-negative");
    require(std::abs(lamb_dicke) < kMaxLambDicke, "LaserTone: |lamb_dicke| must be < 0.2 (Lamb-Dicke regime)");
}

void IonSetup::validate() const { require(nu > 0.0 && std::isfinite(nu), "IonSetup: nu must be positive"); }

std::optional<AmplitudeNoiseParams> SchemeConfig::amplitude_noise() const {
    for (const auto& tone : tones)
        if (tone.amplitude_noise) return tone.amplitude_noise;
    return std::nullopt;
}

namespace {

void require_coupling(const QrmParams& target, double expected, const char* rule) {
    const double tol = 1e-9 * std::max(std::abs(expected), 1.0);
    if (std::abs(target.lambda - expected) > tol) {
        std::ostringstream msg;
        msg << "inconsistent coupling: target lambda = " << target.lambda << " rad/s but " << rule << " = " << expected
            << " rad/s";
        throw Error(ErrorCode::config, msg.str());
    }
}

LaserTone make_tone(double detuning, double rabi, double eta, double phase) {
    LaserTone tone{detuning, rabi, eta, phase, std::nullopt};
    tone.validate();
    return tone;
}

SchemeConfig dd_common(SchemeKind kind, const QrmParams& target, const IonSetup& ion, double rabi, double eta,
                       double dd_drive, double carrier_eta, std::optional<AmplitudeNoiseParams> amp_noise) {
    target.validate();
    ion.validate();
    require(dd_drive > 0.0, "DD scheme: dd_drive must be positive");
    const double carrier_rabi = dd_drive + target.omega;
    require(carrier_rabi >= 0.0, "DD scheme: carrier Rabi frequency Omega_D + omega must be non-negative");

    SchemeConfig cfg;
    cfg.kind = kind;
    cfg.target = target;
    cfg.dd_drive = dd_drive;
    cfg.frame = FrameMap{kind, target.omega, target.omega0, dd_drive, true};

    LaserTone carrier = make_tone(0.0, carrier_rabi, carrier_eta, 0.0);
    if (amp_noise) {
        amp_noise->carrier_rabi = carrier_rabi;
        carrier.amplitude_noise = amp_noise;
    }
    cfg.tones.push_back(carrier);

    const double delta_r = dd_drive - target.omega0;
    const double delta_b = dd_drive + target.omega0;
    cfg.tones.push_back(make_tone(-ion.nu - delta_r, rabi, eta, 0.0));
    if (kind == SchemeKind::dd_standing_wave) cfg.tones.push_back(make_tone(-ion.nu - delta_r, rabi, -eta, kPi));
    cfg.tones.push_back(make_tone(ion.nu - delta_b, rabi, eta, 0.0));
    if (kind == SchemeKind::dd_standing_wave) cfg.tones.push_back(make_tone(ion.nu - delta_b, rabi, -eta, kPi));

    enforce_regime(validate_regime(cfg, ion));
    return cfg;
}

}  // namespace

SchemeConfig ideal_scheme(const QrmParams& target) {
    target.validate();
    SchemeConfig cfg;
    cfg.kind = SchemeKind::ideal;
    cfg.target = target;
    cfg.frame = FrameMap{SchemeKind::ideal, target.omega, target.omega0, 0.0, false};
    return cfg;
}

SchemeConfig standard_tones(const QrmParams& target, const IonSetup& ion, double rabi, double eta) {
    target.validate();
    ion.validate();
    require_coupling(target, eta * rabi / 2.0, "eta * Omega / 2");
    const double delta_r = target.omega - target.omega0;
    const double delta_b = target.omega + target.omega0;

    SchemeConfig cfg;
    cfg.kind = SchemeKind::standard;
    cfg.target = target;
    cfg.frame = FrameMap{SchemeKind::standard, target.omega, target.omega0, 0.0, false};
    cfg.tones.push_back(make_tone(-ion.nu - delta_r, rabi, eta, 1.5 * kPi));
    cfg.tones.push_back(make_tone(ion.nu - delta_b, rabi, eta, 1.5 * kPi));
    enforce_regime(validate_regime(cfg, ion));
    return cfg;
}

SchemeConfig dd_standing_wave_tones(const QrmParams& target, const IonSetup& ion, double rabi, double eta,
                                    double dd_drive, double carrier_eta,
                                    std::optional<AmplitudeNoiseParams> amp_noise) {
    require_coupling(target, eta * rabi / 2.0, "eta * Omega / 2");
    return dd_common(SchemeKind::dd_standing_wave, target, ion, rabi, eta, dd_drive, carrier_eta, amp_noise);
}

SchemeConfig dd_traveling_tones(const QrmParams& target, const IonSetup& ion, double rabi, double eta,
                                double dd_drive, double carrier_eta, std::optional<AmplitudeNoiseParams> amp_noise) {
    require_coupling(target, eta * rabi / 4.0, "eta * Omega / 4");
    return dd_common(SchemeKind::dd_traveling, target, ion, rabi, eta, dd_drive, carrier_eta, amp_noise);
}

QrmParams derive_target(const SchemeConfig& config, const IonSetup& ion) {
    switch (config.kind) {
        case SchemeKind::ideal: return config.target;
        case SchemeKind::standard: {
            require(config.tones.size() == 2, "standard scheme needs 2 tones");
            const auto& red = config.tones[0];
            const auto& blue = config.tones[1];
            const double delta_r = -ion.nu - red.detuning;
            const double delta_b = ion.nu - blue.detuning;
            return QrmParams{(delta_b + delta_r) / 2.0, (delta_b - delta_r) / 2.0, red.lamb_dicke * red.rabi / 2.0};
        }
        case SchemeKind::dd_traveling:
        case SchemeKind::dd_standing_wave: {
            const bool sw = config.kind == SchemeKind::dd_standing_wave;
            require(config.tones.size() == (sw ? 5u : 3u), "DD scheme has the wrong number of tones");
            require(config.dd_drive.has_value(), "DD scheme without dd_drive");
            const auto& carrier = config.tones[0];
            const auto& red = config.tones[1];
            const auto& blue = config.tones[sw ? 3 : 2];
            const double delta_r = -ion.nu - red.detuning;
            const double delta_b = ion.nu - blue.detuning;
            const double lambda = red.lamb_dicke * red.rabi / (sw ? 2.0 : 4.0);
            return QrmParams{carrier.rabi - *config.dd_drive, (delta_b - delta_r) / 2.0, lambda};
        }
    }
    throw Error(ErrorCode::internal, "derive_target: unknown scheme");
}

namespace {

double tone_rabi(const SchemeConfig& config, std::size_t j, double beta_value) {
    const auto& tone = config.tones[j];
    const bool noisy = tone.amplitude_noise.has_value() || config.amplitude_noise_all_tones;
    return noisy ? tone.rabi * (1.0 + beta_value) : tone.rabi;
}

}  // namespace

void hamiltonian_at(double t, const SchemeConfig& config, const IonSetup& ion, double xi_value, double beta_value,
                    Operator& out) {
    const FockSpace& space = ion.space;
    const int n = space.dim();
    if (config.kind == SchemeKind::ideal) {
        out = qrm_hamiltonian(config.target, space);
        out += 0.5 * xi_value * embed(pauli_z(), mode_identity(space));
        return;
    }
    out.setZero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        out(k, k) = -0.5 * xi_value;
        out(n + k, n + k) = 0.5 * xi_value;
    }
    for (std::size_t j = 0; j < config.tones.size(); ++j) {
        const auto& tone = config.tones[j];
        const Operator d_base = displacement(I * tone.lamb_dicke, space);
        const Operator d_t = rotate_displacement(d_base, ion.nu * t, space);
        const cplx c = 0.5 * tone_rabi(config, j, beta_value) * std::polar(1.0, -(tone.detuning * t + tone.phase));
        // s+ (x) D occupies the (e, g) block.
        out.block(n, 0, n, n) += c * d_t;
        out.block(0, n, n, n) += std::conj(c) * d_t.adjoint();
    }
}

Operator hamiltonian_at(double t, const SchemeConfig& config, const IonSetup& ion, double xi_value,
                        double beta_value) {
    Operator out;
    hamiltonian_at(t, config, ion, xi_value, beta_value, out);
    return out;
}

Operator dd_spin_rotation() {
    // (1 + i (sx + sy + sz)) / 2: rotation by -2pi/3 about (1,1,1), which
    // maps x -> z, y -> x, z -> y.
    return 0.5 * (spin_identity() + I * (pauli_x() + pauli_y() + pauli_z()));
}

namespace {

void apply_spin(const Operator& u, CVector& psi, int n) {
    for (int k = 0; k < n; ++k) {
        const cplx g = psi(k);
        const cplx e = psi(n + k);
        psi(k) = u(0, 0) * g + u(0, 1) * e;
        psi(n + k) = u(1, 0) * g + u(1, 1) * e;
    }
}

// exp(i angle sx / 2)
Operator x_rotation(double angle) {
    return std::cos(angle / 2.0) * spin_identity() + I * std::sin(angle / 2.0) * pauli_x();
}

void apply_mode_phase(CVector& psi, int n, double omega0_t) {
    for (int k = 0; k < n; ++k) {
        const cplx p = std::polar(1.0, -omega0_t * k);
        psi(k) *= p;
        psi(n + k) *= p;
    }
}

}  // namespace

StateVector to_qrm_frame(const StateVector& state, double t, const FrameMap& frame, const FockSpace& space) {
    require(state.size() == space.composite_dim(), "to_qrm_frame: dimension mismatch");
    const int n = space.dim();
    StateVector out = state;
    switch (frame.kind) {
        case SchemeKind::ideal: break;
        case SchemeKind::standard:
            // exp(-i (omega/2 sz + omega0 a^dag a) t)
            for (int k = 0; k < n; ++k) {
                out.amplitudes(k) *= std::polar(1.0, -(-0.5 * frame.omega + frame.omega0 * k) * t);
                out.amplitudes(n + k) *= std::polar(1.0, -(0.5 * frame.omega + frame.omega0 * k) * t);
            }
            break;
        case SchemeKind::dd_traveling:
        case SchemeKind::dd_standing_wave:
            // R exp(-i omega0 a^dag a t) exp(+i Omega_D t sx / 2)
            apply_spin(x_rotation(frame.dd_drive * t), out.amplitudes, n);
            apply_mode_phase(out.amplitudes, n, frame.omega0 * t);
            if (frame.spin_rotation) apply_spin(dd_spin_rotation(), out.amplitudes, n);
            break;
    }
    return out;
}

StateVector from_qrm_frame(const StateVector& state, double t, const FrameMap& frame, const FockSpace& space) {
    require(state.size() == space.composite_dim(), "from_qrm_frame: dimension mismatch");
    const int n = space.dim();
    StateVector out = state;
    switch (frame.kind) {
        case SchemeKind::ideal: break;
        case SchemeKind::standard:
            for (int k = 0; k < n; ++k) {
                out.amplitudes(k) *= std::polar(1.0, (-0.5 * frame.omega + frame.omega0 * k) * t);
                out.amplitudes(n + k) *= std::polar(1.0, (0.5 * frame.omega + frame.omega0 * k) * t);
            }
            break;
        case SchemeKind::dd_traveling:
        case SchemeKind::dd_standing_wave:
            if (frame.spin_rotation) apply_spin(dd_spin_rotation().adjoint(), out.amplitudes, n);
            apply_mode_phase(out.amplitudes, n, -frame.omega0 * t);
            apply_spin(x_rotation(-frame.dd_drive * t), out.amplitudes, n);
            break;
    }
    return out;
}

namespace {

void check_ratio(std::vector<RegimeWarning>& out, std::string inequality, double ratio) {
    if (!(ratio >= kRegimeWarnRatio)) {
        out.push_back({std::move(inequality), ratio, ratio < kRegimeErrorRatio ? Severity::error : Severity::warning});
    }
}

}  // namespace

std::vector<RegimeWarning> validate_regime(const SchemeConfig& config, const IonSetup& ion,
                                           const std::optional<OuParams>& noise) {
    std::vector<RegimeWarning> out;
    const QrmParams& target = config.target;
    switch (config.kind) {
        case SchemeKind::ideal: break;
        case SchemeKind::standard: {
            const double delta_r = std::abs(target.omega - target.omega0);
            const double delta_b = std::abs(target.omega + target.omega0);
            if (delta_r > 0.0) check_ratio(out, "sideband resolution nu >> |delta_r|", ion.nu / delta_r);
            if (delta_b > 0.0) check_ratio(out, "sideband resolution nu >> |delta_b|", ion.nu / delta_b);
            break;
        }
        case SchemeKind::dd_traveling:
        case SchemeKind::dd_standing_wave: {
            const double dd = config.dd_drive.value_or(0.0);
            // Sideband Rabi frequency and Lamb-Dicke factor from the red tone.
            const double rabi = config.tones.size() > 1 ? config.tones[1].rabi : 0.0;
            const double eta = config.tones.size() > 1 ? std::abs(config.tones[1].lamb_dicke) : 0.0;
            if (eta * rabi > 0.0) check_ratio(out, "second RWA Omega_D >> eta Omega", dd / (eta * rabi));
            const double minus = std::abs(dd - target.omega0);
            const double plus = std::abs(dd + target.omega0);
            if (minus > 0.0) check_ratio(out, "sideband resolution |Omega_D - omega0| << nu", ion.nu / minus);
            if (plus > 0.0) check_ratio(out, "sideband resolution |Omega_D + omega0| << nu", ion.nu / plus);
            if (rabi > 0.0) {
                check_ratio(out, "off-resonant carrier Omega_{r,b} << |Omega_D - nu|", std::abs(dd - ion.nu) / rabi);
            }
            if (noise && !noise->silent() && !config.tones.empty()) {
                check_ratio(out, "dressed-basis protection Omega_c > 1/(2 pi tau)",
                            config.tones[0].rabi * kTwoPi * noise->tau);
            }
            break;
        }
    }
    return out;
}

void enforce_regime(const std::vector<RegimeWarning>& warnings) {
    std::ostringstream msg;
    bool failed = false;
    for (const auto& w : warnings) {
        if (w.severity != Severity::error) continue;
        msg << (failed ? "; " : "regime violation: ") << w.inequality << " (ratio " << w.ratio << " < "
            << kRegimeErrorRatio << ")";
        failed = true;
    }
    if (failed) throw Error(ErrorCode::regime, msg.str());
}

double fastest_frequency(const SchemeConfig& config, const IonSetup& ion) {
    if (config.kind == SchemeKind::ideal) {
        const auto& p = config.target;
        const int n = ion.space.dim();
        return 0.5 * std::abs(p.omega) + p.omega0 * (n - 1) + 2.0 * p.lambda * std::sqrt(static_cast<double>(n));
    }
    double max_detuning = 0.0;
    double norm_scale = 0.0;
    for (const auto& tone : config.tones) {
        max_detuning = std::max(max_detuning, std::abs(tone.detuning));
        norm_scale += 0.5 * tone.rabi;
    }
    return ion.nu + max_detuning + norm_scale;
}

// ---------------------------------------------------------------------------
// HamiltonianAction

HamiltonianAction::HamiltonianAction(const SchemeConfig& config, const IonSetup& ion)
    : kind_(config.kind), target_(config.target), tones_(config.tones), nu_(ion.nu), dim_(ion.space.dim()) {
    for (std::size_t j = 0; j < tones_.size(); ++j) {
        noisy_.push_back(tones_[j].amplitude_noise.has_value() || config.amplitude_noise_all_tones);
        const double abs_eta = std::abs(tones_[j].lamb_dicke);
        if (abs_eta == 0.0) {
            plain_tones_.push_back(static_cast<int>(j));
            continue;
        }
        auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) { return g.abs_eta == abs_eta; });
        if (it == groups_.end()) {
            groups_.push_back(Group{abs_eta, {}, {}, {}, {}});
            it = groups_.end() - 1;
        }
        it->tones.push_back(static_cast<int>(j));
    }

    for (Group& group : groups_) {
        group.base = displacement_real(group.abs_eta, dim_);
        group.lo.assign(dim_, 0);
        group.hi.assign(dim_, -1);
        for (int m = 0; m < dim_; ++m) {
            for (int k = 0; k < dim_; ++k) {
                if (std::abs(group.base(m, k)) < kBandTolerance) continue;
                if (group.hi[m] < 0) group.lo[m] = k;
                group.hi[m] = k;
            }
        }
    }
    rotated_.resize(dim_);
    phase_.resize(dim_);
    acc_e_.resize(dim_);
    acc_g_.resize(dim_);
    coeff_.resize(tones_.size());
}

void HamiltonianAction::apply_qrm(double xi_value, const CVector& in, CVector& out) const {
    const int n = dim_;
    const double half_split = 0.5 * (target_.omega + xi_value);
    const double lambda = target_.lambda;
    for (int k = 0; k < n; ++k) {
        const double sk = std::sqrt(static_cast<double>(k));
        const double sk1 = std::sqrt(static_cast<double>(k + 1));
        cplx xg = 0.0;
        cplx xe = 0.0;
        if (k > 0) {
            xg += sk * in(k - 1);
            xe += sk * in(n + k - 1);
        }
        if (k + 1 < n) {
            xg += sk1 * in(k + 1);
            xe += sk1 * in(n + k + 1);
        }
        out(k) = (-half_split + target_.omega0 * k) * in(k) - lambda * xe;
        out(n + k) = (half_split + target_.omega0 * k) * in(n + k) - lambda * xg;
    }
}

void HamiltonianAction::apply(double t, double xi_value, double beta_value, const CVector& in, CVector& out) {
    const int n = dim_;
    out.resize(2 * n);
    if (kind_ == SchemeKind::ideal) {
        apply_qrm(xi_value, in, out);
        return;
    }

    for (std::size_t j = 0; j < tones_.size(); ++j) {
        const double rabi = noisy_[j] ? tones_[j].rabi * (1.0 + beta_value) : tones_[j].rabi;
        coeff_[j] = 0.5 * rabi * std::polar(1.0, -(tones_[j].detuning * t + tones_[j].phase));
    }

    // phase_(k) = e^{i theta k}, theta = nu t + pi/2
    const cplx step = std::polar(1.0, nu_ * t + 0.5 * kPi);
    phase_(0) = 1.0;
    for (int k = 1; k < n; ++k) phase_(k) = phase_(k - 1) * step;

    // u = Q^dag psi_g, w = Q^dag psi_e
    for (int k = 0; k < n; ++k) {
        const cplx u = std::conj(phase_(k)) * in(k);
        const cplx w = std::conj(phase_(k)) * in(n + k);
        rotated_[k] = {u.real(), u.imag(), w.real(), w.imag()};
    }

    acc_e_.setZero();
    acc_g_.setZero();
    for (int j : plain_tones_) {
        for (int k = 0; k < n; ++k) {
            const cplx u = std::conj(phase_(k)) * in(k);
            const cplx w = std::conj(phase_(k)) * in(n + k);
            acc_e_(k) += coeff_[j] * u;
            acc_g_(k) += std::conj(coeff_[j]) * w;
        }
    }

    for (const Group& group : groups_) {
        cplx cp = 0.0;
        cplx cm = 0.0;
        for (int j : group.tones) (tones_[j].lamb_dicke > 0.0 ? cp : cm) += coeff_[j];
        // R u = A + B and (Pi R Pi) u = Pi (A - B), with A from even and B
        // from odd input levels. D(-|eta|)-type tones use Pi R Pi, and the
        // adjoint of R is Pi R Pi.
        const cplx same_u = cp + cm;
        const cplx diff_u = cp - cm;
        const cplx same_w = std::conj(cp) + std::conj(cm);
        const cplx diff_w = std::conj(cm) - std::conj(cp);
        for (int m = 0; m < n; ++m) {
            const double* row = group.base.data() + static_cast<std::ptrdiff_t>(m) * n;
            std::array<double, 4> even{};
            std::array<double, 4> odd{};
            const int lo = group.lo[m];
            const int hi = group.hi[m];
            for (int k = lo + (lo & 1); k <= hi; k += 2) {
                for (int c = 0; c < 4; ++c) even[c] += row[k] * rotated_[k][c];
            }
            for (int k = lo + 1 - (lo & 1); k <= hi; k += 2) {
                for (int c = 0; c < 4; ++c) odd[c] += row[k] * rotated_[k][c];
            }
            const cplx a_u{even[0], even[1]};
            const cplx b_u{odd[0], odd[1]};
            const cplx a_w{even[2], even[3]};
            const cplx b_w{odd[2], odd[3]};
            if (m % 2 == 0) {
                acc_e_(m) += same_u * a_u + diff_u * b_u;
                acc_g_(m) += same_w * a_w + diff_w * b_w;
            } else {
                acc_e_(m) += diff_u * a_u + same_u * b_u;
                acc_g_(m) += diff_w * a_w + same_w * b_w;
            }
        }
    }

    const double half_xi = 0.5 * xi_value;
    for (int k = 0; k < n; ++k) {
        out(k) = -half_xi * in(k) + phase_(k) * acc_g_(k);
        out(n + k) = half_xi * in(n + k) + phase_(k) * acc_e_(k);
    }
}

}  // namespace qrmsim
