#include "qrmsim/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#ifndef QRMSIM_VERSION_STRING
#define QRMSIM_VERSION_STRING "0.0.0"
#endif

namespace qrmsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view library_version() { return QRMSIM_VERSION_STRING; }

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::config, msg); }

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    const std::string_view t = trim(text);
    double v = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (!t.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || t.empty()) {
        config_error("config: key '" + std::string(key) + "' expects a number, got '" + std::string(t) + "'");
    }
    return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
    const std::string_view t = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        config_error("config: key '" + std::string(key) + "' expects an integer, got '" + std::string(t) + "'");
    }
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    const std::string_view t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    config_error("config: key '" + std::string(key) + "' expects true or false, got '" + std::string(t) + "'");
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    std::string_view rest = trim(text);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        if (!item.empty()) out.push_back(parse_double(key, item));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

std::string_view spin_name(InitialSpin s) {
    switch (s) {
        case InitialSpin::g: return "g";
        case InitialSpin::e: return "e";
        case InitialSpin::minus: return "minus";
    }
    return "g";
}

struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

Field number_field(std::string key, double ExperimentConfig::*m) {
    return {key, [m, key](ExperimentConfig& c, std::string_view v) { c.*m = parse_double(key, v); },
            [m](const ExperimentConfig& c) { return std::optional<std::string>(format_double(c.*m)); }};
}

Field optional_field(std::string key, std::optional<double> ExperimentConfig::*m) {
    return {key,
            [m, key](ExperimentConfig& c, std::string_view v) {
                if (trim(v).empty() || trim(v) == "none") c.*m = std::nullopt;
                else c.*m = parse_double(key, v);
            },
            [m](const ExperimentConfig& c) {
                return (c.*m) ? std::optional<std::string>(format_double(*(c.*m))) : std::nullopt;
            }};
}

template <typename Int>
Field int_field(std::string key, Int ExperimentConfig::*m) {
    return {key, [m, key](ExperimentConfig& c, std::string_view v) { c.*m = parse_int<Int>(key, v); },
            [m](const ExperimentConfig& c) { return std::optional<std::string>(std::to_string(c.*m)); }};
}

Field bool_field(std::string key, bool ExperimentConfig::*m) {
    return {key, [m, key](ExperimentConfig& c, std::string_view v) { c.*m = parse_bool(key, v); },
            [m](const ExperimentConfig& c) { return std::optional<std::string>(c.*m ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({"scheme",
                     [](ExperimentConfig& c, std::string_view v) {
                         try {
                             c.scheme = scheme_kind_from_string(trim(v));
                         } catch (const Error& e) {
                             config_error(std::string("config: ") + e.what());
                         }
                     },
                     [](const ExperimentConfig& c) { return std::optional<std::string>(to_string(c.scheme)); }});
        f.push_back(number_field("omega_hz", &ExperimentConfig::omega_hz));
        f.push_back(number_field("omega0_hz", &ExperimentConfig::omega0_hz));
        f.push_back(optional_field("lambda_hz", &ExperimentConfig::lambda_hz));
        f.push_back(number_field("nu_hz", &ExperimentConfig::nu_hz));
        f.push_back(int_field("fock_dim", &ExperimentConfig::fock_dim));
        f.push_back(int_field("fock_guard", &ExperimentConfig::fock_guard));
        f.push_back(number_field("rabi_hz", &ExperimentConfig::rabi_hz));
        f.push_back(number_field("eta", &ExperimentConfig::eta));
        f.push_back(number_field("omega_d_hz", &ExperimentConfig::omega_d_hz));
        f.push_back(number_field("eta_c", &ExperimentConfig::eta_c));
        f.push_back(bool_field("amplitude_noise_all_tones", &ExperimentConfig::amplitude_noise_all_tones));
        f.push_back(number_field("tau_s", &ExperimentConfig::tau_s));
        f.push_back(number_field("t2_s", &ExperimentConfig::t2_s));
        f.push_back(optional_field("diffusion", &ExperimentConfig::diffusion));
        f.push_back(number_field("zeta", &ExperimentConfig::zeta));
        f.push_back(number_field("tau_beta_s", &ExperimentConfig::tau_beta_s));
        f.push_back({"beta_init",
                     [](ExperimentConfig& c, std::string_view v) {
                         const auto t = trim(v);
                         if (t == "stationary") c.beta_stationary = true;
                         else if (t == "zero") c.beta_stationary = false;
                         else config_error("config: beta_init must be 'stationary' or 'zero'");
                     },
                     [](const ExperimentConfig& c) {
                         return std::optional<std::string>(c.beta_stationary ? "stationary" : "zero");
                     }});
        f.push_back({"qubit",
                     [](ExperimentConfig& c, std::string_view v) {
                         const auto t = trim(v);
                         if (t == "g") c.qubit = InitialSpin::g;
                         else if (t == "e") c.qubit = InitialSpin::e;
                         else if (t == "minus") c.qubit = InitialSpin::minus;
                         else config_error("config: qubit must be g, e or minus");
                     },
                     [](const ExperimentConfig& c) { return std::optional<std::string>(spin_name(c.qubit)); }});
        f.push_back(int_field("fock", &ExperimentConfig::fock));
        f.push_back(number_field("t_end_s", &ExperimentConfig::t_end_s));
        f.push_back(number_field("sample_interval_s", &ExperimentConfig::sample_interval_s));
        f.push_back(number_field("steps_per_period", &ExperimentConfig::steps_per_period));
        f.push_back(int_field("n_traj", &ExperimentConfig::n_traj));
        f.push_back(int_field("master_seed", &ExperimentConfig::master_seed));
        f.push_back(int_field("threads", &ExperimentConfig::threads));
        f.push_back({"zeta_list",
                     [](ExperimentConfig& c, std::string_view v) { c.zeta_list = parse_list("zeta_list", v); },
                     [](const ExperimentConfig& c) {
                         std::string s;
                         for (double z : c.zeta_list) s += (s.empty() ? "" : ",") + format_double(z);
                         return std::optional<std::string>(s);
                     }});
        f.push_back(int_field("noise_trajectories", &ExperimentConfig::noise_trajectories));
        f.push_back(number_field("noise_dt_s", &ExperimentConfig::noise_dt_s));
        f.push_back({"output", [](ExperimentConfig& c, std::string_view v) { c.output = std::string(trim(v)); },
                     [](const ExperimentConfig& c) { return std::optional<std::string>(c.output); }});
        return f;
    }();
    return table;
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
    const std::string_view k = trim(key);
    for (const Field& f : fields()) {
        if (f.key == k) {
            f.set(*this, value);
            return;
        }
    }
    config_error("config: unknown key '" + std::string(k) + "'");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Field& f : fields()) {
        if (auto v = f.get(*this)) out.emplace_back(f.key, std::move(*v));
    }
    return out;
}

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const Field& f : fields()) out.push_back(f.key);
        return out;
    }();
    return k;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string format_g17(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

ExperimentConfig from_metadata(std::string_view text, const std::string& origin) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        config_error(origin + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("config") || !doc["config"].is_object()) {
        config_error(origin + ": metadata has no \"config\" object");
    }
    ExperimentConfig cfg;
    for (const auto& [key, value] : doc["config"].items()) {
        if (value.is_null()) continue;
        if (value.is_string()) cfg.set(key, value.get<std::string>());
        else if (value.is_boolean()) cfg.set(key, value.get<bool>() ? "true" : "false");
        else if (value.is_number_unsigned()) cfg.set(key, std::to_string(value.get<std::uint64_t>()));
        else if (value.is_number_integer()) cfg.set(key, std::to_string(value.get<std::int64_t>()));
        else if (value.is_number_float()) cfg.set(key, format_double(value.get<double>()));
        else config_error(origin + ": unsupported value for '" + key + "'");
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& origin) {
    const std::string_view body = trim(text);
    if (!body.empty() && body.front() == '{') return from_metadata(body, origin);

    ExperimentConfig cfg;
    int line_no = 0;
    std::string_view rest = text;
    while (!rest.empty()) {
        ++line_no;
        const auto nl = rest.find('\n');
        std::string_view line = trim(rest.substr(0, nl));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error(origin + ":" + std::to_string(line_no) + ": malformed section header");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            config_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string_view value = line.substr(eq + 1);
        if (const auto hash = value.find(" #"); hash != std::string_view::npos) value = value.substr(0, hash);
        try {
            cfg.set(line.substr(0, eq), value);
        } catch (const Error& e) {
            config_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

namespace {

QrmParams resolve_target(const ExperimentConfig& c, std::vector<std::string>& notes) {
    QrmParams p;
    p.omega = kTwoPi * c.omega_hz;
    p.omega0 = kTwoPi * c.omega0_hz;
    if (c.scheme == SchemeKind::ideal) {
        p.lambda = kTwoPi * c.lambda_hz.value_or(1e3);
        return p;
    }
    const double divisor = c.scheme == SchemeKind::dd_traveling ? 4.0 : 2.0;
    p.lambda = c.eta * kTwoPi * c.rabi_hz / divisor;
    const char* relation = c.scheme == SchemeKind::dd_traveling ? "eta * rabi / 4" : "eta * rabi / 2";
    if (c.lambda_hz) {
        const double requested = kTwoPi * *c.lambda_hz;
        if (std::abs(requested - p.lambda) > 1e-9 * std::max(std::abs(p.lambda), 1.0)) {
            std::ostringstream msg;
            msg << "config: lambda_hz = " << *c.lambda_hz << " is inconsistent with " << relation << " = "
                << p.lambda / kTwoPi << " Hz for scheme " << to_string(c.scheme);
            config_error(msg.str());
        }
    } else {
        notes.push_back(std::string("lambda taken from ") + relation);
    }
    return p;
}

StateVector initial_state(const ExperimentConfig& c, const FockSpace& space) {
    require(c.fock >= 0 && c.fock < space.dim(), "config: fock index outside the truncated space", ErrorCode::config);
    const double s = 1.0 / std::sqrt(2.0);
    switch (c.qubit) {
        case InitialSpin::g: return basis_state(Qubit::g, c.fock, space);
        case InitialSpin::e: return basis_state(Qubit::e, c.fock, space);
        case InitialSpin::minus: return product_state(cplx{-s, 0.0}, cplx{s, 0.0}, c.fock, space);
    }
    return basis_state(Qubit::g, c.fock, space);
}

OuParams dephasing_process(const ExperimentConfig& c) {
    if (c.diffusion) return OuParams(c.tau_s, *c.diffusion);
    return ou_params_from_coherence(c.tau_s, c.t2_s);
}

void check_run_control(const ExperimentConfig& c) {
    require(c.n_traj >= 1, "config: n_traj must be >= 1", ErrorCode::config);
    require(c.threads >= 0, "config: threads must be >= 0", ErrorCode::config);
    require(c.t_end_s > 0.0 && std::isfinite(c.t_end_s), "config: t_end_s must be positive", ErrorCode::config);
    require(c.sample_interval_s > 0.0 && c.sample_interval_s <= c.t_end_s,
            "config: sample_interval_s must be in (0, t_end_s]", ErrorCode::config);
    const double ratio = c.t_end_s / c.sample_interval_s;
    require(std::abs(ratio - std::round(ratio)) < 1e-6, "config: t_end_s must be a multiple of sample_interval_s",
            ErrorCode::config);
    require(c.steps_per_period >= kMinStepsPerPeriod, "config: steps_per_period must be >= 100", ErrorCode::config);
    require(c.zeta >= 0.0, "config: zeta must be non-negative", ErrorCode::config);
    require(c.tau_beta_s > 0.0, "config: tau_beta_s must be positive", ErrorCode::config);
}

}  // namespace

ResolvedExperiment resolve(const ExperimentConfig& c) {
    check_run_control(c);
    ResolvedExperiment r;
    r.target = resolve_target(c, r.notes);

    IonSetup ion;
    ion.nu = kTwoPi * c.nu_hz;
    ion.space = FockSpace(c.fock_dim, c.fock_guard);
    ion.validate();

    OuParams dephasing = dephasing_process(c);
    if (c.scheme == SchemeKind::ideal && !dephasing.silent()) {
        dephasing = OuParams(dephasing.tau, 0.0);
        r.notes.push_back("dephasing disabled: the ideal scheme is noise-free");
    }
    if (c.zeta > 0.0) {
        if (is_dd(c.scheme)) {
            r.amplitude = AmplitudeNoiseParams{c.zeta, c.tau_beta_s, kTwoPi * (c.omega_d_hz + c.omega_hz)};
        } else {
            r.notes.push_back("zeta ignored: scheme " + std::string(to_string(c.scheme)) + " has no carrier tone");
        }
    }

    const double rabi = kTwoPi * c.rabi_hz;
    const double dd = kTwoPi * c.omega_d_hz;
    SchemeConfig scheme;
    switch (c.scheme) {
        case SchemeKind::ideal: scheme = ideal_scheme(r.target); break;
        case SchemeKind::standard: scheme = standard_tones(r.target, ion, rabi, c.eta); break;
        case SchemeKind::dd_standing_wave:
            scheme = dd_standing_wave_tones(r.target, ion, rabi, c.eta, dd, c.eta_c, r.amplitude);
            break;
        case SchemeKind::dd_traveling:
            scheme = dd_traveling_tones(r.target, ion, rabi, c.eta, dd, c.eta_c, r.amplitude);
            break;
    }
    scheme.amplitude_noise_all_tones = c.amplitude_noise_all_tones;

    r.regime = validate_regime(scheme, ion, dephasing);
    enforce_regime(r.regime);

    r.spec.scheme = std::move(scheme);
    r.spec.ion = ion;
    r.spec.dephasing = dephasing;
    r.spec.psi0_qrm = initial_state(c, ion.space);
    r.spec.integrator =
        IntegratorConfig::for_sampling(c.sample_interval_s, fastest_frequency(r.spec.scheme, ion), c.steps_per_period);
    r.spec.t_end = c.t_end_s;
    r.spec.beta_stationary_start = c.beta_stationary;
    return r;
}

std::string describe(const ExperimentConfig& c, const ResolvedExperiment& r) {
    std::ostringstream os;
    const auto& spec = r.spec;
    os << "scheme            " << to_string(spec.scheme.kind) << '\n';
    os << "target            omega = 2pi x " << r.target.omega / kTwoPi << " Hz, omega0 = 2pi x "
       << r.target.omega0 / kTwoPi << " Hz, lambda = 2pi x " << r.target.lambda / kTwoPi
       << " Hz (g = " << r.target.coupling_ratio() << ")\n";
    os << "fock space        N = " << spec.ion.space.dim() << ", guard = " << spec.ion.space.guard() << '\n';
    for (std::size_t j = 0; j < spec.scheme.tones.size(); ++j) {
        const auto& t = spec.scheme.tones[j];
        os << "tone " << j << "            detuning = 2pi x " << t.detuning / kTwoPi << " Hz, rabi = 2pi x "
           << t.rabi / kTwoPi << " Hz, eta = " << t.lamb_dicke << ", phase = " << t.phase
           << (t.amplitude_noise ? ", amplitude noise" : "") << '\n';
    }
    os << "dephasing         tau = " << spec.dephasing.tau << " s, c = " << spec.dephasing.diffusion
       << " s^-3, P_MF = " << spec.dephasing.noise_power() << " s^-2\n";
    if (r.amplitude) {
        os << "amplitude noise   zeta = " << r.amplitude->zeta << ", tau_beta = " << r.amplitude->tau_beta
           << " s, P_AF = " << r.amplitude->power() << " s^-2\n";
    }
    const auto steps = static_cast<long long>(spec.integrator.sample_every) * sample_count(spec.integrator, spec.t_end);
    os << "integrator        step = " << spec.integrator.step << " s, " << spec.integrator.sample_every
       << " steps per sample, " << steps << " steps per trajectory\n";
    os << "ensemble          n_traj = " << c.n_traj << ", master_seed = " << c.master_seed << '\n';
    if (r.regime.empty()) os << "regime            all conditions hold with ratio >= " << kRegimeWarnRatio << '\n';
    for (const auto& w : r.regime) {
        os << "regime warning    " << w.inequality << " (ratio " << w.ratio << ")\n";
    }
    for (const auto& n : r.notes) os << "note              " << n << '\n';
    return os.str();
}

void write_result_table(std::ostream& out, const EnsembleResult& res) {
    out << kResultHeader << '\n';
    const ObservableStats* cols[] = {&res.sigma_z, &res.phonons, &res.survival, &res.fidelity, &res.parity};
    std::string line;
    for (std::size_t s = 0; s < res.times.size(); ++s) {
        line = format_g17(res.times[s]);
        for (const ObservableStats* col : cols) {
            line += ',';
            line += format_g17(col->mean[s]);
            line += ',';
            line += format_g17(col->sem[s]);
        }
        line += '\n';
        out << line;
    }
}

fs::path metadata_path_for(const fs::path& csv_path) {
    fs::path p = csv_path;
    p += ".meta.json";
    return p;
}

namespace {

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json j = ordered_json::object();
    for (const auto& key : ExperimentConfig::keys()) j[key] = nullptr;
    for (const auto& [key, text] : c.entries()) {
        if (key == "scheme" || key == "beta_init" || key == "qubit" || key == "output" || key == "zeta_list") {
            j[key] = text;
        } else if (key == "amplitude_noise_all_tones") {
            j[key] = text == "true";
        } else if (key == "master_seed") {
            j[key] = c.master_seed;
        } else if (key == "fock_dim" || key == "fock_guard" || key == "fock" || key == "n_traj" || key == "threads" ||
                   key == "noise_trajectories") {
            j[key] = std::stoll(text);
        } else {
            const double v = parse_double(key, text);
            if (std::isfinite(v)) j[key] = v;
            else j[key] = text;
        }
    }
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write to " + path.string() + " failed");
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const fs::path& csv_path) {
    const auto start = std::chrono::steady_clock::now();
    const ResolvedExperiment r = resolve(config);

    RunOutcome out;
    out.csv_path = csv_path.empty() ? fs::path(config.output) : csv_path;
    out.metadata_path = metadata_path_for(out.csv_path);
    out.result = run_ensemble(r.spec, config.n_traj, config.master_seed, config.threads);
    out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const auto& w : r.regime) {
        out.warnings.push_back("regime: " + w.inequality + " (ratio " + format_double(w.ratio) + ")");
    }
    for (const auto& n : r.notes) out.warnings.push_back(n);
    for (const auto& w : out.result.warnings) out.warnings.push_back(w);

    std::ostringstream csv;
    write_result_table(csv, out.result);
    write_file(out.csv_path, csv.str());

    ordered_json meta;
    meta["program"] = "qrmsim";
    meta["version"] = std::string(library_version());
    meta["config"] = config_json(config);
    meta["resolved"] = {
        {"omega_rad_s", r.target.omega},
        {"omega0_rad_s", r.target.omega0},
        {"lambda_rad_s", r.target.lambda},
        {"integrator_step_s", r.spec.integrator.step},
        {"steps_per_sample", r.spec.integrator.sample_every},
        {"dephasing_diffusion_s3", r.spec.dephasing.diffusion},
        {"dephasing_power_s2", r.spec.dephasing.noise_power()},
        {"amplitude_power_s2", r.amplitude ? r.amplitude->power() : 0.0},
    };
    meta["seeds"] = {
        {"master_seed", config.master_seed},
        {"derivation", "xoshiro256** seeded with derive_seed(master_seed, trajectory_index, channel); "
                       "channel 1 = dephasing, 2 = amplitude"},
    };
    meta["n_traj"] = out.result.n_traj;
    meta["config_digest"] = out.result.config_digest;
    meta["wall_time_s"] = out.wall_time_s;
    meta["max_norm_drift"] = out.result.max_norm_drift;
    meta["renormalizations"] = out.result.renormalizations;
    meta["max_tail_population"] = out.result.max_tail_population;
    meta["warnings"] = out.warnings;
    meta["csv"] = out.csv_path.filename().string();
    write_file(out.metadata_path, meta.dump(2) + "\n");
    return out;
}

NoiseStatsReport noise_stats(const ExperimentConfig& c) {
    require(c.noise_trajectories >= 1, "config: noise_trajectories must be >= 1", ErrorCode::config);
    require(c.noise_dt_s > 0.0, "config: noise_dt_s must be positive", ErrorCode::config);
    require(c.t_end_s > c.noise_dt_s, "config: t_end_s must exceed noise_dt_s", ErrorCode::config);

    NoiseStatsReport rep;
    rep.n_traj = c.noise_trajectories;
    rep.dt = c.noise_dt_s;
    const auto length = static_cast<std::size_t>(std::llround(c.t_end_s / c.noise_dt_s)) + 1;
    rep.duration = static_cast<double>(length - 1) * c.noise_dt_s;

    std::vector<std::pair<std::string, OuParams>> channels;
    channels.emplace_back("dephasing xi", dephasing_process(c));
    if (c.zeta > 0.0) {
        channels.emplace_back("amplitude beta",
                              AmplitudeNoiseParams{c.zeta, c.tau_beta_s, kTwoPi * (c.omega_d_hz + c.omega_hz)}.process());
    }

    for (std::size_t ch = 0; ch < channels.size(); ++ch) {
        const auto& [name, params] = channels[ch];
        const NoiseChannel channel = ch == 0 ? NoiseChannel::dephasing : NoiseChannel::amplitude;
        std::vector<NoiseTrajectory> trajs;
        trajs.reserve(static_cast<std::size_t>(rep.n_traj));
        for (int k = 0; k < rep.n_traj; ++k) {
            trajs.push_back(generate_trajectory(params, c.noise_dt_s, length,
                                                derive_seed(c.master_seed, static_cast<std::uint64_t>(k), channel)));
        }
        NoiseChannelReport cr;
        cr.name = name;
        cr.params = params;
        cr.variance_target = params.noise_power();

        double sum = 0.0;
        double sum_sq = 0.0;
        std::size_t count = 0;
        for (const auto& t : trajs) {
            for (double x : t.samples) {
                sum += x;
                sum_sq += x * x;
            }
            count += t.samples.size();
        }
        const double mean = sum / static_cast<double>(count);
        cr.variance = count > 1 ? (sum_sq - static_cast<double>(count) * mean * mean) / static_cast<double>(count - 1)
                                : 0.0;

        auto lag_steps = [&](double lag) { return std::round(lag / c.noise_dt_s) * c.noise_dt_s; };
        cr.c0 = autocorrelation_estimate(trajs, 0.0);
        if (lag_steps(params.tau) < rep.duration) cr.c_tau = autocorrelation_estimate(trajs, lag_steps(params.tau));
        if (lag_steps(2.0 * params.tau) < rep.duration) {
            cr.c_2tau = autocorrelation_estimate(trajs, lag_steps(2.0 * params.tau));
        }
        if (rep.n_traj >= 2000) {
            cr.variance_ok = cr.variance_target == 0.0
                                 ? cr.variance == 0.0
                                 : std::abs(cr.variance / cr.variance_target - 1.0) <= 0.10;
        }
        rep.passed = rep.passed && cr.variance_ok;
        rep.channels.push_back(cr);
    }
    return rep;
}

std::string format_noise_stats(const NoiseStatsReport& rep) {
    std::ostringstream os;
    os.precision(6);
    os << "trajectories " << rep.n_traj << ", dt " << rep.dt << " s, duration " << rep.duration << " s\n";
    for (const auto& ch : rep.channels) {
        const double e1 = std::exp(-1.0);
        const double e2 = std::exp(-2.0);
        auto ratio = [&](double x) { return ch.c0 == 0.0 ? 0.0 : x / ch.c0; };
        os << '\n' << ch.name << ": tau = " << ch.params.tau << " s, c = " << ch.params.diffusion << " s^-3\n";
        os << "  quantity           estimate        target\n";
        os << "  variance       " << std::setw(14) << ch.variance << std::setw(14) << ch.variance_target
           << (ch.variance_ok ? "" : "   OUT OF TOLERANCE") << '\n';
        os << "  C(0)           " << std::setw(14) << ch.c0 << std::setw(14) << ch.variance_target << '\n';
        os << "  C(tau)         " << std::setw(14) << ch.c_tau << std::setw(14) << ch.variance_target * e1 << '\n';
        os << "  C(2 tau)       " << std::setw(14) << ch.c_2tau << std::setw(14) << ch.variance_target * e2 << '\n';
        os << "  C(tau)/C(0)    " << std::setw(14) << ratio(ch.c_tau) << std::setw(14) << e1 << '\n';
        os << "  C(2 tau)/C(0)  " << std::setw(14) << ratio(ch.c_2tau) << std::setw(14) << e2 << '\n';
    }
    if (rep.n_traj < 2000) os << "\nvariance tolerance not enforced below 2000 trajectories\n";
    return os.str();
}

double crossover_zeta(const ExperimentConfig& c) {
    const OuParams p = dephasing_process(c);
    const double carrier = kTwoPi * (c.omega_d_hz + c.omega_hz);
    require(carrier > 0.0, "crossover_zeta: carrier Rabi frequency must be positive", ErrorCode::config);
    return std::sqrt(p.noise_power()) / carrier;
}

SweepOutcome sweep_zeta(const ExperimentConfig& config, const std::vector<double>& zetas, const fs::path& out_dir) {
    require(is_dd(config.scheme), "sweep-zeta requires a DD scheme (dd_standing_wave or dd_traveling)",
            ErrorCode::config);
    for (double z : zetas) require(z >= 0.0 && std::isfinite(z), "sweep-zeta: zeta values must be >= 0");
    resolve(config);

    SweepOutcome out;
    out.zeta_star = crossover_zeta(config);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + out_dir.string() + ": " + ec.message());

    for (double z : zetas) {
        ExperimentConfig c = config;
        c.zeta = z;
        SweepRow row;
        row.zeta = z;
        row.csv_path = out_dir / ("zeta_" + format_double(z) + ".csv");
        const RunOutcome run = run_experiment(c, row.csv_path);
        row.fidelity_mean = run.result.fidelity.mean.back();
        row.fidelity_sem = run.result.fidelity.sem.back();
        out.rows.push_back(row);
    }

    std::ostringstream csv;
    csv << "kind,zeta,fidelity_mean,fidelity_sem\n";
    for (const auto& row : out.rows) {
        csv << "simulated," << format_g17(row.zeta) << ',' << format_g17(row.fidelity_mean) << ','
            << format_g17(row.fidelity_sem) << '\n';
    }
    csv << "crossover," << format_g17(out.zeta_star) << ",,\n";
    out.summary_path = out_dir / "summary.csv";
    write_file(out.summary_path, csv.str());
    return out;
}

}  // namespace qrmsim
