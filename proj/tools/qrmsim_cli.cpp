// qrmsim command-line front end. Uses only the C interface.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrmsim/qrmsim.h"

namespace {

constexpr int kExitTolerance = 10;

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<int> trajectories;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& out_help) {
    cmd->add_option("--config", o.config, "experiment config (key = value file or run metadata JSON)")
        ->envname("QRMSIM_CONFIG");
    if (!out_help.empty()) cmd->add_option("--out", o.out, out_help)->envname("QRMSIM_OUT");
    cmd->add_option("--trajectories", o.trajectories, "number of trajectories")->envname("QRMSIM_TRAJECTORIES");
    cmd->add_option("--seed", o.seed, "master seed")->envname("QRMSIM_SEED");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = one per hardware thread")
        ->envname("QRMSIM_THREADS");
    cmd->add_option("--set", o.sets, "override a config key, as key=value (repeatable)");
}

int fail(qrmsim_status status) {
    std::fprintf(stderr, "qrmsim: %s: %s\n", qrmsim_status_name(status), qrmsim_last_error());
    return static_cast<int>(status);
}

class Config {
public:
    ~Config() { qrmsim_config_destroy(handle_); }
    qrmsim_config* get() const { return handle_; }
    qrmsim_config** put() { return &handle_; }

private:
    qrmsim_config* handle_ = nullptr;
};

class Report {
public:
    ~Report() { qrmsim_report_destroy(handle_); }
    qrmsim_report* get() const { return handle_; }
    qrmsim_report** put() { return &handle_; }

private:
    qrmsim_report* handle_ = nullptr;
};

// Loads the config and applies overrides: --set first, then the dedicated flags.
qrmsim_status prepare(const CommonOptions& o, const char* trajectories_key, Config& cfg) {
    qrmsim_status st = o.config.empty() ? qrmsim_config_create(cfg.put()) : qrmsim_config_load(o.config.c_str(), cfg.put());
    if (st != QRMSIM_OK) return st;
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        const std::string key = eq == std::string::npos ? kv : kv.substr(0, eq);
        const std::string value = eq == std::string::npos ? std::string() : kv.substr(eq + 1);
        if ((st = qrmsim_config_set(cfg.get(), key.c_str(), value.c_str())) != QRMSIM_OK) return st;
    }
    if (o.trajectories) {
        st = qrmsim_config_set(cfg.get(), trajectories_key, std::to_string(*o.trajectories).c_str());
        if (st != QRMSIM_OK) return st;
    }
    if (o.seed) {
        if ((st = qrmsim_config_set(cfg.get(), "master_seed", std::to_string(*o.seed).c_str())) != QRMSIM_OK) return st;
    }
    if (o.threads) {
        if ((st = qrmsim_config_set(cfg.get(), "threads", std::to_string(*o.threads).c_str())) != QRMSIM_OK) return st;
    }
    return QRMSIM_OK;
}

std::vector<double> config_zetas(const Config& cfg) {
    size_t needed = 0;
    qrmsim_config_get(cfg.get(), "zeta_list", nullptr, 0, &needed);
    std::string text(needed, '\0');
    qrmsim_config_get(cfg.get(), "zeta_list", text.data(), text.size(), nullptr);
    text.resize(needed > 0 ? needed - 1 : 0);
    std::vector<double> out;
    for (const auto& item : CLI::detail::split(text, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trapped-ion quantum Rabi model simulator"};
    app.set_version_flag("--version", std::string(qrmsim_version()));
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "run a Monte Carlo ensemble and write the result table");
    add_common(run, run_opts, "result CSV path (metadata goes to <path>.meta.json)");

    CommonOptions noise_opts;
    auto* noise = app.add_subcommand("noise-stats", "check the generated noise against its closed-form statistics");
    add_common(noise, noise_opts, "");

    CommonOptions sweep_opts;
    std::vector<double> zetas;
    bool zetas_given = false;
    auto* sweep = app.add_subcommand("sweep-zeta", "sweep the amplitude-noise strength zeta for a DD scheme");
    add_common(sweep, sweep_opts, "output directory");
    sweep->add_option("--zetas", zetas, "comma-separated zeta values (default: zeta_list from the config)")
        ->delimiter(',')
        ->envname("QRMSIM_ZETAS");

    CommonOptions validate_opts;
    auto* validate = app.add_subcommand("validate", "resolve the config and check the regime conditions");
    add_common(validate, validate_opts, "");

    CLI11_PARSE(app, argc, argv);
    zetas_given = sweep->count("--zetas") > 0 || !zetas.empty();

    Config cfg;
    Report rep;
    qrmsim_status st = QRMSIM_OK;

    if (*run) {
        if ((st = prepare(run_opts, "n_traj", cfg)) != QRMSIM_OK) return fail(st);
        st = qrmsim_run(cfg.get(), run_opts.out.empty() ? nullptr : run_opts.out.c_str(), rep.put());
        if (st != QRMSIM_OK) return fail(st);
        std::fputs(qrmsim_report_text(rep.get()), stdout);
        return 0;
    }
    if (*noise) {
        if ((st = prepare(noise_opts, "noise_trajectories", cfg)) != QRMSIM_OK) return fail(st);
        if ((st = qrmsim_noise_stats(cfg.get(), rep.put())) != QRMSIM_OK) return fail(st);
        std::fputs(qrmsim_report_text(rep.get()), stdout);
        if (!qrmsim_report_passed(rep.get())) {
            std::fprintf(stderr, "qrmsim: noise variance outside the 10%% tolerance\n");
            return kExitTolerance;
        }
        return 0;
    }
    if (*sweep) {
        if ((st = prepare(sweep_opts, "n_traj", cfg)) != QRMSIM_OK) return fail(st);
        if (!zetas_given) zetas = config_zetas(cfg);
        const std::string dir = sweep_opts.out.empty() ? std::string("zeta_sweep") : sweep_opts.out;
        st = qrmsim_sweep_zeta(cfg.get(), zetas.data(), zetas.size(), dir.c_str(), rep.put());
        if (st != QRMSIM_OK) return fail(st);
        std::fputs(qrmsim_report_text(rep.get()), stdout);
        return 0;
    }
    if (*validate) {
        if ((st = prepare(validate_opts, "n_traj", cfg)) != QRMSIM_OK) return fail(st);
        if ((st = qrmsim_validate(cfg.get(), rep.put())) != QRMSIM_OK) return fail(st);
        std::fputs(qrmsim_report_text(rep.get()), stdout);
        std::puts("config OK");
        return 0;
    }
    return 0;
}
