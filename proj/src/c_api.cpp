#include "qrmsim/qrmsim.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "qrmsim/experiment.hpp"

struct qrmsim_config {
    qrmsim::ExperimentConfig cfg;
};

struct qrmsim_report {
    std::string text;
    bool passed = true;
    std::map<std::string, std::vector<double>> columns;
    std::size_t rows = 0;
};

namespace {

thread_local std::string last_error;

qrmsim_status to_status(qrmsim::ErrorCode code) {
    switch (code) {
        case qrmsim::ErrorCode::invalid_argument: return QRMSIM_ERR_INVALID_ARGUMENT;
        case qrmsim::ErrorCode::config: return QRMSIM_ERR_CONFIG;
        case qrmsim::ErrorCode::regime: return QRMSIM_ERR_REGIME;
        case qrmsim::ErrorCode::truncation: return QRMSIM_ERR_TRUNCATION;
        case qrmsim::ErrorCode::io: return QRMSIM_ERR_IO;
        case qrmsim::ErrorCode::internal: return QRMSIM_ERR_INTERNAL;
    }
    return QRMSIM_ERR_INTERNAL;
}

template <typename F>
qrmsim_status guarded(F&& f) {
    try {
        f();
        return QRMSIM_OK;
    } catch (const qrmsim::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return QRMSIM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return QRMSIM_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown exception";
        return QRMSIM_ERR_INTERNAL;
    }
}

qrmsim_status null_argument(const char* what) {
    last_error = std::string(what) + " must not be NULL";
    return QRMSIM_ERR_INVALID_ARGUMENT;
}

void fill_columns(qrmsim_report& rep, const qrmsim::EnsembleResult& res) {
    rep.rows = res.times.size();
    rep.columns["t_s"] = res.times;
    auto add = [&](const char* name, const qrmsim::ObservableStats& s) {
        rep.columns[std::string(name) + "_mean"] = s.mean;
        rep.columns[std::string(name) + "_sem"] = s.sem;
    };
    add("sigma_z", res.sigma_z);
    add("n", res.phonons);
    add("survival", res.survival);
    add("fidelity", res.fidelity);
    add("parity", res.parity);
}

}  // namespace

extern "C" {

const char* qrmsim_version(void) { return qrmsim::library_version().data(); }

const char* qrmsim_status_name(qrmsim_status status) {
    switch (status) {
        case QRMSIM_OK: return "ok";
        case QRMSIM_ERR_INVALID_ARGUMENT: return "invalid argument";
        case QRMSIM_ERR_CONFIG: return "config error";
        case QRMSIM_ERR_REGIME: return "regime violation";
        case QRMSIM_ERR_TRUNCATION: return "truncation error";
        case QRMSIM_ERR_IO: return "i/o error";
        case QRMSIM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* qrmsim_last_error(void) { return last_error.c_str(); }

qrmsim_status qrmsim_config_create(qrmsim_config** out) {
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new qrmsim_config{}; });
}

qrmsim_status qrmsim_config_load(const char* path, qrmsim_config** out) {
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new qrmsim_config{qrmsim::load_config(path)}; });
}

qrmsim_status qrmsim_config_parse(const char* text, qrmsim_config** out) {
    if (!text) return null_argument("text");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new qrmsim_config{qrmsim::parse_config(text)}; });
}

void qrmsim_config_destroy(qrmsim_config* config) { delete config; }

qrmsim_status qrmsim_config_set(qrmsim_config* config, const char* key, const char* value) {
    if (!config) return null_argument("config");
    if (!key) return null_argument("key");
    if (!value) return null_argument("value");
    // Apply to a copy so a rejected value leaves the config untouched.
    return guarded([&] {
        qrmsim::ExperimentConfig next = config->cfg;
        next.set(key, value);
        config->cfg = std::move(next);
    });
}

qrmsim_status qrmsim_config_get(const qrmsim_config* config, const char* key, char* buffer, size_t size,
                                size_t* needed) {
    if (!config) return null_argument("config");
    if (!key) return null_argument("key");
    return guarded([&] {
        bool known = false;
        for (const auto& k : qrmsim::ExperimentConfig::keys()) known = known || k == key;
        if (!known) throw qrmsim::Error(qrmsim::ErrorCode::config, std::string("unknown key '") + key + "'");
        std::string value;
        for (const auto& [k, v] : config->cfg.entries()) {
            if (k == key) value = v;
        }
        if (needed) *needed = value.size() + 1;
        if (buffer && size > 0) {
            const std::size_t n = std::min(size - 1, value.size());
            std::memcpy(buffer, value.data(), n);
            buffer[n] = '\0';
        }
    });
}

qrmsim_status qrmsim_validate(const qrmsim_config* config, qrmsim_report** out) {
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const auto resolved = qrmsim::resolve(config->cfg);
        auto rep = std::make_unique<qrmsim_report>();
        rep->text = qrmsim::describe(config->cfg, resolved);
        *out = rep.release();
    });
}

qrmsim_status qrmsim_run(const qrmsim_config* config, const char* csv_path, qrmsim_report** out) {
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const auto run = qrmsim::run_experiment(config->cfg, csv_path ? std::filesystem::path(csv_path)
                                                                        : std::filesystem::path());
        auto rep = std::make_unique<qrmsim_report>();
        std::ostringstream os;
        os.precision(10);
        os << "wrote " << run.csv_path.string() << " and " << run.metadata_path.string() << '\n';
        os << "trajectories " << run.result.n_traj << ", samples " << run.result.times.size() << ", wall time "
           << run.wall_time_s << " s\n";
        os << "final fidelity " << run.result.fidelity.mean.back() << " +- " << run.result.fidelity.sem.back()
           << ", survival " << run.result.survival.mean.back() << '\n';
        os << "max norm drift " << run.result.max_norm_drift << ", max tail population "
           << run.result.max_tail_population << '\n';
        for (const auto& w : run.warnings) os << "warning: " << w << '\n';
        rep->text = os.str();
        fill_columns(*rep, run.result);
        *out = rep.release();
    });
}

qrmsim_status qrmsim_noise_stats(const qrmsim_config* config, qrmsim_report** out) {
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const auto stats = qrmsim::noise_stats(config->cfg);
        auto rep = std::make_unique<qrmsim_report>();
        rep->text = qrmsim::format_noise_stats(stats);
        rep->passed = stats.passed;
        *out = rep.release();
    });
}

qrmsim_status qrmsim_sweep_zeta(const qrmsim_config* config, const double* zetas, size_t n_zetas,
                                const char* out_dir, qrmsim_report** out) {
    if (!config) return null_argument("config");
    if (!zetas && n_zetas > 0) return null_argument("zetas");
    if (!out_dir) return null_argument("out_dir");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const std::vector<double> list(zetas, zetas + n_zetas);
        const auto sweep = qrmsim::sweep_zeta(config->cfg, list, out_dir);
        auto rep = std::make_unique<qrmsim_report>();
        std::ostringstream os;
        os.precision(10);
        for (const auto& row : sweep.rows) {
            os << "zeta " << row.zeta << ": fidelity at t_end " << row.fidelity_mean << " +- " << row.fidelity_sem
               << " (" << row.csv_path.string() << ")\n";
        }
        os << "crossover zeta* = 1/(Omega_c sqrt(tau T2)) = " << sweep.zeta_star << '\n';
        os << "summary " << sweep.summary_path.string() << '\n';
        rep->text = os.str();
        rep->rows = sweep.rows.size();
        for (const auto& row : sweep.rows) {
            rep->columns["zeta"].push_back(row.zeta);
            rep->columns["fidelity_mean"].push_back(row.fidelity_mean);
            rep->columns["fidelity_sem"].push_back(row.fidelity_sem);
        }
        rep->columns["zeta_star"] = {sweep.zeta_star};
        *out = rep.release();
    });
}

qrmsim_status qrmsim_crossover_zeta(const qrmsim_config* config, double* out) {
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    return guarded([&] { *out = qrmsim::crossover_zeta(config->cfg); });
}

const char* qrmsim_report_text(const qrmsim_report* report) { return report ? report->text.c_str() : ""; }

int qrmsim_report_passed(const qrmsim_report* report) { return report && report->passed ? 1 : 0; }

size_t qrmsim_report_rows(const qrmsim_report* report) { return report ? report->rows : 0; }

qrmsim_status qrmsim_report_column(const qrmsim_report* report, const char* column, double* dst, size_t capacity,
                                   size_t* written) {
    if (!report) return null_argument("report");
    if (!column) return null_argument("column");
    if (!dst && capacity > 0) return null_argument("dst");
    const auto it = report->columns.find(column);
    if (it == report->columns.end()) {
        last_error = std::string("report has no column '") + column + "'";
        return QRMSIM_ERR_INVALID_ARGUMENT;
    }
    const std::size_t n = std::min(capacity, it->second.size());
    std::copy_n(it->second.begin(), n, dst);
    if (written) *written = n;
    return QRMSIM_OK;
}

void qrmsim_report_destroy(qrmsim_report* report) { delete report; }

}  // extern "C"
