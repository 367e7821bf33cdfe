#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "qrmsim/qrmsim.h"

namespace fs = std::filesystem;

TEST_CASE("version and status names") {
    CHECK(std::strlen(qrmsim_version()) > 0);
    CHECK(std::string(qrmsim_status_name(QRMSIM_OK)) == "ok");
    CHECK(std::string(qrmsim_status_name(QRMSIM_ERR_REGIME)).find("regime") != std::string::npos);
}

TEST_CASE("config handles") {
    qrmsim_config* cfg = nullptr;
    REQUIRE(qrmsim_config_create(&cfg) == QRMSIM_OK);
    REQUIRE(cfg != nullptr);

    CHECK(qrmsim_config_set(cfg, "scheme", "dd_standing_wave") == QRMSIM_OK);
    size_t needed = 0;
    CHECK(qrmsim_config_get(cfg, "scheme", nullptr, 0, &needed) == QRMSIM_OK);
    CHECK(needed == std::strlen("dd_standing_wave") + 1);
    char small[4];
    CHECK(qrmsim_config_get(cfg, "scheme", small, sizeof small, nullptr) == QRMSIM_OK);
    CHECK(std::string(small) == "dd_");
    std::vector<char> buf(needed);
    CHECK(qrmsim_config_get(cfg, "scheme", buf.data(), buf.size(), nullptr) == QRMSIM_OK);
    CHECK(std::string(buf.data()) == "dd_standing_wave");

    CHECK(qrmsim_config_set(cfg, "bogus", "1") == QRMSIM_ERR_CONFIG);
    CHECK(std::string(qrmsim_last_error()).find("bogus") != std::string::npos);
    CHECK(qrmsim_config_get(cfg, "bogus", nullptr, 0, &needed) == QRMSIM_ERR_CONFIG);
    CHECK(qrmsim_config_set(cfg, "fock_dim", "many") == QRMSIM_ERR_CONFIG);
    CHECK(qrmsim_config_set(nullptr, "fock_dim", "10") == QRMSIM_ERR_INVALID_ARGUMENT);
    CHECK(qrmsim_config_create(nullptr) == QRMSIM_ERR_INVALID_ARGUMENT);

    double zeta_star = 0.0;
    CHECK(qrmsim_crossover_zeta(cfg, &zeta_star) == QRMSIM_OK);
    CHECK(std::abs(zeta_star - 1.4528e-3) < 1e-7);

    qrmsim_report* rep = nullptr;
    CHECK(qrmsim_validate(cfg, &rep) == QRMSIM_OK);
    CHECK(std::string(qrmsim_report_text(rep)).find("dd_standing_wave") != std::string::npos);
    CHECK(qrmsim_report_rows(rep) == 0);
    qrmsim_report_destroy(rep);

    CHECK(qrmsim_config_set(cfg, "omega_d_hz", "1000") == QRMSIM_OK);
    rep = nullptr;
    CHECK(qrmsim_validate(cfg, &rep) == QRMSIM_ERR_REGIME);
    CHECK(rep == nullptr);
    CHECK(std::string(qrmsim_last_error()).find("Omega_D") != std::string::npos);
    qrmsim_config_destroy(cfg);

    CHECK(qrmsim_config_load("/nonexistent/file.ini", &cfg) == QRMSIM_ERR_IO);
    CHECK(qrmsim_config_parse("lambda_hz = 900", &cfg) == QRMSIM_OK);
    CHECK(qrmsim_validate(cfg, &rep) == QRMSIM_ERR_CONFIG);
    qrmsim_config_destroy(cfg);
}

TEST_CASE("run through the c interface") {
    const fs::path dir = fs::temp_directory_path() / "qrmsim_test_c_api";
    fs::remove_all(dir);
    fs::create_directories(dir);
    qrmsim_config* cfg = nullptr;
    REQUIRE(qrmsim_config_parse("scheme = ideal\nfock_dim = 40\nt_end_s = 1e-3\nn_traj = 1\n", &cfg) == QRMSIM_OK);
    const std::string csv = (dir / "ideal.csv").string();
    qrmsim_report* rep = nullptr;
    REQUIRE(qrmsim_run(cfg, csv.c_str(), &rep) == QRMSIM_OK);
    CHECK(fs::exists(csv));
    CHECK(fs::exists(csv + ".meta.json"));
    const size_t rows = qrmsim_report_rows(rep);
    CHECK(rows == 201);
    std::vector<double> t(rows), s(rows);
    size_t written = 0;
    CHECK(qrmsim_report_column(rep, "t_s", t.data(), t.size(), &written) == QRMSIM_OK);
    CHECK(written == rows);
    CHECK(qrmsim_report_column(rep, "survival_mean", s.data(), s.size(), &written) == QRMSIM_OK);
    const double w0 = 2.0 * M_PI * 1e3;
    for (size_t k = 0; k < rows; ++k) CHECK(std::abs(s[k] - std::exp(-2.0 * (1.0 - std::cos(w0 * t[k])))) < 1e-6);
    CHECK(qrmsim_report_column(rep, "nope", s.data(), s.size(), &written) == QRMSIM_ERR_INVALID_ARGUMENT);
    qrmsim_report_destroy(rep);

    qrmsim_config* replay = nullptr;
    REQUIRE(qrmsim_config_load((csv + ".meta.json").c_str(), &replay) == QRMSIM_OK);
    char buf[32];
    CHECK(qrmsim_config_get(replay, "scheme", buf, sizeof buf, nullptr) == QRMSIM_OK);
    CHECK(std::string(buf) == "ideal");
    qrmsim_config_destroy(replay);

    const double zetas[] = {0.0};
    CHECK(qrmsim_sweep_zeta(cfg, zetas, 1, dir.string().c_str(), &rep) == QRMSIM_ERR_CONFIG);
    qrmsim_config_destroy(cfg);
    fs::remove_all(dir);
}

TEST_CASE("noise statistics through the c interface") {
    qrmsim_config* cfg = nullptr;
    REQUIRE(qrmsim_config_parse("noise_trajectories = 50\nt_end_s = 1e-3\n", &cfg) == QRMSIM_OK);
    qrmsim_report* rep = nullptr;
    REQUIRE(qrmsim_noise_stats(cfg, &rep) == QRMSIM_OK);
    CHECK(qrmsim_report_passed(rep) == 1);
    CHECK(std::string(qrmsim_report_text(rep)).find("dephasing") != std::string::npos);
    qrmsim_report_destroy(rep);
    qrmsim_config_destroy(cfg);
    qrmsim_report_destroy(nullptr);
    qrmsim_config_destroy(nullptr);
}
