#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lorasim/energy.hpp"
#include "lorasim/error.hpp"
#include "lorasim/rng.hpp"

using namespace lorasim;

namespace {

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

RadioConfig radio(int sf, double bw, int np, int npay) { return {sf, bw, np, npay}; }

}  // namespace

TEST_CASE("symbol time") {
    // 2^7 / 125000 = 128 / 125000 s
    CHECK(rel_close(symbol_time(radio(7, 125000, 8, 36)), 1.024e-3, 1e-12));
    CHECK(rel_close(symbol_time(radio(7, 250000, 8, 36)), 0.512e-3, 1e-12));
    CHECK(symbol_time(radio(0, 1, 0, 0)) == 1.0);
    CHECK_THROWS_AS(symbol_time(radio(7, 0, 8, 36)), ContractError);
}

TEST_CASE("time on air at SF7 / 125 kHz") {
    // Hand evaluation: preamble (4.25 + 8) * 1.024 ms, payload 36 * 1.024 ms.
    const auto a = time_on_air(radio(7, 125000, 8, 36));
    CHECK(rel_close(a.t_preamble, 12.544e-3, 1e-12));
    CHECK(rel_close(a.t_payload, 36.864e-3, 1e-12));
    CHECK(rel_close(a.t_toa, 49.408e-3, 1e-12));
    CHECK(a.t_toa == a.t_preamble + a.t_payload);

    const auto empty = time_on_air(radio(7, 125000, 8, 0));
    CHECK(empty.t_toa == empty.t_preamble);

    const auto longest = time_on_air(radio(7, 125000, 8, 44));
    CHECK(rel_close(longest.t_payload, 45.056e-3, 1e-12));
    CHECK(rel_close(longest.t_toa, 57.600e-3, 1e-12));

    CHECK_THROWS_AS(time_on_air(radio(7, 125000, -1, 36)), ContractError);
}

TEST_CASE("attempt energy") {
    EnergyModel m = default_energy_model();
    m.p_toa_by_level[20] = 100.0;
    const auto e = attempt_energy(radio(7, 125000, 8, 36), m, 20);
    // (29.7 + 100) mW * 49.408 ms
    CHECK(rel_close(e.e_toa, 129.7 * 0.049408, 1e-12));
    CHECK(e.e_toa == doctest::Approx(6.408).epsilon(1e-4));
    CHECK(rel_close(e.e_active, 56.1 + 85.8 + 66.0 + 129.7 * 0.049408, 1e-12));
    CHECK(e.e_active == doctest::Approx(214.308).epsilon(1e-5));
    CHECK(e.t_toa == e.t_preamble + e.t_payload);
    CHECK(e.e_active >= e.e_toa);

    m.p_toa_by_level[21] = 100.0;
    CHECK(attempt_energy(radio(7, 125000, 8, 36), m, 21).e_toa == e.e_toa);

    CHECK_THROWS_AS(attempt_energy(radio(7, 125000, 8, 36), m, 99), ConfigError);
}

TEST_CASE("aborted attempt charges everything except airtime") {
    const auto m = default_energy_model();
    const auto e = aborted_attempt_energy(m);
    CHECK(e.e_toa == 0.0);
    CHECK(e.e_active == m.e_wu + m.e_proc + m.e_r);
}

TEST_CASE("reward basis") {
    AttemptEnergy e;
    e.e_toa = 3.0;
    CHECK(reward_basis(e, RewardMode::normalized, 3.0) == 1.0);
    e.e_toa = 6.0;
    CHECK(reward_basis(e, RewardMode::normalized, 3.0) == 0.5);
    e.e_toa = 6.408;
    CHECK(reward_basis(e, RewardMode::raw, 1.0) == doctest::Approx(0.15606).epsilon(1e-4));
    e.e_toa = 0.0;
    CHECK_THROWS_AS(reward_basis(e, RewardMode::raw, 1.0), ContractError);

    CHECK(reward_mode_from_string("raw") == RewardMode::raw);
    CHECK(to_string(RewardMode::normalized) == "normalized");
    CHECK_THROWS_AS(reward_mode_from_string("log"), ConfigError);
}

TEST_CASE("energy model validation") {
    auto m = default_energy_model();
    CHECK_NOTHROW(m.validate());
    m.e_r = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = default_energy_model();
    m.p_toa_by_level.erase(13);
    try {
        m.require_levels(default_powers());
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("13 dBm") != std::string::npos);
    }
}

TEST_CASE("property: airtime additivity, monotone energy, reward ordering") {
    Rng rng(42);
    const auto model = default_energy_model();
    for (int trial = 0; trial < 500; ++trial) {
        const RadioConfig cfg = radio(6 + static_cast<int>(rng.uniform_index(7)),
                                      62500.0 * static_cast<double>(1 + rng.uniform_index(8)),
                                      static_cast<int>(rng.uniform_index(17)),
                                      static_cast<int>(rng.uniform_index(256)));
        const auto a = time_on_air(cfg);
        const double expected = symbol_time(cfg) * (4.25 + cfg.n_preamble + cfg.n_payload);
        CHECK(rel_close(a.t_toa, expected, 1e-12));
        CHECK(a.t_toa > 0.0);

        double prev_e = 0.0;
        double prev_norm = 2.0, prev_raw = 1e300;
        const double e_min = attempt_energy(cfg, model, -3).e_toa;
        for (const auto& [level, mw] : model.p_toa_by_level) {
            const auto e = attempt_energy(cfg, model, level);
            CHECK(e.e_toa > prev_e);
            CHECK(e.e_active > 0.0);
            const double norm = reward_basis(e, RewardMode::normalized, e_min);
            const double raw = reward_basis(e, RewardMode::raw, e_min);
            CHECK(norm < prev_norm);
            CHECK(raw < prev_raw);
            CHECK(norm > 0.0);
            CHECK(norm <= 1.0);
            prev_e = e.e_toa;
            prev_norm = norm;
            prev_raw = raw;
        }
    }
}
