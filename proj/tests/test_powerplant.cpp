#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "skyreserve/powerplant.hpp"
#include "skyreserve/units_atmos.hpp"

using namespace skyreserve;
using namespace skyreserve::powerplant;

namespace {
const double kRho = units::isa_density(609.6);
const double kKt = units::kKnotToMps;

AircraftConfig baseline() { return AircraftConfig::baseline(); }
}  // namespace

TEST_CASE("baseline configuration invariants") {
    const auto cfg = baseline();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.rotor_disk_area() == doctest::Approx(3.14159265358979 * 1.45 * 1.45));
    CHECK(cfg.total_disk_area() == doctest::Approx(39.6312).epsilon(1e-4));
    // solidity identity N_b c / (pi R)
    CHECK(cfg.n_blades * cfg.blade_chord / (3.14159265358979 * cfg.rotor_radius) ==
          doctest::Approx(cfg.solidity).epsilon(1e-12));
}

TEST_CASE("skin friction formula") {
    // 0.455 / log10(Re)^2.58, hand-evaluated
    CHECK(skin_friction(1e7) == doctest::Approx(0.003003713133159046).epsilon(1e-9));
    CHECK(skin_friction(1e7) == doctest::Approx(0.003004).epsilon(2e-4));
    CHECK(skin_friction(1e6) == doctest::Approx(0.004470758085611552).epsilon(1e-9));
    CHECK(skin_friction(1e6) == doctest::Approx(0.004476).epsilon(2e-3));
    CHECK(skin_friction(1e8) < skin_friction(1e7));
    CHECK_THROWS_AS(skin_friction(1e4), std::domain_error);
    CHECK_THROWS_AS(skin_friction(0.0), std::domain_error);
}

TEST_CASE("parasite drag coefficient reduces to skin friction for a unit component") {
    AircraftConfig cfg = baseline();
    cfg.parasite_calibration_factor = 1.0;
    cfg.drag_components = {{"plate", cfg.wing_area, 1.0, 2.0, false, 0.0}};
    const double v = 80.0;
    const double re = kRho * v * 2.0 / kAirViscosity;
    CHECK(parasite_drag_coefficient(cfg, v, kRho) ==
          doctest::Approx(skin_friction(re)).epsilon(1e-12));
}

TEST_CASE("parasite drag coefficient is linear in wetted area") {
    AircraftConfig cfg = baseline();
    const double base = parasite_drag_coefficient(cfg, 80.0, kRho);
    for (auto& c : cfg.drag_components) c.wetted_area *= 2.0;
    CHECK(parasite_drag_coefficient(cfg, 80.0, kRho) ==
          doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("empty drag table is rejected") {
    AircraftConfig cfg = baseline();
    cfg.drag_components.clear();
    CHECK_THROWS_AS(parasite_drag_coefficient(cfg, 80.0, kRho), std::domain_error);
}

TEST_CASE("induced drag matches the hand-evaluated reference") {
    // W = 2177*9.81, q at 80.77 m/s and 1.1548 kg/m^3
    const auto cfg = baseline();
    const auto d = total_drag(cfg, 80.77, 1.1548);
    CHECK(d.induced == doctest::Approx(411.894).epsilon(5e-3));
    CHECK(d.total == doctest::Approx(d.parasite + d.induced).epsilon(1e-12));
}

TEST_CASE("induced drag scales as 1/V^2") {
    const auto cfg = baseline();
    const double v = 60.0;
    const auto d1 = total_drag(cfg, v, kRho);
    const auto d2 = total_drag(cfg, 2.0 * v, kRho);
    CHECK(d2.induced == doctest::Approx(d1.induced / 4.0).epsilon(1e-12));
}

TEST_CASE("parasite drag dominates at high cruise speed") {
    const auto cfg = baseline();
    for (double kt = 165.0; kt <= 185.0; kt += 5.0) {
        const auto d = total_drag(cfg, kt * kKt, kRho);
        CHECK(d.parasite > d.induced);
    }
}

TEST_CASE("induced power") {
    const auto cfg = baseline();
    CHECK(induced_power(cfg, 0.0, 80.0, kRho) == 0.0);
    // hand evaluation with T=2000 N, V=80.77, rho=1.1548, A_total=39.63
    AircraftConfig ref = cfg;
    const double p = induced_power(ref, 2000.0, 80.77, 1.1548);
    CHECK(p == doctest::Approx(622.2).epsilon(1e-2));
    // quadratic in thrust
    CHECK(induced_power(cfg, 4000.0, 80.77, 1.1548) == doctest::Approx(4.0 * p).epsilon(1e-12));
    CHECK_THROWS_AS(induced_power(cfg, 100.0, 0.0, kRho), std::domain_error);
}

TEST_CASE("profile power closed form at V=0, T=0") {
    const auto cfg = baseline();
    const double tip = cfg.cruise_omega * cfg.rotor_radius;
    CHECK(tip == doctest::Approx(45.553093477052).epsilon(1e-9));
    CHECK(157.0 * kKt / tip == doctest::Approx(1.773).epsilon(1e-3));
    const double expected = (cfg.blade_cd0 * cfg.solidity / 8.0) * kRho *
                            cfg.rotor_disk_area() * tip * tip * tip * cfg.n_rotors;
    CHECK(profile_power(cfg, 0.0, 0.0, kRho) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("profile power increases with airspeed at fixed thrust") {
    const auto cfg = baseline();
    double prev = profile_power(cfg, 1000.0, 45.0, kRho);
    for (double v = 50.0; v <= 95.0; v += 5.0) {
        const double p = profile_power(cfg, 1000.0, v, kRho);
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("total power breakdown identities") {
    const auto cfg = baseline();
    for (double kt = 85.0; kt <= 185.0; kt += 1.0) {
        const double v = kt * kKt;
        const auto p = total_power(cfg, v, kRho);
        CHECK(p.induced >= 0.0);
        CHECK(p.profile >= 0.0);
        CHECK(p.parasite >= 0.0);
        CHECK(p.hotel >= 0.0);
        CHECK(p.shaft_total ==
              doctest::Approx(p.induced + p.profile + p.parasite).epsilon(1e-12));
        CHECK(p.electrical_total ==
              doctest::Approx(p.shaft_total / 0.85 + 2000.0).epsilon(1e-9));
        CHECK(p.electrical_total > p.shaft_total);
        // parasite power is total drag times speed by construction
        const auto d = total_drag(cfg, v, kRho);
        CHECK(p.parasite == doctest::Approx(d.total * v).epsilon(1e-12));
        CHECK(std::isfinite(p.electrical_total));
        CHECK_FALSE(p.shaft_limit_exceeded);
    }
    CHECK_THROWS_AS(total_power(cfg, 84.9 * kKt, kRho), std::domain_error);
    CHECK_THROWS_AS(total_power(cfg, 185.1 * kKt, kRho), std::domain_error);
}

TEST_CASE("shaft-power exceedance warns via the flag instead of erroring") {
    AircraftConfig cfg = baseline();
    cfg.max_shaft_power = 1000.0;  // absurdly small limit
    const auto p = total_power(cfg, 150.0 * kKt, kRho);
    CHECK(p.shaft_limit_exceeded);
    CHECK(p.electrical_total > 0.0);
}

TEST_CASE("component ordering at best-range speed") {
    const auto cfg = baseline();
    const double vbr = best_range_speed(cfg, kRho);
    const auto p = total_power(cfg, vbr, kRho);
    CHECK(p.parasite > p.profile);
    CHECK(p.profile > p.induced);
}

TEST_CASE("segment energy") {
    const auto cfg = baseline();
    const double v = 80.0;
    const double p = total_power(cfg, v, kRho).electrical_total;

    SUBCASE("constant speed over an interval") {
        std::vector<std::pair<double, double>> profile = {{0.0, v}, {100.0, v}};
        CHECK(segment_energy(cfg, profile, kRho) == doctest::Approx(100.0 * p).epsilon(1e-12));
    }
    SUBCASE("zero-length interval integrates to zero") {
        std::vector<std::pair<double, double>> profile = {{5.0, v}, {5.0, v}};
        CHECK(segment_energy(cfg, profile, kRho) == 0.0);
    }
    SUBCASE("fewer than two samples is rejected") {
        std::vector<std::pair<double, double>> profile = {{0.0, v}};
        CHECK_THROWS_AS(segment_energy(cfg, profile, kRho), std::domain_error);
        CHECK_THROWS_AS(segment_energy(cfg, {}, kRho), std::domain_error);
    }
    SUBCASE("decreasing timestamps are rejected") {
        std::vector<std::pair<double, double>> profile = {{1.0, v}, {0.5, v}};
        CHECK_THROWS_AS(segment_energy(cfg, profile, kRho), std::domain_error);
    }
    SUBCASE("additive over concatenated segments") {
        std::vector<std::pair<double, double>> all, first, second;
        for (int i = 0; i <= 60; ++i) {
            const double t = i;
            const double speed = 70.0 + 10.0 * std::sin(0.1 * t);
            all.emplace_back(t, speed);
            if (i <= 30) first.emplace_back(t, speed);
            if (i >= 30) second.emplace_back(t, speed);
        }
        const double whole = segment_energy(cfg, all, kRho);
        const double parts = segment_energy(cfg, first, kRho) + segment_energy(cfg, second, kRho);
        CHECK(parts == doctest::Approx(whole).epsilon(1e-9));
    }
    SUBCASE("trapezoid converges: 10x finer sampling moves the result < 0.1%") {
        auto sample = [&](double dt) {
            std::vector<std::pair<double, double>> profile;
            for (double t = 0.0; t <= 60.0 + 1e-9; t += dt)
                profile.emplace_back(t, 75.0 + 12.0 * std::sin(0.2 * t));
            return segment_energy(cfg, profile, kRho);
        };
        const double coarse = sample(0.1);
        const double fine = sample(0.01);
        CHECK(std::abs(coarse - fine) / fine < 1e-3);
    }
}

TEST_CASE("best-range speed lands at the calibrated target") {
    const auto cfg = baseline();
    const double vbr = best_range_speed(cfg, kRho);
    const double vbr_kt = vbr / kKt;
    CHECK(vbr_kt > 152.0);
    CHECK(vbr_kt < 162.0);
    CHECK(vbr_kt == doctest::Approx(157.0).epsilon(5e-3));

    // brute-force grid oracle at 0.1 kt resolution
    double best_v = 0.0, best_f = 1e300;
    for (double kt = 85.0; kt <= 185.0 + 1e-9; kt += 0.1) {
        const double v = kt * kKt;
        const double f = total_power(cfg, v, kRho).electrical_total / v;
        if (f < best_f) {
            best_f = f;
            best_v = v;
        }
    }
    CHECK(std::abs(vbr - best_v) < 0.2 * kKt);
}

TEST_CASE("energy per distance is unimodal over the speed range") {
    const auto cfg = baseline();
    std::vector<double> f;
    for (double kt = 85.0; kt <= 185.0; kt += 1.0) {
        const double v = kt * kKt;
        f.push_back(total_power(cfg, v, kRho).electrical_total / v);
    }
    int sign_changes = 0;
    for (std::size_t i = 2; i < f.size(); ++i) {
        const bool was_down = f[i - 1] < f[i - 2];
        const bool now_up = f[i] > f[i - 1];
        if (was_down && now_up) ++sign_changes;
    }
    CHECK(sign_changes == 1);
}

TEST_CASE("heavier parasite drag lowers the best-range speed") {
    AircraftConfig cfg = baseline();
    const double v1 = best_range_speed(cfg, kRho);
    cfg.parasite_calibration_factor *= 1.5;
    const double v2 = best_range_speed(cfg, kRho);
    CHECK(v2 < v1);
}

TEST_CASE("drag slopes at the top of the envelope") {
    const auto cfg = baseline();
    const double v = 185.0 * kKt;
    const double h = 0.5;
    const auto lo = total_drag(cfg, v - h, kRho);
    const auto hi = total_drag(cfg, v + h, kRho);
    CHECK(hi.parasite > lo.parasite);
    CHECK(hi.induced < lo.induced);
    CHECK(hi.total > lo.total);  // positive total-drag derivative at 185 kt
}
