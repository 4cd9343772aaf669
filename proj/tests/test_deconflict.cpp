#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "skyreserve/deconflict.hpp"
#include "skyreserve/rng.hpp"

using namespace skyreserve;
using namespace skyreserve::deconflict;

namespace {

const DetectionParams kParams{};  // 1111.2 m, 90 s
constexpr double kSpeedMin = 85.0 * 0.514444;
constexpr double kSpeedMax = 185.0 * 0.514444;

/// Brute-force closest approach by marching the pair at dt = 0.01 s.
std::pair<double, double> cpa_brute(const KinematicState& a, const KinematicState& b,
                                    double horizon) {
    double best_t = 0.0;
    double best_d = (a.position - b.position).norm();
    for (double t = 0.0; t <= horizon; t += 0.01) {
        const Vec2 pa = a.position + a.velocity * t;
        const Vec2 pb = b.position + b.velocity * t;
        const double d = (pa - pb).norm();
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    return {best_t, best_d};
}

/// Conflict geometry generator: intruder placed so that the pair reaches a
/// chosen miss distance at a chosen time.
struct Geometry {
    KinematicState own;
    KinematicState intruder;
};

Geometry random_conflict(Rng& rng, double& t_star, double& miss) {
    Geometry g;
    const double own_speed = rng.uniform(kSpeedMin, kSpeedMax);
    const double own_heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    g.own.position = {rng.uniform(-5000.0, 5000.0), rng.uniform(-5000.0, 5000.0)};
    g.own.velocity = {own_speed * std::cos(own_heading), own_speed * std::sin(own_heading)};

    t_star = rng.uniform(5.0, 89.0);
    miss = rng.uniform(0.0, kParams.r_pz * 0.999);
    const double rel_speed = rng.uniform(5.0, 190.0);
    const double rel_heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const Vec2 v_rel{rel_speed * std::cos(rel_heading), rel_speed * std::sin(rel_heading)};
    const Vec2 perp = v_rel.perp_ccw().normalized() * (rng.coin() ? 1.0 : -1.0);
    // own-minus-intruder relative position now so that CPA sits at t_star
    const Vec2 d0 = perp * miss - v_rel * t_star;
    g.intruder.position = g.own.position - d0;
    g.intruder.velocity = g.own.velocity - v_rel;
    return g;
}

}  // namespace

TEST_CASE("head-on closest approach") {
    KinematicState own{{0.0, 0.0}, {77.0, 0.0}};
    KinematicState intr{{7700.0, 0.0}, {-77.0, 0.0}};
    const auto r = cpa(own, intr);
    CHECK(r.t_cpa == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(r.d_cpa_vec.norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("co-moving pair degenerates to the current separation") {
    KinematicState own{{0.0, 0.0}, {60.0, 10.0}};
    KinematicState intr{{500.0, -300.0}, {60.0, 10.0}};
    const auto r = cpa(own, intr);
    CHECK(r.t_cpa == 0.0);
    CHECK(r.d_cpa_vec.norm() == doctest::Approx(std::hypot(500.0, 300.0)).epsilon(1e-12));
}

TEST_CASE("analytic CPA matches the time-marched oracle") {
    Rng rng(1234);
    for (int i = 0; i < 200; ++i) {
        double t_star, miss;
        const Geometry g = random_conflict(rng, t_star, miss);
        const auto r = cpa(g.own, g.intruder);
        const auto [bt, bd] = cpa_brute(g.own, g.intruder, 120.0);
        CHECK(std::abs(r.t_cpa - bt) < 0.05);
        CHECK(std::abs(r.d_cpa_vec.norm() - bd) < 1.0);
    }
}

TEST_CASE("detection condition") {
    SUBCASE("head-on pair inside the horizon is detected") {
        KinematicState own{{0.0, 0.0}, {77.0, 0.0}};
        std::vector<Neighbor> others = {{7, {{7700.0, 0.0}, {-77.0, 0.0}}}};
        const auto conflicts = detect(own, others, kParams);
        REQUIRE(conflicts.size() == 1);
        CHECK(conflicts[0].intruder_id == 7);
        CHECK(conflicts[0].t_cpa == doctest::Approx(50.0));
        CHECK(conflicts[0].d_cpa < kParams.r_pz);
    }
    SUBCASE("closure beyond the look-ahead is ignored") {
        KinematicState own{{0.0, 0.0}, {77.0, 0.0}};
        std::vector<Neighbor> others = {{7, {{18480.0, 0.0}, {-77.0, 0.0}}}};
        CHECK(detect(own, others, kParams).empty());  // t_cpa = 120 s
    }
    SUBCASE("miss distance exactly at the boundary is not a conflict") {
        // crossing geometry with d_cpa == r_pz exactly
        KinematicState own{{0.0, 0.0}, {80.0, 0.0}};
        std::vector<Neighbor> others = {
            {3, {{4000.0, kParams.r_pz}, {-80.0, 0.0}}}};
        const auto conflicts = detect(own, others, kParams);
        CHECK(conflicts.empty());
    }
    SUBCASE("current intrusion reports t_cpa zero") {
        KinematicState own{{0.0, 0.0}, {80.0, 0.0}};
        std::vector<Neighbor> others = {{9, {{500.0, 0.0}, {80.0, 0.0}}}};
        const auto conflicts = detect(own, others, kParams);
        REQUIRE(conflicts.size() == 1);
        CHECK(conflicts[0].t_cpa == 0.0);
        CHECK(conflicts[0].d_cpa == doctest::Approx(500.0));
    }
}

TEST_CASE("detection is symmetric") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        double t_star, miss;
        const Geometry g = random_conflict(rng, t_star, miss);
        std::vector<Neighbor> a = {{1, g.intruder}};
        std::vector<Neighbor> b = {{0, g.own}};
        const auto ca = detect(g.own, a, kParams);
        const auto cb = detect(g.intruder, b, kParams);
        REQUIRE(ca.size() == cb.size());
        if (!ca.empty()) {
            CHECK(ca[0].t_cpa == doctest::Approx(cb[0].t_cpa).epsilon(1e-9));
            CHECK(ca[0].d_cpa == doctest::Approx(cb[0].d_cpa).epsilon(1e-9));
        }
    }
}

TEST_CASE("resolution magnitude follows the miss-distance formula") {
    SUBCASE("degenerate head-on deflects perpendicular-right at r_pz/t_cpa") {
        KinematicState own{{0.0, 0.0}, {77.0, 0.0}};
        KinematicState intr{{7700.0, 0.0}, {-77.0, 0.0}};
        std::vector<Neighbor> others = {{1, intr}};
        const auto conflicts = detect(own, others, kParams);
        REQUIRE(conflicts.size() == 1);
        const Vec2 dv = mvp_resolve(own, intr, conflicts[0], kParams);
        CHECK(dv.norm() == doctest::Approx(1111.2 / 50.0).epsilon(1e-9));
        CHECK(dv.x == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(dv.y < 0.0);  // right of own track
    }
    SUBCASE("half-depth intrusion at 60 s") {
        ConflictPair c;
        c.intruder_id = 1;
        c.t_cpa = 60.0;
        c.d_cpa = 0.5 * kParams.r_pz;
        c.d_cpa_vec = {0.5 * kParams.r_pz, 0.0};
        KinematicState own{{0.0, 0.0}, {80.0, 0.0}};
        KinematicState intr{{5000.0, 0.0}, {-80.0, 0.0}};
        const Vec2 dv = mvp_resolve(own, intr, c, kParams);
        CHECK(dv.norm() == doctest::Approx(0.5 * 1111.2 / 60.0).epsilon(1e-9));
        CHECK(dv.y == doctest::Approx(0.0));
        CHECK(dv.x > 0.0);  // along the miss vector
    }
    SUBCASE("resolution vanishes as the miss approaches the boundary") {
        ConflictPair c;
        c.intruder_id = 1;
        c.t_cpa = 60.0;
        KinematicState own{{0.0, 0.0}, {80.0, 0.0}};
        KinematicState intr{{5000.0, 0.0}, {-80.0, 0.0}};
        double prev = 1e9;
        for (double f : {0.9, 0.99, 0.999, 0.9999}) {
            c.d_cpa = f * kParams.r_pz;
            c.d_cpa_vec = {c.d_cpa, 0.0};
            const double mag = mvp_resolve(own, intr, c, kParams).norm();
            CHECK(mag < prev);
            prev = mag;
        }
        CHECK(prev < 0.002);
    }
}

TEST_CASE("one-sided resolution restores the separation at the predicted approach") {
    // Linear-prediction effectiveness: with the intruder holding course, the
    // separation at the original t_cpa equals r_pz after the maneuver.
    Rng rng(20240509);
    int checked = 0;
    double worst_recomputed = 1e9;
    for (int i = 0; checked < 10000 && i < 40000; ++i) {
        double t_star, miss;
        const Geometry g = random_conflict(rng, t_star, miss);
        std::vector<Neighbor> others = {{1, g.intruder}};
        const auto conflicts = detect(g.own, others, kParams);
        if (conflicts.empty() || conflicts[0].t_cpa <= 0.0) continue;
        ++checked;
        const auto& c = conflicts[0];
        const Vec2 dv = mvp_resolve(g.own, g.intruder, c, kParams);
        const Vec2 d0 = g.own.position - g.intruder.position;
        const Vec2 v_new = (g.own.velocity + dv) - g.intruder.velocity;
        const double sep_at_tcpa = (d0 + v_new * c.t_cpa).norm();
        CHECK(sep_at_tcpa >= kParams.r_pz * (1.0 - 1e-6));

        KinematicState moved{g.own.position, g.own.velocity + dv};
        const auto re = cpa(moved, g.intruder);
        worst_recomputed = std::min(worst_recomputed, re.d_cpa_vec.norm() / kParams.r_pz);
    }
    CHECK(checked == 10000);
    // full re-computation may sit slightly inside the zone; the next step
    // re-resolves it
    CHECK(worst_recomputed > 0.5);
    MESSAGE("worst recomputed miss after one-shot resolution: ", worst_recomputed, " r_pz");
}

TEST_CASE("paired maneuvers are complementary") {
    Rng rng(777);
    for (int i = 0; i < 2000; ++i) {
        double t_star, miss;
        const Geometry g = random_conflict(rng, t_star, miss);
        std::vector<Neighbor> a = {{1, g.intruder}};
        std::vector<Neighbor> b = {{0, g.own}};
        const auto ca = detect(g.own, a, kParams);
        const auto cb = detect(g.intruder, b, kParams);
        if (ca.empty() || cb.empty() || ca[0].t_cpa <= 0.0 || ca[0].d_cpa < 1e-6) continue;
        const Vec2 dva = mvp_resolve(g.own, g.intruder, ca[0], kParams);
        const Vec2 dvb = mvp_resolve(g.intruder, g.own, cb[0], kParams);
        CHECK(dva.dot(dvb) < 0.0);
    }
    // the degenerate head-on geometry is complementary too
    KinematicState own{{0.0, 0.0}, {77.0, 0.0}};
    KinematicState intr{{7700.0, 0.0}, {-77.0, 0.0}};
    std::vector<Neighbor> a = {{1, intr}};
    std::vector<Neighbor> b = {{0, own}};
    const Vec2 dva = mvp_resolve(own, intr, detect(own, a, kParams)[0], kParams);
    const Vec2 dvb = mvp_resolve(intr, own, detect(intr, b, kParams)[0], kParams);
    CHECK(dva.dot(dvb) < 0.0);
}

TEST_CASE("combine sums, clamps and preserves direction") {
    KinematicState own{{0.0, 0.0}, {80.0, 0.0}};

    SUBCASE("single conflict equals the lone resolution (inside the clamp)") {
        KinematicState intr{{7000.0, 200.0}, {-80.0, 0.0}};
        std::vector<Neighbor> others = {{1, intr}};
        const auto conflicts = detect(own, others, kParams);
        REQUIRE(conflicts.size() == 1);
        const Vec2 lone = mvp_resolve(own, intr, conflicts[0], kParams);
        const auto cmd = combine(own, others, conflicts, kParams, kSpeedMin, kSpeedMax);
        CHECK(cmd.delta_v.x == doctest::Approx(lone.x).epsilon(1e-12));
        CHECK(cmd.delta_v.y == doctest::Approx(lone.y).epsilon(1e-12));
        const Vec2 expect = own.velocity + lone;
        if (expect.norm() >= kSpeedMin && expect.norm() <= kSpeedMax) {
            CHECK(cmd.resulting_velocity.x == doctest::Approx(expect.x).epsilon(1e-12));
            CHECK(cmd.resulting_velocity.y == doctest::Approx(expect.y).epsilon(1e-12));
        }
    }
    SUBCASE("mirror-symmetric intruders cancel laterally") {
        KinematicState up{{6000.0, 900.0}, {-80.0, -12.0}};
        KinematicState dn{{6000.0, -900.0}, {-80.0, 12.0}};
        std::vector<Neighbor> others = {{1, up}, {2, dn}};
        const auto conflicts = detect(own, others, kParams);
        REQUIRE(conflicts.size() == 2);
        const auto cmd = combine(own, others, conflicts, kParams, kSpeedMin, kSpeedMax);
        CHECK(std::abs(cmd.delta_v.y) < 1e-9);
    }
    SUBCASE("a huge demand clamps to the maximum speed exactly") {
        KinematicState intr{{900.0, 0.0}, {-80.0, 0.0}};  // 5.6 s to impact
        std::vector<Neighbor> others = {{1, intr}};
        const auto conflicts = detect(own, others, kParams);
        REQUIRE(conflicts.size() == 1);
        const auto cmd = combine(own, others, conflicts, kParams, kSpeedMin, kSpeedMax);
        CHECK(cmd.resulting_velocity.norm() == doctest::Approx(kSpeedMax).epsilon(1e-12));
    }
    SUBCASE("clamped speed never leaves the permitted range") {
        Rng rng(31337);
        for (int i = 0; i < 2000; ++i) {
            double t_star, miss;
            const Geometry g = random_conflict(rng, t_star, miss);
            std::vector<Neighbor> others = {{1, g.intruder}};
            const auto conflicts = detect(g.own, others, kParams);
            if (conflicts.empty()) continue;
            const auto cmd =
                combine(g.own, others, conflicts, kParams, kSpeedMin, kSpeedMax);
            const double speed = cmd.resulting_velocity.norm();
            CHECK(speed >= kSpeedMin * (1.0 - 1e-12));
            CHECK(speed <= kSpeedMax * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("recovery check") {
    const Vec2 original{80.0, 0.0};

    SUBCASE("clear airspace resumes") {
        KinematicState own{{0.0, 0.0}, {70.0, 10.0}};
        std::vector<Neighbor> others;  // empty sky
        std::vector<std::pair<int, double>> memory = {{1, 50.0}};
        CHECK_FALSE(recovery_check(own, others, original, memory, kParams, 49.0));
        CHECK(recovery_check(own, others, original, memory, kParams, 51.0));
    }
    SUBCASE("resuming into the same conflict is refused") {
        KinematicState own{{0.0, 0.0}, {80.0, -20.0}};
        KinematicState intr{{7700.0, 0.0}, {-77.0, 0.0}};
        std::vector<Neighbor> others = {{1, intr}};
        std::vector<std::pair<int, double>> memory = {{1, 10.0}};
        // past the stored time, but the original velocity re-creates the
        // conflict
        CHECK_FALSE(recovery_check(own, others, original, memory, kParams, 20.0));
    }
}

TEST_CASE("severity weight") {
    const std::vector<ConflictPair> none;
    CHECK(severity(none, 5, kParams) == 0.0);

    ConflictPair saturated;
    saturated.t_cpa = 0.0;
    saturated.d_cpa = 0.0;
    std::vector<ConflictPair> one = {saturated};
    CHECK(severity(one, 2, kParams) == doctest::Approx(1.0).epsilon(1e-12));

    ConflictPair mid;
    mid.t_cpa = 0.35 * kParams.t_look;  // one e-folding
    mid.d_cpa = 0.5 * kParams.r_pz;
    std::vector<ConflictPair> v = {mid};
    CHECK(severity(v, 11, kParams) == doctest::Approx(0.018393972058572117).epsilon(1e-9));

    CHECK_THROWS_AS(severity(v, 1, kParams), std::domain_error);
}

TEST_CASE("severity is non-negative and monotone in urgency") {
    Rng rng(5150);
    for (int i = 0; i < 500; ++i) {
        ConflictPair c;
        c.t_cpa = rng.uniform(0.0, 89.0);
        c.d_cpa = rng.uniform(0.0, kParams.r_pz);
        std::vector<ConflictPair> v = {c};
        const double w = severity(v, 10, kParams);
        CHECK(w >= 0.0);
        ConflictPair later = c;
        later.t_cpa += 5.0;
        std::vector<ConflictPair> lv = {later};
        CHECK(severity(lv, 10, kParams) <= w);
        ConflictPair shallower = c;
        shallower.d_cpa = std::min(c.d_cpa + 100.0, kParams.r_pz);
        std::vector<ConflictPair> sv = {shallower};
        CHECK(severity(sv, 10, kParams) <= w);
    }
}
