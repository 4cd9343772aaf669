#include "skyreserve/deconflict.hpp"

#include <cmath>
#include <stdexcept>

namespace skyreserve::deconflict {

namespace {
constexpr double kParallelEpsSq = 1e-18;  // (1e-9 m/s)^2
}

CpaResult cpa(const KinematicState& own, const KinematicState& intruder) {
    const Vec2 d = own.position - intruder.position;
    const Vec2 v = own.velocity - intruder.velocity;
    const double v2 = v.norm_sq();
    CpaResult r;
    if (v2 <= kParallelEpsSq) {
        r.t_cpa = 0.0;
        r.d_cpa_vec = d;
        return r;
    }
    r.t_cpa = std::max(0.0, -d.dot(v) / v2);
    r.d_cpa_vec = d + v * r.t_cpa;
    return r;
}

std::vector<ConflictPair> detect(const KinematicState& own,
                                 std::span<const Neighbor> others,
                                 const DetectionParams& params) {
    std::vector<ConflictPair> out;
    for (const auto& other : others) {
        const Vec2 d_now = own.position - other.state.position;
        const double dist_now = d_now.norm();
        if (dist_now < params.r_pz) {
            // already inside the protected zone
            ConflictPair c;
            c.intruder_id = other.id;
            c.t_cpa = 0.0;
            c.d_cpa_vec = d_now;
            c.d_cpa = dist_now;
            out.push_back(c);
            continue;
        }
        const CpaResult r = cpa(own, other.state);
        const double miss = r.d_cpa_vec.norm();
        if (miss < params.r_pz && r.t_cpa < params.t_look) {
            ConflictPair c;
            c.intruder_id = other.id;
            c.t_cpa = r.t_cpa;
            c.d_cpa_vec = r.d_cpa_vec;
            c.d_cpa = miss;
            out.push_back(c);
        }
    }
    return out;
}

Vec2 mvp_resolve(const KinematicState& own, const KinematicState& intruder,
                 const ConflictPair& conflict, const DetectionParams& params,
                 double dt_fallback) {
    if (conflict.t_cpa > 0.0) {
        const double magnitude = (params.r_pz - conflict.d_cpa) / conflict.t_cpa;
        if (conflict.d_cpa > 1e-12) {
            return (conflict.d_cpa_vec / conflict.d_cpa) * magnitude;
        }
        // Exact predicted collision: the miss direction is undefined.
        // Deflect perpendicular to the relative velocity, on the side that
        // turns ownship clockwise.
        const Vec2 v_rel = own.velocity - intruder.velocity;
        Vec2 n = v_rel.perp_ccw().normalized();
        if (own.velocity.cross(n) >= 0.0) n = -n;
        return n * magnitude;
    }
    // Current intrusion: push straight out along the present relative
    // position over one simulation step.
    const double magnitude = (params.r_pz - conflict.d_cpa) / dt_fallback;
    if (conflict.d_cpa > 1e-12) {
        return (conflict.d_cpa_vec / conflict.d_cpa) * magnitude;
    }
    Vec2 n = (own.velocity - intruder.velocity).perp_ccw().normalized();
    if (n.norm_sq() < 0.5) n = Vec2{1.0, 0.0};
    else if (own.velocity.cross(n) >= 0.0) n = -n;
    return n * magnitude;
}

ResolutionCommand combine(const KinematicState& own,
                          std::span<const Neighbor> others,
                          std::span<const ConflictPair> conflicts,
                          const DetectionParams& params,
                          double speed_min, double speed_max,
                          double dt_fallback) {
    if (conflicts.empty())
        throw std::domain_error("combine requires at least one conflict");
    Vec2 sum;
    for (const auto& c : conflicts) {
        const Neighbor* intruder = nullptr;
        for (const auto& o : others) {
            if (o.id == c.intruder_id) {
                intruder = &o;
                break;
            }
        }
        if (intruder == nullptr)
            throw std::domain_error("conflict references an unknown intruder id");
        sum += mvp_resolve(own, intruder->state, c, params, dt_fallback);
    }
    ResolutionCommand cmd;
    cmd.delta_v = sum;
    Vec2 result = own.velocity + sum;
    const double speed = result.norm();
    if (speed < 1e-9) {
        // fully cancelled command: hold the current track at minimum speed
        result = own.velocity.normalized() * speed_min;
    } else if (speed < speed_min) {
        result = result * (speed_min / speed);
    } else if (speed > speed_max) {
        result = result * (speed_max / speed);
    }
    cmd.resulting_velocity = result;
    return cmd;
}

bool recovery_check(const KinematicState& own,
                    std::span<const Neighbor> others,
                    const Vec2& original_velocity,
                    std::span<const std::pair<int, double>> conflict_memory,
                    const DetectionParams& params, double now) {
    for (const auto& [id, cpa_time] : conflict_memory) {
        (void)id;
        if (!(now > cpa_time)) return false;
    }
    KinematicState resumed{own.position, original_velocity};
    return detect(resumed, others, params).empty();
}

double severity(std::span<const ConflictPair> conflicts, int traffic_count,
                const DetectionParams& params) {
    if (traffic_count < 2)
        throw std::domain_error("severity requires at least two aircraft");
    double sum = 0.0;
    for (const auto& c : conflicts) {
        const double temporal = std::exp(-c.t_cpa / (0.35 * params.t_look));
        const double spatial = std::max((params.r_pz - c.d_cpa) / params.r_pz, 0.0);
        sum += temporal * spatial;
    }
    return sum / static_cast<double>(traffic_count - 1);
}

}  // namespace skyreserve::deconflict
