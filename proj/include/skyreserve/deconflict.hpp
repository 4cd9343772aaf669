#pragma once

#include <span>
#include <utility>
#include <vector>

#include "skyreserve/geometry.hpp"

namespace skyreserve::deconflict {

/// 2-D state of one agent at one instant.
struct KinematicState {
    Vec2 position;  // m, sector-local
    Vec2 velocity;  // m/s
};

struct DetectionParams {
    double r_pz = 0.6 * 1852.0;  // protected-zone radius, m
    double t_look = 90.0;        // look-ahead horizon, s
};

/// A predicted loss of separation with one intruder.
/// d_cpa_vec is ownship-minus-intruder at the closest point of approach.
struct ConflictPair {
    int intruder_id = -1;
    double t_cpa = 0.0;
    Vec2 d_cpa_vec;
    double d_cpa = 0.0;
};

struct ResolutionCommand {
    Vec2 delta_v;             // summed resolution, before the speed clamp
    Vec2 resulting_velocity;  // own velocity + delta_v, magnitude clamped
};

struct CpaResult {
    double t_cpa = 0.0;
    Vec2 d_cpa_vec;
};

struct Neighbor {
    int id = -1;
    KinematicState state;
};

/// Closest point of approach under constant-velocity extrapolation.
/// Relative velocities below 1e-9 m/s are treated as parallel flight
/// (t_cpa = 0, current separation).
CpaResult cpa(const KinematicState& own, const KinematicState& intruder);

/// All intruders predicted to breach the protected zone strictly within the
/// look-ahead (||d_cpa|| < r_pz and t_cpa < t_look). A current intrusion
/// (|d| < r_pz now) is reported with t_cpa = 0 and the present separation.
std::vector<ConflictPair> detect(const KinematicState& own,
                                 std::span<const Neighbor> others,
                                 const DetectionParams& params);

/// Minimal velocity change moving the predicted miss point onto the
/// protected-zone boundary. For a current intrusion (t_cpa = 0) a direct
/// repulsion of magnitude (r_pz - |d|)/dt_fallback is used instead.
Vec2 mvp_resolve(const KinematicState& own, const KinematicState& intruder,
                 const ConflictPair& conflict, const DetectionParams& params,
                 double dt_fallback = 1.0);

/// Sum of the per-conflict resolutions applied to the own velocity,
/// with the resulting speed clamped into [speed_min, speed_max].
ResolutionCommand combine(const KinematicState& own,
                          std::span<const Neighbor> others,
                          std::span<const ConflictPair> conflicts,
                          const DetectionParams& params,
                          double speed_min, double speed_max,
                          double dt_fallback = 1.0);

/// True when every remembered conflict's stored CPA time lies in the past
/// and re-adopting the original velocity raises no conflict.
/// conflict_memory holds (intruder id, absolute CPA time) pairs.
bool recovery_check(const KinematicState& own,
                    std::span<const Neighbor> others,
                    const Vec2& original_velocity,
                    std::span<const std::pair<int, double>> conflict_memory,
                    const DetectionParams& params, double now);

/// Conflict-severity weight: temporally imminent and deeply intruding
/// conflicts dominate; normalized by N-1 for cross-density comparability.
double severity(std::span<const ConflictPair> conflicts, int traffic_count,
                const DetectionParams& params);

}  // namespace skyreserve::deconflict
