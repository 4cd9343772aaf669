#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "skyreserve/deconflict.hpp"
#include "skyreserve/features_data.hpp"
#include "skyreserve/geometry.hpp"
#include "skyreserve/powerplant.hpp"
#include "skyreserve/rng.hpp"

namespace skyreserve::simkit {

struct ScenarioConfig {
    int n_aircraft = 10;
    double sector_radius = 10.0 * 1852.0;                 // m
    double alpha = 0.9 * 1.7724538509055160273;           // 0.9 * sqrt(pi)
    double exit_bearing_min = 60.0 * 3.14159265358979323846 / 180.0;
    double exit_bearing_max = 3.14159265358979323846;
    double dt = 1.0;                                      // s
    double max_sim_time = 0.0;                            // s; 0 selects 3*(2R/speed_min)
    std::uint64_t seed = 42;
    int runs = 200;
    deconflict::DetectionParams detection;
    double nmac_threshold = 500.0 * 0.3048;               // m
    double radial_scale_min = 0.6;
    double radial_scale_max = 1.0;
    double neighbor_radius = 5.0 * 1852.0;                // m, feature extraction only
    int max_spawn_iterations = 10000;

    double d_min() const;
    /// Throws std::domain_error when invariants are violated.
    void validate() const;
};

struct Agent {
    int id = -1;
    deconflict::KinematicState state;
    Vec2 exit_waypoint;
    Vec2 original_velocity;
    bool maneuvering = false;
    std::vector<std::pair<int, double>> conflict_memory;  // (intruder id, absolute CPA time)
    double energy_acc = 0.0;        // J
    double path_length_acc = 0.0;   // m
    bool active = true;
    bool started_in_conflict = false;
    bool features_captured = false;
    features::FeatureVector features{};
    double min_separation = std::numeric_limits<double>::infinity();
    double time_in_sector = 0.0;
};

/// Per-transit outcome plus per-run separation events.
struct TransitOutcome {
    int agent_id = -1;
    double delta_e = 0.0;
    features::FeatureVector features{};
    bool started_in_conflict = false;
    bool incomplete = false;
    double min_separation = std::numeric_limits<double>::infinity();
    double time_in_sector = 0.0;
};

struct RunResult {
    int n_aircraft = 0;
    int run_index = 0;
    std::vector<TransitOutcome> transits;  // ordered by agent id
    int los_count = 0;                     // distinct pairs below r_pz
    int nmac_count = 0;                    // distinct pairs below the NMAC threshold
};

/// Values fixed for a whole batch: cruise density, the best-range speed and
/// the per-distance baseline.
struct SimEnvironment {
    double density = 0.0;     // kg/m^3
    double v_br = 0.0;        // m/s
    double e_baseline = 0.0;  // J/m
};

SimEnvironment make_environment(const powerplant::AircraftConfig& acft);

/// Exit waypoint on the boundary circle at the given bearing offset from the
/// entry bearing (counter-clockwise when ccw).
Vec2 exit_waypoint_for(const Vec2& entry_position, double sector_radius,
                       double bearing_offset, bool ccw);

/// Random exit assignment: offset uniform in [exit_bearing_min, max], side a
/// fair coin.
Vec2 assign_exit(const Vec2& entry_position, const ScenarioConfig& cfg, Rng& rng);

/// N agents at speed v_br heading for their exits. Positions sampled around
/// the circumference and scaled radially inward, then relaxed until every
/// pair is at least d_min apart. Throws std::runtime_error if the relaxation
/// does not settle within max_spawn_iterations sweeps.
std::vector<Agent> spawn_scenario(const ScenarioConfig& cfg, double v_br, Rng& rng);

struct RunEvents {
    std::set<std::pair<int, int>> los_pairs;
    std::set<std::pair<int, int>> nmac_pairs;
};

/// One synchronous simulation step at absolute time `now`: detect and
/// resolve on a frozen snapshot, advance states, accumulate energy and path,
/// deactivate arrivals, record separation events. When first_step is set the
/// pre-flight features are captured before any command applies.
void step(std::vector<Agent>& agents, const ScenarioConfig& cfg,
          const powerplant::AircraftConfig& acft, const SimEnvironment& env,
          double now, bool first_step, RunEvents& events);

/// Fractional per-distance energy overhead versus the conflict-free
/// baseline. Requires path_length_acc > 0.
double compute_overhead(const Agent& agent, const SimEnvironment& env);

RunResult run_scenario(const ScenarioConfig& cfg, const powerplant::AircraftConfig& acft,
                       const SimEnvironment& env, int run_index);

/// All runs of a batch; independent per-run seeds derived from (seed, N, run).
/// Runs may execute on up to max_threads workers (0 = hardware concurrency);
/// results are merged by run index so the output is thread-count invariant.
std::vector<RunResult> batch_runs(const ScenarioConfig& cfg,
                                  const powerplant::AircraftConfig& acft,
                                  int max_threads = 1);

/// Flatten a batch into dataset rows (ordered by run, then agent id).
std::vector<features::TransitRecord> to_records(const std::vector<RunResult>& results);

}  // namespace skyreserve::simkit
