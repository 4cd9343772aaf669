#include "skyreserve/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "skyreserve/units_atmos.hpp"

namespace skyreserve::simkit {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kGoldenAngle = 2.399963229728653;
}

double ScenarioConfig::d_min() const {
    return alpha * sector_radius / std::sqrt(static_cast<double>(n_aircraft));
}

void ScenarioConfig::validate() const {
    if (n_aircraft < 2) throw std::domain_error("scenario needs at least two aircraft");
    if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
    if (!(sector_radius > 0.0)) throw std::domain_error("sector radius must be positive");
    if (!(d_min() > 2.0 * nmac_threshold))
        throw std::domain_error("initial spacing d_min must exceed twice the NMAC threshold");
    if (!(detection.r_pz > 0.0 && detection.t_look > 0.0))
        throw std::domain_error("detection parameters must be positive");
    if (!(radial_scale_min >= 0.0 && radial_scale_min < radial_scale_max &&
          radial_scale_max <= 1.0))
        throw std::domain_error("radial scale range must satisfy 0 <= min < max <= 1");
    if (!(exit_bearing_min > 0.0 && exit_bearing_min < exit_bearing_max &&
          exit_bearing_max <= kPi))
        throw std::domain_error("exit bearing range must lie within (0, pi]");
    if (runs < 1) throw std::domain_error("runs must be positive");
}

SimEnvironment make_environment(const powerplant::AircraftConfig& acft) {
    SimEnvironment env;
    env.density = units::isa_density(acft.cruise_altitude);
    env.v_br = powerplant::best_range_speed(acft, env.density);
    env.e_baseline =
        powerplant::total_power(acft, env.v_br, env.density).electrical_total / env.v_br;
    return env;
}

Vec2 exit_waypoint_for(const Vec2& entry_position, double sector_radius,
                       double bearing_offset, bool ccw) {
    if (entry_position.norm_sq() <= 0.0)
        throw std::domain_error("entry position must be nonzero");
    const double entry_bearing = entry_position.heading();
    const double angle = entry_bearing + (ccw ? bearing_offset : -bearing_offset);
    return {sector_radius * std::cos(angle), sector_radius * std::sin(angle)};
}

Vec2 assign_exit(const Vec2& entry_position, const ScenarioConfig& cfg, Rng& rng) {
    const double beta = rng.uniform(cfg.exit_bearing_min, cfg.exit_bearing_max);
    const bool ccw = rng.coin();
    return exit_waypoint_for(entry_position, cfg.sector_radius, beta, ccw);
}

std::vector<Agent> spawn_scenario(const ScenarioConfig& cfg, double v_br, Rng& rng) {
    const int n = cfg.n_aircraft;
    const double d_min = cfg.d_min();
    std::vector<Vec2> pos(n);
    for (int i = 0; i < n; ++i) {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double u = rng.uniform(cfg.radial_scale_min, cfg.radial_scale_max);
        const double r = u * cfg.sector_radius;
        pos[i] = {r * std::cos(theta), r * std::sin(theta)};
    }
    // Pairwise-repulsion relaxation: push violating pairs apart until every
    // separation reaches d_min. Positions may drift inward but stay inside
    // the sector disk. Deterministic sweep order keeps replay exact.
    const double target = d_min * (1.0 + 1e-7);
    bool settled = false;
    for (int sweep = 0; sweep < cfg.max_spawn_iterations && !settled; ++sweep) {
        settled = true;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                Vec2 diff = pos[i] - pos[j];
                const double dist = diff.norm();
                if (dist >= d_min) continue;
                settled = false;
                Vec2 dir;
                if (dist < 1e-9) {
                    const double a = kGoldenAngle * (static_cast<double>(i) * n + j);
                    dir = {std::cos(a), std::sin(a)};
                } else {
                    dir = diff / dist;
                }
                const double push = 0.5 * (target - dist);
                pos[i] += dir * push;
                pos[j] -= dir * push;
                for (Vec2* p : {&pos[i], &pos[j]}) {
                    const double r = p->norm();
                    if (r > cfg.sector_radius) *p *= cfg.sector_radius / r;
                }
            }
        }
    }
    if (!settled)
        throw std::runtime_error("scenario infeasible: spawn relaxation did not settle");

    std::vector<Agent> agents(n);
    for (int i = 0; i < n; ++i) {
        Agent& a = agents[i];
        a.id = i;
        a.state.position = pos[i];
        a.exit_waypoint = assign_exit(pos[i], cfg, rng);
        a.state.velocity = (a.exit_waypoint - pos[i]).normalized() * v_br;
        a.original_velocity = a.state.velocity;
    }
    return agents;
}

namespace {

std::vector<deconflict::Neighbor> snapshot_others(const std::vector<Agent>& agents,
                                                  int self_id) {
    std::vector<deconflict::Neighbor> others;
    others.reserve(agents.size());
    for (const auto& a : agents) {
        if (a.id == self_id || !a.active) continue;
        others.push_back({a.id, a.state});
    }
    return others;
}

}  // namespace

void step(std::vector<Agent>& agents, const ScenarioConfig& cfg,
          const powerplant::AircraftConfig& acft, const SimEnvironment& env,
          double now, bool first_step, RunEvents& events) {
    bool any_active = false;
    for (const auto& a : agents) any_active |= a.active;
    if (!any_active) throw std::domain_error("step requires at least one active agent");

    // Phase 1: all commands from the same frozen snapshot.
    const std::vector<Agent> snapshot = agents;
    std::vector<Vec2> new_velocity(agents.size());
    for (auto& agent : agents) {
        if (!agent.active) continue;
        const Agent& self = snapshot[static_cast<std::size_t>(agent.id)];
        new_velocity[agent.id] = self.state.velocity;
        const auto others = snapshot_others(snapshot, agent.id);
        const auto conflicts = deconflict::detect(self.state, others, cfg.detection);

        deconflict::ResolutionCommand cmd{{0.0, 0.0}, self.state.velocity};
        if (!conflicts.empty()) {
            cmd = deconflict::combine(self.state, others, conflicts, cfg.detection,
                                      acft.speed_min, acft.speed_max, cfg.dt);
        }
        if (first_step) {
            features::StepZeroView view;
            view.own = self.state;
            view.exit_waypoint = agent.exit_waypoint;
            view.others = others;
            view.conflicts = conflicts;
            view.delta_v_sum = cmd.delta_v;
            view.resulting_velocity = cmd.resulting_velocity;
            features::ExtractionParams params;
            params.v_br = env.v_br;
            params.sector_radius = cfg.sector_radius;
            params.neighbor_radius = cfg.neighbor_radius;
            params.n_traffic = cfg.n_aircraft;
            params.detection = cfg.detection;
            agent.features = features::extract_features(view, params);
            agent.features_captured = true;
            agent.started_in_conflict = !conflicts.empty();
        }
        if (!conflicts.empty()) {
            for (const auto& c : conflicts) {
                const bool known = std::any_of(
                    agent.conflict_memory.begin(), agent.conflict_memory.end(),
                    [&](const auto& m) { return m.first == c.intruder_id; });
                if (!known)
                    agent.conflict_memory.emplace_back(c.intruder_id, now + c.t_cpa);
            }
            agent.maneuvering = true;
            new_velocity[agent.id] = cmd.resulting_velocity;
        } else if (agent.maneuvering) {
            if (deconflict::recovery_check(self.state, others, agent.original_velocity,
                                           agent.conflict_memory, cfg.detection, now)) {
                new_velocity[agent.id] = agent.original_velocity;
                agent.maneuvering = false;
                agent.conflict_memory.clear();
            }
        }
    }

    // Phase 2: synchronous state advance and accounting.
    for (auto& agent : agents) {
        if (!agent.active) continue;
        agent.state.velocity = new_velocity[agent.id];
        const double speed = agent.state.velocity.norm();
        agent.state.position += agent.state.velocity * cfg.dt;
        // the command clamp bounds the speed; guard the power lookup against
        // the last-ulp rounding of the norm
        const double power_speed = std::clamp(speed, acft.speed_min, acft.speed_max);
        agent.energy_acc +=
            powerplant::total_power(acft, power_speed, env.density).electrical_total * cfg.dt;
        agent.path_length_acc += speed * cfg.dt;
        agent.time_in_sector += cfg.dt;
    }

    // Separation events among agents still in the sector.
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!agents[i].active) continue;
        for (std::size_t j = i + 1; j < agents.size(); ++j) {
            if (!agents[j].active) continue;
            const double sep = (agents[i].state.position - agents[j].state.position).norm();
            agents[i].min_separation = std::min(agents[i].min_separation, sep);
            agents[j].min_separation = std::min(agents[j].min_separation, sep);
            if (sep < cfg.detection.r_pz)
                events.los_pairs.insert({agents[i].id, agents[j].id});
            if (sep < cfg.nmac_threshold)
                events.nmac_pairs.insert({agents[i].id, agents[j].id});
        }
    }

    // Arrivals: within one step's travel of the exit, or outbound past the
    // boundary after a maneuver displaced the track.
    for (auto& agent : agents) {
        if (!agent.active) continue;
        const double speed = agent.state.velocity.norm();
        const bool at_exit =
            (agent.state.position - agent.exit_waypoint).norm() <= speed * cfg.dt;
        const bool outbound = agent.state.position.norm() > cfg.sector_radius &&
                              agent.state.position.dot(agent.state.velocity) > 0.0;
        if (at_exit || outbound) agent.active = false;
    }
}

double compute_overhead(const Agent& agent, const SimEnvironment& env) {
    if (!(agent.path_length_acc > 0.0))
        throw std::domain_error("transit has no path length");
    const double e_actual = agent.energy_acc / agent.path_length_acc;
    return (e_actual - env.e_baseline) / env.e_baseline;
}

RunResult run_scenario(const ScenarioConfig& cfg, const powerplant::AircraftConfig& acft,
                       const SimEnvironment& env, int run_index) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(cfg.n_aircraft) * 1000003ULL +
                                      static_cast<std::uint64_t>(run_index)));
    std::vector<Agent> agents = spawn_scenario(cfg, env.v_br, rng);
    const double max_time = cfg.max_sim_time > 0.0
                                ? cfg.max_sim_time
                                : 3.0 * (2.0 * cfg.sector_radius / acft.speed_min);
    RunEvents events;
    double now = 0.0;
    bool first = true;
    while (now < max_time) {
        bool any_active = false;
        for (const auto& a : agents) any_active |= a.active;
        if (!any_active) break;
        step(agents, cfg, acft, env, now, first, events);
        first = false;
        now += cfg.dt;
    }

    RunResult result;
    result.n_aircraft = cfg.n_aircraft;
    result.run_index = run_index;
    result.los_count = static_cast<int>(events.los_pairs.size());
    result.nmac_count = static_cast<int>(events.nmac_pairs.size());
    result.transits.reserve(agents.size());
    for (const auto& a : agents) {
        TransitOutcome t;
        t.agent_id = a.id;
        t.delta_e = compute_overhead(a, env);
        t.features = a.features;
        t.started_in_conflict = a.started_in_conflict;
        t.incomplete = a.active;  // still flying at max_sim_time
        t.min_separation = a.min_separation;
        t.time_in_sector = a.time_in_sector;
        result.transits.push_back(t);
    }
    return result;
}

std::vector<RunResult> batch_runs(const ScenarioConfig& cfg,
                                  const powerplant::AircraftConfig& acft,
                                  int max_threads) {
    cfg.validate();
    acft.validate();
    const SimEnvironment env = make_environment(acft);
    std::vector<RunResult> results(static_cast<std::size_t>(cfg.runs));
    int workers = max_threads > 0
                      ? max_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.runs);
    if (workers == 1) {
        for (int r = 0; r < cfg.runs; ++r)
            results[r] = run_scenario(cfg, acft, env, r);
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int r = next.fetch_add(1); r < cfg.runs; r = next.fetch_add(1))
                results[r] = run_scenario(cfg, acft, env, r);
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

std::vector<features::TransitRecord> to_records(const std::vector<RunResult>& results) {
    std::vector<features::TransitRecord> records;
    for (const auto& run : results) {
        for (const auto& t : run.transits) {
            features::TransitRecord rec;
            rec.n_aircraft = run.n_aircraft;
            rec.run = run.run_index;
            rec.agent = t.agent_id;
            rec.started_in_conflict = t.started_in_conflict;
            rec.incomplete = t.incomplete;
            rec.features = t.features;
            rec.delta_e = t.delta_e;
            records.push_back(rec);
        }
    }
    return records;
}

}  // namespace skyreserve::simkit
