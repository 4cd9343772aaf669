#include "skyreserve/features_data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace skyreserve::features {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "speed_dev",       "radial_pos", "route_dist",   "bearing_var",
    "speed_var",       "heading_offset", "mvp_dpsi", "mvp_dv",
    "congestion",      "nbr_conflict_density", "w_deg", "min_tcpa",
    "min_dcpa",
};

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNmToM = 1852.0;

bool pair_in_conflict(const deconflict::KinematicState& a,
                      const deconflict::KinematicState& b,
                      const deconflict::DetectionParams& params) {
    const deconflict::Neighbor nb{0, b};
    return !deconflict::detect(a, std::span<const deconflict::Neighbor>{&nb, 1}, params)
                .empty();
}

double population_variance(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return var / static_cast<double>(xs.size());
}

}  // namespace

FeatureVector extract_features(const StepZeroView& view, const ExtractionParams& params) {
    FeatureVector f{};
    const double speed = view.own.velocity.norm();
    const double heading = view.own.velocity.heading();

    f[0] = (speed - params.v_br) / params.v_br;
    f[1] = view.own.position.norm() / params.sector_radius;
    f[2] = (view.exit_waypoint - view.own.position).norm() / (2.0 * params.sector_radius);

    // neighborhood statistics
    std::vector<const deconflict::Neighbor*> neighbors;
    for (const auto& o : view.others) {
        if ((o.state.position - view.own.position).norm() <= params.neighbor_radius)
            neighbors.push_back(&o);
    }
    if (!neighbors.empty()) {
        std::vector<double> bearings, speeds;
        double sum_sin = 0.0, sum_cos = 0.0;
        bearings.reserve(neighbors.size());
        speeds.reserve(neighbors.size());
        for (const auto* nb : neighbors) {
            const Vec2 rel = nb->state.position - view.own.position;
            bearings.push_back(wrap_angle(rel.heading() - heading));
            speeds.push_back(nb->state.velocity.norm());
            const double h = nb->state.velocity.heading();
            sum_sin += std::sin(h);
            sum_cos += std::cos(h);
        }
        f[3] = population_variance(bearings);
        f[4] = population_variance(speeds) / (params.v_br * params.v_br);
        const double mean_heading = std::atan2(sum_sin, sum_cos);
        f[5] = std::abs(wrap_angle(heading - mean_heading));
    }

    if (view.conflicts.empty()) {
        f[6] = 0.0;
        f[7] = 0.0;
    } else {
        f[6] = signed_angle(view.own.velocity, view.resulting_velocity);
        f[7] = view.delta_v_sum.norm() / params.v_br;
    }

    const double radius_nm = params.sector_radius / kNmToM;
    f[8] = static_cast<double>(params.n_traffic) / (kPi * radius_nm * radius_nm) * 1000.0;

    // conflict density over the neighbor set, ownship included
    if (!neighbors.empty()) {
        std::vector<deconflict::KinematicState> set;
        set.push_back(view.own);
        for (const auto* nb : neighbors) set.push_back(nb->state);
        const std::size_t m = set.size();
        std::size_t conflicting = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                if (pair_in_conflict(set[i], set[j], params.detection)) ++conflicting;
        const std::size_t pairs = m * (m - 1) / 2;
        f[9] = static_cast<double>(conflicting) / static_cast<double>(pairs);
    }

    if (!view.conflicts.empty()) {
        f[10] = deconflict::severity(view.conflicts, params.n_traffic, params.detection);
        double min_tcpa = view.conflicts.front().t_cpa;
        double min_dcpa = view.conflicts.front().d_cpa;
        for (const auto& c : view.conflicts) {
            min_tcpa = std::min(min_tcpa, c.t_cpa);
            min_dcpa = std::min(min_dcpa, c.d_cpa);
        }
        f[11] = min_tcpa / params.detection.t_look;
        f[12] = min_dcpa / params.detection.r_pz;
    } else {
        f[10] = 0.0;
        f[11] = 1.0;
        f[12] = 1.0;
    }
    return f;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

void write_dataset(std::span<const TransitRecord> records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);
    out << "n_aircraft,run,agent,started_in_conflict,incomplete";
    for (int i = 1; i <= kFeatureCount; ++i) out << ",f" << i;
    out << ",delta_e\n";
    for (const auto& r : records) {
        out << r.n_aircraft << ',' << r.run << ',' << r.agent << ','
            << (r.started_in_conflict ? 1 : 0) << ',' << (r.incomplete ? 1 : 0);
        for (double v : r.features) out << ',' << format_double(v);
        out << ',' << format_double(r.delta_e) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing dataset file: " + path);
}

std::vector<TransitRecord> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<TransitRecord> records;
    std::string line;
    int line_no = 0;
    const int expected_fields = 5 + kFeatureCount + 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) continue;  // header
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (static_cast<int>(fields.size()) != expected_fields)
            throw std::runtime_error("malformed dataset row at line " +
                                     std::to_string(line_no) + ": expected " +
                                     std::to_string(expected_fields) + " fields, got " +
                                     std::to_string(fields.size()));
        try {
            TransitRecord r;
            r.n_aircraft = std::stoi(fields[0]);
            r.run = std::stoi(fields[1]);
            r.agent = std::stoi(fields[2]);
            r.started_in_conflict = std::stoi(fields[3]) != 0;
            r.incomplete = std::stoi(fields[4]) != 0;
            for (int i = 0; i < kFeatureCount; ++i)
                r.features[i] = std::stod(fields[5 + i]);
            r.delta_e = std::stod(fields[5 + kFeatureCount]);
            records.push_back(r);
        } catch (const std::exception&) {
            throw std::runtime_error("malformed dataset value at line " +
                                     std::to_string(line_no));
        }
    }
    return records;
}

std::vector<TransitRecord> complete_records(std::span<const TransitRecord> records) {
    std::vector<TransitRecord> out;
    out.reserve(records.size());
    for (const auto& r : records)
        if (!r.incomplete) out.push_back(r);
    return out;
}

NormalizationStats fit_normalization(std::span<const TransitRecord> training) {
    if (training.size() < 2)
        throw std::domain_error("normalization requires at least two records");
    NormalizationStats stats;
    const double n = static_cast<double>(training.size());
    for (int i = 0; i < kFeatureCount; ++i) {
        double mean = 0.0;
        for (const auto& r : training) mean += r.features[i];
        mean /= n;
        double var = 0.0;
        for (const auto& r : training) {
            const double d = r.features[i] - mean;
            var += d * d;
        }
        var /= n;
        stats.mean[i] = mean;
        if (var > 0.0) {
            stats.stddev[i] = std::sqrt(var);
            stats.active[i] = true;
        } else {
            stats.stddev[i] = 1.0;
            stats.active[i] = false;
            std::cerr << "warning: feature f" << (i + 1) << " (" << kFeatureNames[i]
                      << ") has zero variance on the training split; dropped\n";
        }
    }
    return stats;
}

std::array<double, kFeatureCount> apply_normalization(const NormalizationStats& stats,
                                                      const FeatureVector& raw) {
    std::array<double, kFeatureCount> out{};
    for (int i = 0; i < kFeatureCount; ++i)
        out[i] = stats.active[i] ? (raw[i] - stats.mean[i]) / stats.stddev[i] : 0.0;
    return out;
}

}  // namespace skyreserve::features
