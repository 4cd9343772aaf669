#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skyreserve/deconflict.hpp"
#include "skyreserve/geometry.hpp"

namespace skyreserve::features {

inline constexpr int kFeatureCount = 13;

/// Raw (un-normalized) pre-flight feature vector, in the fixed order below.
using FeatureVector = std::array<double, kFeatureCount>;

/// Column names for f1..f13, in order.
extern const std::array<const char*, kFeatureCount> kFeatureNames;

struct ExtractionParams {
    double v_br = 0.0;             // m/s
    double sector_radius = 0.0;    // m
    double neighbor_radius = 0.0;  // m
    int n_traffic = 0;             // aircraft count of the scenario
    deconflict::DetectionParams detection;
};

/// Ownship view of the step-0 snapshot: everything feature extraction is
/// allowed to see. Built once per agent before the first command applies.
struct StepZeroView {
    deconflict::KinematicState own;
    Vec2 exit_waypoint;
    std::vector<deconflict::Neighbor> others;           // all other active agents
    std::vector<deconflict::ConflictPair> conflicts;    // ownship conflicts
    Vec2 delta_v_sum;         // summed resolution, pre-clamp (zero when no conflict)
    Vec2 resulting_velocity;  // commanded velocity, post-clamp (own velocity when none)
};

FeatureVector extract_features(const StepZeroView& view, const ExtractionParams& params);

/// One labeled sector transit; the dataset row.
struct TransitRecord {
    int n_aircraft = 0;
    int run = 0;
    int agent = 0;
    bool started_in_conflict = false;
    bool incomplete = false;
    FeatureVector features{};
    double delta_e = 0.0;
};

/// CSV persistence. Header:
/// n_aircraft,run,agent,started_in_conflict,incomplete,f1,...,f13,delta_e
/// Floats carry 9 significant digits.
void write_dataset(std::span<const TransitRecord> records, const std::string& path);
std::vector<TransitRecord> read_dataset(const std::string& path);

/// Records usable for model fitting (incomplete transits excluded).
std::vector<TransitRecord> complete_records(std::span<const TransitRecord> records);

/// Per-feature z-score statistics fit on the training split. Features with
/// zero variance are deactivated (with a warning) and map to 0.
struct NormalizationStats {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> stddev{};
    std::array<bool, kFeatureCount> active{};
};

NormalizationStats fit_normalization(std::span<const TransitRecord> training);
std::array<double, kFeatureCount> apply_normalization(const NormalizationStats& stats,
                                                      const FeatureVector& raw);

}  // namespace skyreserve::features
