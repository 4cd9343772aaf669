#pragma once

#include <span>
#include <string>
#include <vector>

#include "skyreserve/features_data.hpp"
#include "skyreserve/simkit.hpp"

namespace skyreserve::report {

/// Quantile by linear interpolation between order statistics
/// (rank = q * (n - 1)). q in [0, 1].
double percentile(std::span<const double> values, double q);

struct OverheadStats {
    int n_aircraft = 0;
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
};

/// Per-density overhead statistics over complete transits (fractions).
std::vector<OverheadStats> overhead_by_density(
    std::span<const features::TransitRecord> records);

struct ConflictFraction {
    int n_aircraft = 0;
    std::size_t count = 0;
    double conflict_free = 0.0;  // fraction starting without a detected conflict
    double in_conflict = 0.0;
};

std::vector<ConflictFraction> conflict_fractions(
    std::span<const features::TransitRecord> records);

struct HistogramRow {
    int n_aircraft = 0;
    double bin_lo = 0.0;  // log10(delta_e), overhead floored at 1e-6
    double bin_hi = 0.0;
    std::size_t count = 0;
};

std::vector<HistogramRow> log_overhead_histogram(
    std::span<const features::TransitRecord> records, int bins = 48);

void write_overhead_stats_csv(const std::vector<OverheadStats>& stats,
                              const std::string& path);
void write_conflict_fraction_csv(const std::vector<ConflictFraction>& fractions,
                                 const std::string& path);
void write_histogram_csv(const std::vector<HistogramRow>& rows, const std::string& path);
void write_run_summary_csv(const std::vector<simkit::RunResult>& results,
                           const std::string& path);

}  // namespace skyreserve::report
