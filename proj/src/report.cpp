#include "skyreserve/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace skyreserve::report {

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw std::domain_error("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile level outside [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

std::map<int, std::vector<const features::TransitRecord*>> group_by_density(
    std::span<const features::TransitRecord> records) {
    std::map<int, std::vector<const features::TransitRecord*>> groups;
    for (const auto& r : records) groups[r.n_aircraft].push_back(&r);
    return groups;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

std::vector<OverheadStats> overhead_by_density(
    std::span<const features::TransitRecord> records) {
    std::vector<OverheadStats> out;
    for (const auto& [n, rows] : group_by_density(records)) {
        std::vector<double> xs;
        xs.reserve(rows.size());
        for (const auto* r : rows)
            if (!r->incomplete) xs.push_back(r->delta_e);
        if (xs.empty()) continue;
        OverheadStats s;
        s.n_aircraft = n;
        s.count = xs.size();
        double sum = 0.0;
        for (double x : xs) sum += x;
        s.mean = sum / static_cast<double>(xs.size());
        s.median = percentile(xs, 0.5);
        s.p90 = percentile(xs, 0.9);
        s.p95 = percentile(xs, 0.95);
        s.max = *std::max_element(xs.begin(), xs.end());
        out.push_back(s);
    }
    return out;
}

std::vector<ConflictFraction> conflict_fractions(
    std::span<const features::TransitRecord> records) {
    std::vector<ConflictFraction> out;
    for (const auto& [n, rows] : group_by_density(records)) {
        ConflictFraction f;
        f.n_aircraft = n;
        f.count = rows.size();
        std::size_t started = 0;
        for (const auto* r : rows) started += r->started_in_conflict ? 1 : 0;
        f.in_conflict = static_cast<double>(started) / static_cast<double>(rows.size());
        f.conflict_free = 1.0 - f.in_conflict;
        out.push_back(f);
    }
    return out;
}

std::vector<HistogramRow> log_overhead_histogram(
    std::span<const features::TransitRecord> records, int bins) {
    if (bins < 1) throw std::domain_error("histogram needs at least one bin");
    const double lo = -6.0, hi = 0.0;
    const double width = (hi - lo) / bins;
    std::vector<HistogramRow> out;
    for (const auto& [n, rows] : group_by_density(records)) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
        for (const auto* r : rows) {
            if (r->incomplete) continue;
            const double v = std::log10(std::max(r->delta_e, 1e-6));
            int k = static_cast<int>((v - lo) / width);
            k = std::clamp(k, 0, bins - 1);
            ++counts[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k < bins; ++k) {
            out.push_back({n, lo + k * width, lo + (k + 1) * width,
                           counts[static_cast<std::size_t>(k)]});
        }
    }
    return out;
}

void write_overhead_stats_csv(const std::vector<OverheadStats>& stats,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "n_aircraft,count,mean_pct,median_pct,p90_pct,p95_pct,max_pct\n";
    for (const auto& s : stats) {
        out << s.n_aircraft << ',' << s.count << ',' << fmt(100.0 * s.mean) << ','
            << fmt(100.0 * s.median) << ',' << fmt(100.0 * s.p90) << ','
            << fmt(100.0 * s.p95) << ',' << fmt(100.0 * s.max) << '\n';
    }
}

void write_conflict_fraction_csv(const std::vector<ConflictFraction>& fractions,
                                 const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "n_aircraft,count,conflict_free_fraction,in_conflict_fraction\n";
    for (const auto& f : fractions)
        out << f.n_aircraft << ',' << f.count << ',' << fmt(f.conflict_free) << ','
            << fmt(f.in_conflict) << '\n';
}

void write_histogram_csv(const std::vector<HistogramRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "n_aircraft,log10_delta_e_lo,log10_delta_e_hi,count\n";
    for (const auto& r : rows)
        out << r.n_aircraft << ',' << fmt(r.bin_lo) << ',' << fmt(r.bin_hi) << ','
            << r.count << '\n';
}

void write_run_summary_csv(const std::vector<simkit::RunResult>& results,
                           const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "n_aircraft,run,los_count,nmac_count,median_delta_e\n";
    for (const auto& r : results) {
        std::vector<double> xs;
        for (const auto& t : r.transits)
            if (!t.incomplete) xs.push_back(t.delta_e);
        const double median = xs.empty() ? std::nan("") : percentile(xs, 0.5);
        out << r.n_aircraft << ',' << r.run_index << ',' << r.los_count << ','
            << r.nmac_count << ',' << fmt(median) << '\n';
    }
}

}  // namespace skyreserve::report
