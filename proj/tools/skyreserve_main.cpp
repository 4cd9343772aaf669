// skyreserve: eVTOL sector-transit energy simulation and reserve prediction.
//
// Subcommands: simulate, report, train, evaluate, predict, powertable.
// Exit codes: 0 success, 2 configuration/usage error, 3 runtime/data error.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skyreserve/config_file.hpp"
#include "skyreserve/features_data.hpp"
#include "skyreserve/powerplant.hpp"
#include "skyreserve/predictor.hpp"
#include "skyreserve/report.hpp"
#include "skyreserve/simkit.hpp"
#include "skyreserve/units_atmos.hpp"

namespace {

namespace fs = std::filesystem;
using namespace skyreserve;

constexpr const char* kVersion = "1.0.0";

int thread_budget(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("SKYRESERVE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 0;  // hardware concurrency
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

config::ProjectConfig resolve_config(const std::string& config_path) {
    if (config_path.empty()) return config::defaults();
    return config::load_file(config_path);
}

struct SimulateOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<int> densities;
    int runs = 0;
    std::int64_t seed = -1;
    bool paper_scale = false;
    int threads = 0;
};

int cmd_simulate(const SimulateOptions& opt) {
    config::ProjectConfig cfg = resolve_config(opt.config_path);
    if (opt.paper_scale) {
        cfg.densities = {10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
        cfg.scenario.runs = 200;
    }
    if (!opt.densities.empty()) cfg.densities = opt.densities;
    if (opt.runs > 0) cfg.scenario.runs = opt.runs;
    if (opt.seed >= 0) cfg.scenario.seed = static_cast<std::uint64_t>(opt.seed);
    for (int n : cfg.densities) {
        simkit::ScenarioConfig probe = cfg.scenario;
        probe.n_aircraft = n;
        probe.validate();
    }

    fs::create_directories(opt.out_dir);
    const std::string dataset_path = (fs::path(opt.out_dir) / "dataset.csv").string();
    const std::string summary_path = (fs::path(opt.out_dir) / "run_summary.csv").string();
    const std::string manifest_path = (fs::path(opt.out_dir) / "manifest.json").string();

    const int threads = thread_budget(opt.threads);
    std::vector<features::TransitRecord> records;
    std::vector<simkit::RunResult> all_runs;
    for (int n : cfg.densities) {
        simkit::ScenarioConfig scn = cfg.scenario;
        scn.n_aircraft = n;
        auto results = simkit::batch_runs(scn, cfg.aircraft, threads);
        auto batch_records = simkit::to_records(results);
        records.insert(records.end(), batch_records.begin(), batch_records.end());
        all_runs.insert(all_runs.end(), results.begin(), results.end());
        std::size_t incomplete = 0;
        int nmacs = 0;
        for (const auto& r : results) {
            nmacs += r.nmac_count;
            for (const auto& t : r.transits) incomplete += t.incomplete ? 1 : 0;
        }
        std::cerr << "density " << n << ": " << results.size() << " runs, " << incomplete
                  << " incomplete transits, " << nmacs << " NMAC pairs\n";
    }
    features::write_dataset(records, dataset_path);
    report::write_run_summary_csv(all_runs, summary_path);

    nlohmann::ordered_json manifest;
    manifest["tool"] = "skyreserve";
    manifest["version"] = kVersion;
    manifest["created_utc"] = iso_timestamp();
    manifest["seed"] = cfg.scenario.seed;
    manifest["densities"] = cfg.densities;
    manifest["runs_per_density"] = cfg.scenario.runs;
    manifest["record_count"] = records.size();
    manifest["config_text"] = config::to_text(cfg);
    manifest["outputs"] = nlohmann::ordered_json::array();
    for (const std::string& p : {dataset_path, summary_path}) {
        manifest["outputs"].push_back({{"path", p},
                                       {"bytes", fs::file_size(p)},
                                       {"fnv1a64", hex64(fnv1a64_file(p))}});
    }
    std::ofstream mf(manifest_path);
    mf << manifest.dump(2) << "\n";
    std::cout << "wrote " << dataset_path << " (" << records.size() << " transits), "
              << summary_path << ", " << manifest_path << "\n";
    return 0;
}

int cmd_report(const std::string& dataset_path, const std::string& out_dir) {
    const auto records = features::read_dataset(dataset_path);
    if (records.empty()) throw std::runtime_error("dataset is empty: " + dataset_path);
    fs::create_directories(out_dir);
    const auto stats = report::overhead_by_density(records);
    const auto fractions = report::conflict_fractions(records);
    const auto hist = report::log_overhead_histogram(records);
    report::write_overhead_stats_csv(stats,
                                     (fs::path(out_dir) / "overhead_stats.csv").string());
    report::write_conflict_fraction_csv(
        fractions, (fs::path(out_dir) / "conflict_fraction.csv").string());
    report::write_histogram_csv(hist, (fs::path(out_dir) / "overhead_hist.csv").string());

    std::cout << "n_aircraft  count   mean%   median%     p90%     p95%     max%\n";
    for (const auto& s : stats) {
        std::printf("%10d %6zu %7.3f %9.3f %8.3f %8.3f %8.2f\n", s.n_aircraft, s.count,
                    100.0 * s.mean, 100.0 * s.median, 100.0 * s.p90, 100.0 * s.p95,
                    100.0 * s.max);
    }
    std::cout << "reports written to " << out_dir << "\n";
    return 0;
}

struct TrainOptions {
    std::string config_path;
    std::string dataset_path;
    std::string out_path = "model.ckpt";
    int epochs = 0;
    std::int64_t seed = -1;
    bool paper_scale = false;
};

int cmd_train(const TrainOptions& opt) {
    config::ProjectConfig cfg = resolve_config(opt.config_path);
    if (opt.paper_scale) cfg.train.epochs = 10000;
    if (opt.epochs > 0) cfg.train.epochs = opt.epochs;
    if (opt.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(opt.seed);
    const auto records = features::read_dataset(opt.dataset_path);
    const auto ckpt = predictor::train(records, cfg.net, cfg.train);
    predictor::save_checkpoint(ckpt, opt.out_path);
    std::cout << "trained " << ckpt.log.size() - 1 << " epochs; best validation NLL "
              << ckpt.best_val_nll << " at epoch " << ckpt.best_epoch << "\n"
              << "checkpoint written to " << opt.out_path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& dataset_path,
                 const std::string& out_dir) {
    const auto ckpt = predictor::load_checkpoint(ckpt_path);
    const auto records = features::read_dataset(dataset_path);
    std::vector<predictor::PredictionRow> rows;
    const auto m = predictor::evaluate(ckpt, records, &rows);
    fs::create_directories(out_dir);

    const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    {
        std::ofstream out(metrics_path);
        out << "metric,value\n";
        out << "count," << m.count << "\n";
        out << "mae," << m.mae << "\n";
        out << "rmse," << m.rmse << "\n";
        out << "r2," << m.r2 << "\n";
        out << "pearson," << m.pearson << "\n";
        out << "coverage80," << m.coverage80 << "\n";
        out << "coverage90," << m.coverage90 << "\n";
        out << "width80," << m.width80 << "\n";
        out << "width90," << m.width90 << "\n";
        out << "z_resid_mean," << m.z_resid_mean << "\n";
        out << "z_resid_std," << m.z_resid_std << "\n";
        out << "val_nll," << m.nll << "\n";
    }
    const std::string pred_path = (fs::path(out_dir) / "predictions.csv").string();
    {
        std::ofstream out(pred_path);
        out << "delta_e_obs,delta_e_mean,q05,q10,q50,q90,q95\n";
        char buf[256];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          r.delta_e_obs, r.delta_e_mean, r.q05, r.q10, r.q50, r.q90,
                          r.q95);
            out << buf;
        }
    }
    std::printf("validation n=%zu  MAE %.4f%%  RMSE %.4f%%  R2 %.3f  Pearson %.3f\n",
                m.count, 100.0 * m.mae, 100.0 * m.rmse, m.r2, m.pearson);
    std::printf("coverage 80/90: %.1f%% / %.1f%%  width 80/90: %.3f%% / %.3f%%\n",
                100.0 * m.coverage80, 100.0 * m.coverage90, 100.0 * m.width80,
                100.0 * m.width90);
    std::printf("z-residuals: mean %.3f std %.3f   validation NLL %.6f\n", m.z_resid_mean,
                m.z_resid_std, m.nll);
    std::cout << "wrote " << metrics_path << " and " << pred_path << "\n";
    return 0;
}

struct PredictOptions {
    std::string ckpt_path;
    std::string features_csv;
    std::string dataset_path;
    std::int64_t row = -1;
};

int cmd_predict(const PredictOptions& opt) {
    const auto ckpt = predictor::load_checkpoint(opt.ckpt_path);
    features::FeatureVector raw{};
    if (!opt.features_csv.empty()) {
        std::stringstream ss(opt.features_csv);
        std::string tok;
        int i = 0;
        while (std::getline(ss, tok, ',')) {
            if (i >= features::kFeatureCount)
                throw std::runtime_error("expected exactly 13 feature values");
            raw[i++] = std::stod(tok);
        }
        if (i != features::kFeatureCount)
            throw std::runtime_error("expected exactly 13 feature values, got " +
                                     std::to_string(i));
    } else if (!opt.dataset_path.empty() && opt.row >= 0) {
        const auto records = features::read_dataset(opt.dataset_path);
        if (static_cast<std::size_t>(opt.row) >= records.size())
            throw std::runtime_error("row index out of range");
        raw = records[static_cast<std::size_t>(opt.row)].features;
    } else {
        throw std::runtime_error("provide --features or --dataset with --row");
    }
    const auto x = features::apply_normalization(ckpt.norm, raw);
    const auto p = predictor::forward(ckpt.params, ckpt.net,
                                      std::span<const double>(x.data(), x.size()));
    const double mean = predictor::predict_mean(p);
    std::printf("mu_z %.6f  sigma_z %.6f\n", p.mu_z, std::sqrt(p.sigma_z2));
    std::printf("expected overhead: %.3f%%\n", 100.0 * mean);
    std::printf("quantiles: q05 %.3f%%  q10 %.3f%%  q50 %.3f%%  q90 %.3f%%  q95 %.3f%%\n",
                100.0 * predictor::predict_quantile(p, 0.05),
                100.0 * predictor::predict_quantile(p, 0.10),
                100.0 * predictor::predict_quantile(p, 0.50),
                100.0 * predictor::predict_quantile(p, 0.90),
                100.0 * predictor::predict_quantile(p, 0.95));
    std::printf("recommended reserve (90%% upper bound): %.2f%%\n",
                100.0 * predictor::predict_quantile(p, 0.90));
    return 0;
}

int cmd_powertable(const std::string& config_path, const std::string& out_path) {
    const config::ProjectConfig cfg = resolve_config(config_path);
    const double density = units::isa_density(cfg.aircraft.cruise_altitude);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write " + out_path);
        out = &file;
    }
    *out << "speed_kt,p_induced_kW,p_profile_kW,p_parasite_kW,p_hotel_kW,p_total_kW\n";
    const double lo = cfg.aircraft.speed_min / units::kKnotToMps;
    const double hi = cfg.aircraft.speed_max / units::kKnotToMps;
    char buf[160];
    for (double kt = lo; kt <= hi + 1e-9; kt += 1.0) {
        const double v = kt * units::kKnotToMps;
        const auto p = powerplant::total_power(cfg.aircraft, v, density);
        std::snprintf(buf, sizeof(buf), "%.1f,%.6g,%.6g,%.6g,%.6g,%.6g\n", kt,
                      p.induced / 1000.0, p.profile / 1000.0, p.parasite / 1000.0,
                      p.hotel / 1000.0, p.electrical_total / 1000.0);
        *out << buf;
        if (p.shaft_limit_exceeded)
            std::cerr << "warning: shaft power limit exceeded at " << kt << " kt\n";
    }
    const double vbr = powerplant::best_range_speed(cfg.aircraft, density);
    std::cerr << "best-range speed: " << vbr / units::kKnotToMps << " kt\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eVTOL sector-transit energy overhead simulator and predictor"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "run sector-transit batches");
    simulate->add_option("--config", sim.config_path, "configuration file");
    simulate->add_option("--out", sim.out_dir, "output directory");
    simulate->add_option("--densities", sim.densities, "traffic counts to sweep")
        ->delimiter(',');
    simulate->add_option("--runs", sim.runs, "runs per density");
    simulate->add_option("--seed", sim.seed, "base seed");
    simulate->add_flag("--paper-scale", sim.paper_scale,
                       "full sweep: densities 10..60 step 5, 200 runs");
    simulate->add_option("--threads", sim.threads, "worker cap (default: env/hardware)");

    std::string rep_dataset, rep_out = "out";
    auto* rep = app.add_subcommand("report", "summary tables from a dataset");
    rep->add_option("--dataset", rep_dataset, "dataset CSV")->required();
    rep->add_option("--out", rep_out, "output directory");

    TrainOptions tr;
    auto* train = app.add_subcommand("train", "fit the overhead predictor");
    train->add_option("--config", tr.config_path, "configuration file");
    train->add_option("--dataset", tr.dataset_path, "dataset CSV")->required();
    train->add_option("--out", tr.out_path, "checkpoint path");
    train->add_option("--epochs", tr.epochs, "override epoch budget");
    train->add_option("--seed", tr.seed, "training seed");
    train->add_flag("--paper-scale", tr.paper_scale, "use the 10,000-epoch budget");

    std::string ev_ckpt, ev_dataset, ev_out = "out";
    auto* ev = app.add_subcommand("evaluate", "validation metrics for a checkpoint");
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint path")->required();
    ev->add_option("--dataset", ev_dataset, "dataset CSV")->required();
    ev->add_option("--out", ev_out, "output directory");

    PredictOptions pr;
    auto* pred = app.add_subcommand("predict", "reserve guidance for one feature row");
    pred->add_option("--checkpoint", pr.ckpt_path, "checkpoint path")->required();
    pred->add_option("--features", pr.features_csv, "13 comma-separated raw features");
    pred->add_option("--dataset", pr.dataset_path, "dataset CSV to pull a row from");
    pred->add_option("--row", pr.row, "row index into --dataset");

    std::string pt_config, pt_out;
    auto* pt = app.add_subcommand("powertable", "power-vs-speed table (CSV)");
    pt->add_option("--config", pt_config, "configuration file");
    pt->add_option("--out", pt_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*rep) return cmd_report(rep_dataset, rep_out);
        if (*train) return cmd_train(tr);
        if (*ev) return cmd_evaluate(ev_ckpt, ev_dataset, ev_out);
        if (*pred) return cmd_predict(pr);
        if (*pt) return cmd_powertable(pt_config, pt_out);
    } catch (const config::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
