#include <cmath>
#include <stdexcept>

#include "skyreserve/predictor.hpp"

namespace skyreserve::predictor {

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("quantile level must lie in (0, 1)");
    // Acklam's rational approximation with one Halley refinement step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (q < plow) {
        const double u = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((dd[0] * u + dd[1]) * u + dd[2]) * u + dd[3]) * u + 1.0);
    } else if (q > 1.0 - plow) {
        const double u = std::sqrt(-2.0 * std::log(1.0 - q));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((dd[0] * u + dd[1]) * u + dd[2]) * u + dd[3]) * u + 1.0);
    } else {
        const double u = q - 0.5;
        const double t = u * u;
        x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
            (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
    }
    // Halley refinement against the exact CDF keeps |error| < 1e-12.
    const double e = 0.5 * std::erfc(-x / 1.4142135623730951) - q;
    const double pdf = 0.3989422804014327 * std::exp(-0.5 * x * x);
    const double u2 = e / pdf;
    x -= u2 / (1.0 + 0.5 * x * u2);
    return x;
}

double predict_mean(const GaussianPrediction& p) {
    return std::expm1(p.mu_z + 0.5 * p.sigma_z2);
}

double predict_quantile(const GaussianPrediction& p, double q) {
    return std::expm1(p.mu_z + std::sqrt(p.sigma_z2) * normal_quantile(q));
}

Metrics evaluate_records(const Checkpoint& ckpt,
                         std::span<const features::TransitRecord> validation,
                         std::vector<PredictionRow>* rows) {
    if (validation.empty()) throw std::domain_error("validation set is empty");
    Metrics m;
    m.count = validation.size();
    const double n = static_cast<double>(validation.size());

    double obs_mean = 0.0;
    for (const auto& r : validation) obs_mean += r.delta_e;
    obs_mean /= n;

    double sse = 0.0, sst = 0.0;
    double sum_pred = 0.0, sum_obs = 0.0, sum_pp = 0.0, sum_oo = 0.0, sum_po = 0.0;
    double abs_err = 0.0, sq_err = 0.0;
    double cover80 = 0.0, cover90 = 0.0, w80 = 0.0, w90 = 0.0;
    double zr_sum = 0.0, zr_sq = 0.0, nll = 0.0;
    if (rows) rows->clear();

    for (const auto& r : validation) {
        const auto x = features::apply_normalization(ckpt.norm, r.features);
        const GaussianPrediction p =
            forward(ckpt.params, ckpt.net, std::span<const double>(x.data(), x.size()));
        const double mean = predict_mean(p);
        PredictionRow row;
        row.delta_e_obs = r.delta_e;
        row.delta_e_mean = mean;
        row.q05 = predict_quantile(p, 0.05);
        row.q10 = predict_quantile(p, 0.10);
        row.q50 = predict_quantile(p, 0.50);
        row.q90 = predict_quantile(p, 0.90);
        row.q95 = predict_quantile(p, 0.95);
        if (rows) rows->push_back(row);

        const double err = mean - r.delta_e;
        abs_err += std::abs(err);
        sq_err += err * err;
        sse += err * err;
        sst += (r.delta_e - obs_mean) * (r.delta_e - obs_mean);
        sum_pred += mean;
        sum_obs += r.delta_e;
        sum_pp += mean * mean;
        sum_oo += r.delta_e * r.delta_e;
        sum_po += mean * r.delta_e;

        if (r.delta_e >= row.q10 && r.delta_e <= row.q90) cover80 += 1.0;
        if (r.delta_e >= row.q05 && r.delta_e <= row.q95) cover90 += 1.0;
        w80 += row.q90 - row.q10;
        w90 += row.q95 - row.q05;

        const double z_obs = std::log1p(r.delta_e);
        const double sigma = std::sqrt(p.sigma_z2);
        const double zr = (z_obs - p.mu_z) / sigma;
        zr_sum += zr;
        zr_sq += zr * zr;
        nll += 0.5 * (std::log(p.sigma_z2) + zr * zr);
    }

    m.mae = abs_err / n;
    m.rmse = std::sqrt(sq_err / n);
    m.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
    const double cov = n * sum_po - sum_pred * sum_obs;
    const double var_p = n * sum_pp - sum_pred * sum_pred;
    const double var_o = n * sum_oo - sum_obs * sum_obs;
    m.pearson = (var_p > 0.0 && var_o > 0.0) ? cov / std::sqrt(var_p * var_o) : 0.0;
    m.coverage80 = cover80 / n;
    m.coverage90 = cover90 / n;
    m.width80 = w80 / n;
    m.width90 = w90 / n;
    m.z_resid_mean = zr_sum / n;
    const double zvar = n > 1.0 ? (zr_sq - zr_sum * zr_sum / n) / (n - 1.0) : 0.0;
    m.z_resid_std = std::sqrt(std::max(zvar, 0.0));
    m.nll = nll / n;
    return m;
}

Metrics evaluate(const Checkpoint& ckpt, std::span<const features::TransitRecord> records,
                 std::vector<PredictionRow>* rows) {
    const auto usable = features::complete_records(records);
    auto [train_idx, val_idx] =
        split_indices(usable.size(), ckpt.train.split_fraction, ckpt.train.seed);
    (void)train_idx;
    std::vector<features::TransitRecord> validation;
    validation.reserve(val_idx.size());
    for (std::size_t i : val_idx) validation.push_back(usable[i]);
    return evaluate_records(ckpt, validation, rows);
}

}  // namespace skyreserve::predictor
