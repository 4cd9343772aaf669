#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skyreserve/features_data.hpp"
#include "skyreserve/rng.hpp"

namespace skyreserve::predictor {

struct NetConfig {
    int input_dim = features::kFeatureCount;
    int hidden_dim = 128;
    int n_blocks = 4;
    int ffn_inner_dim = 256;  // two-layer block, inner width 2*d
    double dropout_rate = 0.05;
    double logvar_min = -8.0;
    double logvar_max = 3.0;

    void validate() const;
};

/// Dense row-major matrix; vectors use cols == 1.
struct Tensor {
    std::vector<double> v;
    int rows = 0;
    int cols = 0;

    static Tensor zeros(int r, int c) {
        Tensor t;
        t.rows = r;
        t.cols = c;
        t.v.assign(static_cast<std::size_t>(r) * c, 0.0);
        return t;
    }
    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return v.size(); }
};

struct BlockParams {
    Tensor w1, b1;          // inner x d, inner
    Tensor w2, b2;          // d x inner, d
    Tensor ln_gain, ln_shift;  // d, d
};

struct NetParams {
    Tensor embed_w, embed_b;    // d x d0, d
    std::vector<BlockParams> blocks;
    Tensor head_mu_w;           // d x 1
    Tensor head_mu_b;           // 1 x 1
    Tensor head_lv_w;           // d x 1
    Tensor head_lv_b;           // 1 x 1

    static NetParams zeros(const NetConfig& cfg);
    /// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases, unit
    /// layer-norm gains; the log-variance head starts at w=0, b=-2.
    static NetParams init(const NetConfig& cfg, Rng& rng);

    /// Visit every tensor in a fixed order; the callback receives
    /// (tensor, decay_eligible). Weight decay skips biases and layer norms.
    template <typename F>
    void for_each_tensor(F&& f) {
        f(embed_w, true);
        f(embed_b, false);
        for (auto& b : blocks) {
            f(b.w1, true);
            f(b.b1, false);
            f(b.w2, true);
            f(b.b2, false);
            f(b.ln_gain, false);
            f(b.ln_shift, false);
        }
        f(head_mu_w, true);
        f(head_mu_b, false);
        f(head_lv_w, true);
        f(head_lv_b, false);
    }
};

struct GaussianPrediction {
    double mu_z = 0.0;
    double sigma_z2 = 1.0;
};

/// Per-batch activations and dropout masks kept for the backward pass.
struct Workspace {
    int batch = 0;
    std::vector<double> x;        // B x d0
    std::vector<double> emb_pre;  // B x d, pre-activation
    std::vector<double> emb_mask; // B x d, dropout multipliers (1 when inference)
    std::vector<double> h0;       // B x d
    struct BlockWs {
        std::vector<double> h_in;   // B x d
        std::vector<double> u;      // B x inner, pre-activation
        std::vector<double> a;      // B x inner
        std::vector<double> mask;   // B x d
        std::vector<double> s;      // B x d, residual sum
        std::vector<double> mean;   // B
        std::vector<double> inv_sd; // B, 1/sqrt(var + eps)
        std::vector<double> h_out;  // B x d
    };
    std::vector<BlockWs> blocks;
    std::vector<double> h_last;   // B x d
    std::vector<double> mu;       // B
    std::vector<double> lv_pre;   // B
    std::vector<double> lv;       // B
};

/// Batched forward pass. X is row-major B x input_dim of normalized
/// features. Dropout is sampled from rng only in training mode.
void forward_batch(const NetParams& params, const NetConfig& cfg, const double* X,
                   int batch, bool training, Rng* rng, Workspace& ws);

/// Single-sample convenience wrapper (deterministic when not training).
GaussianPrediction forward(const NetParams& params, const NetConfig& cfg,
                           std::span<const double> x, bool training = false,
                           Rng* rng = nullptr);

/// Mean over the batch of 0.5*(log sigma^2 + (z - mu)^2 / sigma^2).
double nll_loss(std::span<const double> mu, std::span<const double> lv,
                std::span<const double> z);

/// Exact gradients of the mean batch NLL with respect to every parameter,
/// reusing the activations and dropout masks recorded in the workspace.
NetParams backward(const NetParams& params, const NetConfig& cfg, const Workspace& ws,
                   std::span<const double> z);

struct TrainConfig {
    double learning_rate = 3e-4;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 256;
    double grad_clip_norm = 1.0;
    int epochs = 300;
    int patience = 50;  // early stop on validation NLL; <= 0 disables
    double split_fraction = 0.8;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double train_nll = 0.0;
    double val_nll = 0.0;
};

struct Checkpoint {
    std::uint32_t version = 1;
    NetConfig net;
    TrainConfig train;
    features::NormalizationStats norm;
    NetParams params;  // parameters at the best validation NLL
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_nll = 0.0;
};

/// Deterministic shuffled split: first floor(fraction*n) of a seeded
/// permutation train, remainder validation.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double fraction, std::uint64_t seed);

/// Full training loop: filters incomplete transits, fits normalization on
/// the training split, optimizes with AdamW (decoupled decay on weights
/// only, global-norm gradient clipping), logs per-epoch NLL and keeps the
/// checkpoint minimizing validation NLL. Fully deterministic given the seed.
Checkpoint train(std::span<const features::TransitRecord> records, const NetConfig& netcfg,
                 const TrainConfig& traincfg);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Standard normal quantile (rational approximation, |error| < 1e-8 on
/// (1e-6, 1-1e-6)). Throws std::domain_error outside (0, 1).
double normal_quantile(double q);

/// Expected overhead under the shifted log-normal: exp(mu + sigma^2/2) - 1.
double predict_mean(const GaussianPrediction& p);

/// Overhead quantile: exp(mu + sigma * Phi^-1(q)) - 1.
double predict_quantile(const GaussianPrediction& p, double q);

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    double pearson = 0.0;
    double coverage80 = 0.0;
    double coverage90 = 0.0;
    double width80 = 0.0;
    double width90 = 0.0;
    double z_resid_mean = 0.0;
    double z_resid_std = 0.0;
    double nll = 0.0;
    std::size_t count = 0;
};

struct PredictionRow {
    double delta_e_obs = 0.0;
    double delta_e_mean = 0.0;
    double q05 = 0.0, q10 = 0.0, q50 = 0.0, q90 = 0.0, q95 = 0.0;
};

/// Point and calibration metrics over the validation split re-derived from
/// the checkpoint's seed and split fraction. Optionally emits per-sample
/// prediction rows.
Metrics evaluate(const Checkpoint& ckpt, std::span<const features::TransitRecord> records,
                 std::vector<PredictionRow>* rows = nullptr);

/// Metrics over an explicit record list (already filtered/split by caller).
Metrics evaluate_records(const Checkpoint& ckpt,
                         std::span<const features::TransitRecord> validation,
                         std::vector<PredictionRow>* rows = nullptr);

}  // namespace skyreserve::predictor
