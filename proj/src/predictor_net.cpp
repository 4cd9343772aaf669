#include <cmath>
#include <stdexcept>

#include "skyreserve/predictor.hpp"

// Activations are held feature-major ([feature x batch], contiguous over the
// batch) so the dense kernels stream each weight matrix once per batch
// instead of once per sample. All reductions run in a fixed order; results
// are bit-reproducible for any batch size.

namespace skyreserve::predictor {

namespace {

constexpr double kLnEps = 1e-5;  // layer-norm variance epsilon
constexpr int kStrip = 32;       // batch strip kept L1-resident in the kernels

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

// Yt[out x B] = W[out x in] * Xt[in x B] + bias  (accumulates when add_to)
void matmul_t(const double* w, const double* bias, const double* xt, double* yt,
              int in, int out, int batch, bool add_to) {
    for (int b0 = 0; b0 < batch; b0 += kStrip) {
        const int width = std::min(kStrip, batch - b0);
        for (int r = 0; r < out; ++r) {
            double acc[kStrip];
            double* y = yt + static_cast<std::size_t>(r) * batch + b0;
            if (add_to) {
                for (int k = 0; k < width; ++k) acc[k] = y[k];
            } else {
                const double b = bias ? bias[r] : 0.0;
                for (int k = 0; k < width; ++k) acc[k] = b;
            }
            const double* wr = w + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) {
                const double wv = wr[c];
                const double* xc = xt + static_cast<std::size_t>(c) * batch + b0;
                for (int k = 0; k < width; ++k) acc[k] += wv * xc[k];
            }
            for (int k = 0; k < width; ++k) y[k] = acc[k];
        }
    }
}

// G[out x in] += dYt[out x B] * Xt[in x B]^T, eight output rows per pass so
// each Xt row is loaded once per row group
void weight_grad_acc(const double* dyt, const double* xt, double* g, int out, int in,
                     int batch) {
    constexpr int kRows = 8;
    int r = 0;
    for (; r + kRows <= out; r += kRows) {
        const double* drow[kRows];
        for (int k = 0; k < kRows; ++k)
            drow[k] = dyt + static_cast<std::size_t>(r + k) * batch;
        for (int c = 0; c < in; ++c) {
            const double* xc = xt + static_cast<std::size_t>(c) * batch;
            double s[kRows] = {};
            for (int b = 0; b < batch; ++b) {
                const double xv = xc[b];
                for (int k = 0; k < kRows; ++k) s[k] += drow[k][b] * xv;
            }
            for (int k = 0; k < kRows; ++k)
                g[static_cast<std::size_t>(r + k) * in + c] += s[k];
        }
    }
    for (; r < out; ++r) {
        const double* dr = dyt + static_cast<std::size_t>(r) * batch;
        for (int c = 0; c < in; ++c) {
            const double* xc = xt + static_cast<std::size_t>(c) * batch;
            double s = 0.0;
            for (int b = 0; b < batch; ++b) s += dr[b] * xc[b];
            g[static_cast<std::size_t>(r) * in + c] += s;
        }
    }
}

void transpose(const double* src, double* dst, int rows, int cols) {
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            dst[static_cast<std::size_t>(c) * rows + r] =
                src[static_cast<std::size_t>(r) * cols + c];
}

double row_sum(const double* row, int batch) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int b = 0;
    for (; b + 4 <= batch; b += 4) {
        s0 += row[b];
        s1 += row[b + 1];
        s2 += row[b + 2];
        s3 += row[b + 3];
    }
    double tail = 0.0;
    for (; b < batch; ++b) tail += row[b];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

double row_sum_weighted(const double* row, const double* weight, int batch) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int b = 0;
    for (; b + 4 <= batch; b += 4) {
        s0 += row[b] * weight[b];
        s1 += row[b + 1] * weight[b + 1];
        s2 += row[b + 2] * weight[b + 2];
        s3 += row[b + 3] * weight[b + 3];
    }
    double tail = 0.0;
    for (; b < batch; ++b) tail += row[b] * weight[b];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

}  // namespace

void NetConfig::validate() const {
    if (input_dim < 1 || hidden_dim < 1 || n_blocks < 1 || ffn_inner_dim < 1)
        throw std::domain_error("network dimensions must be positive");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw std::domain_error("dropout rate must be in [0, 1)");
    if (!(logvar_min < logvar_max))
        throw std::domain_error("log-variance clamp range is empty");
}

NetParams NetParams::zeros(const NetConfig& cfg) {
    NetParams p;
    p.embed_w = Tensor::zeros(cfg.hidden_dim, cfg.input_dim);
    p.embed_b = Tensor::zeros(cfg.hidden_dim, 1);
    p.blocks.resize(static_cast<std::size_t>(cfg.n_blocks));
    for (auto& b : p.blocks) {
        b.w1 = Tensor::zeros(cfg.ffn_inner_dim, cfg.hidden_dim);
        b.b1 = Tensor::zeros(cfg.ffn_inner_dim, 1);
        b.w2 = Tensor::zeros(cfg.hidden_dim, cfg.ffn_inner_dim);
        b.b2 = Tensor::zeros(cfg.hidden_dim, 1);
        b.ln_gain = Tensor::zeros(cfg.hidden_dim, 1);
        b.ln_shift = Tensor::zeros(cfg.hidden_dim, 1);
    }
    p.head_mu_w = Tensor::zeros(cfg.hidden_dim, 1);
    p.head_mu_b = Tensor::zeros(1, 1);
    p.head_lv_w = Tensor::zeros(cfg.hidden_dim, 1);
    p.head_lv_b = Tensor::zeros(1, 1);
    return p;
}

namespace {

void xavier_fill(Tensor& t, int fan_in, int fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t.v) v = rng.uniform(-bound, bound);
}

}  // namespace

NetParams NetParams::init(const NetConfig& cfg, Rng& rng) {
    NetParams p = zeros(cfg);
    xavier_fill(p.embed_w, cfg.input_dim, cfg.hidden_dim, rng);
    for (auto& b : p.blocks) {
        xavier_fill(b.w1, cfg.hidden_dim, cfg.ffn_inner_dim, rng);
        xavier_fill(b.w2, cfg.ffn_inner_dim, cfg.hidden_dim, rng);
        for (auto& g : b.ln_gain.v) g = 1.0;
    }
    xavier_fill(p.head_mu_w, cfg.hidden_dim, 1, rng);
    // start with sigma_z^2 ~ exp(-2), away from both clamp edges
    p.head_lv_b.v[0] = -2.0;
    return p;
}

void forward_batch(const NetParams& params, const NetConfig& cfg, const double* X,
                   int batch, bool training, Rng* rng, Workspace& ws) {
    const int d0 = cfg.input_dim;
    const int d = cfg.hidden_dim;
    const int inner = cfg.ffn_inner_dim;
    const std::size_t bd = static_cast<std::size_t>(batch) * d;
    const std::size_t bi = static_cast<std::size_t>(batch) * inner;

    ws.batch = batch;
    ws.x.resize(static_cast<std::size_t>(batch) * d0);
    transpose(X, ws.x.data(), batch, d0);  // ws.x holds Xt [d0 x B]
    ws.emb_pre.resize(bd);
    ws.emb_mask.assign(bd, 1.0);
    ws.h0.resize(bd);
    ws.blocks.resize(static_cast<std::size_t>(cfg.n_blocks));
    for (auto& blk : ws.blocks) {
        blk.h_in.resize(bd);
        blk.u.resize(bi);
        blk.a.resize(bi);
        blk.mask.assign(bd, 1.0);
        blk.s.resize(bd);
        blk.mean.assign(static_cast<std::size_t>(batch), 0.0);
        blk.inv_sd.resize(static_cast<std::size_t>(batch));
        blk.h_out.resize(bd);
    }
    ws.h_last.resize(bd);
    ws.mu.assign(static_cast<std::size_t>(batch), 0.0);
    ws.lv_pre.assign(static_cast<std::size_t>(batch), 0.0);
    ws.lv.resize(static_cast<std::size_t>(batch));

    const bool use_dropout = training && cfg.dropout_rate > 0.0;
    if (use_dropout && rng == nullptr)
        throw std::domain_error("training-mode forward needs an rng for dropout");
    const double keep = 1.0 - cfg.dropout_rate;
    const double scale = 1.0 / keep;
    if (use_dropout) {
        // masks are drawn sample-by-sample so the stream is independent of
        // the storage layout
        for (int b = 0; b < batch; ++b)
            for (int i = 0; i < d; ++i)
                ws.emb_mask[static_cast<std::size_t>(i) * batch + b] =
                    rng->uniform() < keep ? scale : 0.0;
        for (auto& blk : ws.blocks)
            for (int b = 0; b < batch; ++b)
                for (int i = 0; i < d; ++i)
                    blk.mask[static_cast<std::size_t>(i) * batch + b] =
                        rng->uniform() < keep ? scale : 0.0;
    }

    // embedding
    matmul_t(params.embed_w.v.data(), params.embed_b.v.data(), ws.x.data(),
             ws.emb_pre.data(), d0, d, batch, false);
    for (std::size_t i = 0; i < bd; ++i)
        ws.h0[i] = silu(ws.emb_pre[i]) * ws.emb_mask[i];

    const double* h = ws.h0.data();
    for (int l = 0; l < cfg.n_blocks; ++l) {
        auto& blk = ws.blocks[static_cast<std::size_t>(l)];
        const auto& bp = params.blocks[static_cast<std::size_t>(l)];
        std::copy(h, h + bd, blk.h_in.begin());
        matmul_t(bp.w1.v.data(), bp.b1.v.data(), blk.h_in.data(), blk.u.data(), d, inner,
                 batch, false);
        for (std::size_t i = 0; i < bi; ++i) blk.a[i] = silu(blk.u[i]);
        matmul_t(bp.w2.v.data(), bp.b2.v.data(), blk.a.data(), blk.s.data(), inner, d,
                 batch, false);
        // residual add through the dropout mask
        for (std::size_t i = 0; i < bd; ++i)
            blk.s[i] = blk.h_in[i] + blk.s[i] * blk.mask[i];
        // post-normalization over the feature axis, per sample
        for (int i = 0; i < d; ++i) {
            const double* row = &blk.s[static_cast<std::size_t>(i) * batch];
            for (int b = 0; b < batch; ++b) blk.mean[static_cast<std::size_t>(b)] += row[b];
        }
        for (int b = 0; b < batch; ++b) blk.mean[static_cast<std::size_t>(b)] /= d;
        std::vector<double> var(static_cast<std::size_t>(batch), 0.0);
        for (int i = 0; i < d; ++i) {
            const double* row = &blk.s[static_cast<std::size_t>(i) * batch];
            for (int b = 0; b < batch; ++b) {
                const double dv = row[b] - blk.mean[static_cast<std::size_t>(b)];
                var[static_cast<std::size_t>(b)] += dv * dv;
            }
        }
        for (int b = 0; b < batch; ++b)
            blk.inv_sd[static_cast<std::size_t>(b)] =
                1.0 / std::sqrt(var[static_cast<std::size_t>(b)] / d + kLnEps);
        for (int i = 0; i < d; ++i) {
            const double gain = bp.ln_gain.v[static_cast<std::size_t>(i)];
            const double shift = bp.ln_shift.v[static_cast<std::size_t>(i)];
            const double* srow = &blk.s[static_cast<std::size_t>(i) * batch];
            double* orow = &blk.h_out[static_cast<std::size_t>(i) * batch];
            for (int b = 0; b < batch; ++b)
                orow[b] = gain * (srow[b] - blk.mean[static_cast<std::size_t>(b)]) *
                              blk.inv_sd[static_cast<std::size_t>(b)] +
                          shift;
        }
        h = blk.h_out.data();
    }
    std::copy(h, h + bd, ws.h_last.begin());

    // output heads
    for (int i = 0; i < d; ++i) {
        const double wm = params.head_mu_w.v[static_cast<std::size_t>(i)];
        const double wl = params.head_lv_w.v[static_cast<std::size_t>(i)];
        const double* row = &ws.h_last[static_cast<std::size_t>(i) * batch];
        for (int b = 0; b < batch; ++b) {
            ws.mu[static_cast<std::size_t>(b)] += wm * row[b];
            ws.lv_pre[static_cast<std::size_t>(b)] += wl * row[b];
        }
    }
    for (int b = 0; b < batch; ++b) {
        ws.mu[static_cast<std::size_t>(b)] += params.head_mu_b.v[0];
        const double pre = ws.lv_pre[static_cast<std::size_t>(b)] + params.head_lv_b.v[0];
        ws.lv_pre[static_cast<std::size_t>(b)] = pre;
        ws.lv[static_cast<std::size_t>(b)] =
            std::min(std::max(pre, cfg.logvar_min), cfg.logvar_max);
    }
}

GaussianPrediction forward(const NetParams& params, const NetConfig& cfg,
                           std::span<const double> x, bool training, Rng* rng) {
    if (static_cast<int>(x.size()) != cfg.input_dim)
        throw std::domain_error("feature vector dimension mismatch");
    Workspace ws;
    forward_batch(params, cfg, x.data(), 1, training, rng, ws);
    return {ws.mu[0], std::exp(ws.lv[0])};
}

double nll_loss(std::span<const double> mu, std::span<const double> lv,
                std::span<const double> z) {
    if (mu.empty() || mu.size() != lv.size() || mu.size() != z.size())
        throw std::domain_error("nll_loss needs matching nonempty batches");
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double resid = z[i] - mu[i];
        total += 0.5 * (lv[i] + resid * resid * std::exp(-lv[i]));
    }
    return total / static_cast<double>(mu.size());
}

NetParams backward(const NetParams& params, const NetConfig& cfg, const Workspace& ws,
                   std::span<const double> z) {
    const int batch = ws.batch;
    if (static_cast<int>(z.size()) != batch)
        throw std::domain_error("target batch size mismatch");
    const int d = cfg.hidden_dim;
    const int inner = cfg.ffn_inner_dim;
    const std::size_t bd = static_cast<std::size_t>(batch) * d;
    const std::size_t bi = static_cast<std::size_t>(batch) * inner;
    NetParams g = NetParams::zeros(cfg);

    // head gradients
    std::vector<double> dmu(static_cast<std::size_t>(batch));
    std::vector<double> dlv(static_cast<std::size_t>(batch));
    const double inv_batch = 1.0 / batch;
    for (int b = 0; b < batch; ++b) {
        const std::size_t ib = static_cast<std::size_t>(b);
        const double lv = ws.lv[ib];
        const double resid = z[ib] - ws.mu[ib];
        const double inv_var = std::exp(-lv);
        dmu[ib] = -resid * inv_var * inv_batch;
        const bool clamped = ws.lv_pre[ib] < cfg.logvar_min || ws.lv_pre[ib] > cfg.logvar_max;
        dlv[ib] = clamped ? 0.0 : 0.5 * (1.0 - resid * resid * inv_var) * inv_batch;
    }
    std::vector<double> dh(bd);
    for (int i = 0; i < d; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        const double* hrow = &ws.h_last[ii * batch];
        g.head_mu_w.v[ii] = row_sum_weighted(hrow, dmu.data(), batch);
        g.head_lv_w.v[ii] = row_sum_weighted(hrow, dlv.data(), batch);
        const double wm = params.head_mu_w.v[ii];
        const double wl = params.head_lv_w.v[ii];
        double* drow = &dh[ii * batch];
        for (int b = 0; b < batch; ++b) drow[b] = wm * dmu[static_cast<std::size_t>(b)] +
                                                  wl * dlv[static_cast<std::size_t>(b)];
    }
    g.head_mu_b.v[0] = row_sum(dmu.data(), batch);
    g.head_lv_b.v[0] = row_sum(dlv.data(), batch);

    std::vector<double> ds(bd), dr(bd), da(bi), du(bi), wt;
    std::vector<double> mean_dyn(static_cast<std::size_t>(batch));
    std::vector<double> mean_dyn_n(static_cast<std::size_t>(batch));
    for (int l = cfg.n_blocks - 1; l >= 0; --l) {
        const auto& blk = ws.blocks[static_cast<std::size_t>(l)];
        const auto& bp = params.blocks[static_cast<std::size_t>(l)];
        auto& bg = g.blocks[static_cast<std::size_t>(l)];

        // layer-norm backward (per-sample statistics over the feature axis)
        std::fill(mean_dyn.begin(), mean_dyn.end(), 0.0);
        std::fill(mean_dyn_n.begin(), mean_dyn_n.end(), 0.0);
        for (int i = 0; i < d; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            const double gain = bp.ln_gain.v[ii];
            const double* dyrow = &dh[ii * batch];
            const double* srow = &blk.s[ii * batch];
            double gsum = 0.0, bsum = 0.0;
            for (int b = 0; b < batch; ++b) {
                const std::size_t ib = static_cast<std::size_t>(b);
                const double nrm = (srow[b] - blk.mean[ib]) * blk.inv_sd[ib];
                const double dyn = dyrow[b] * gain;
                gsum += dyrow[b] * nrm;
                bsum += dyrow[b];
                mean_dyn[ib] += dyn;
                mean_dyn_n[ib] += dyn * nrm;
            }
            bg.ln_gain.v[ii] = gsum;
            bg.ln_shift.v[ii] = bsum;
        }
        for (int b = 0; b < batch; ++b) {
            mean_dyn[static_cast<std::size_t>(b)] /= d;
            mean_dyn_n[static_cast<std::size_t>(b)] /= d;
        }
        for (int i = 0; i < d; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            const double gain = bp.ln_gain.v[ii];
            const double* dyrow = &dh[ii * batch];
            const double* srow = &blk.s[ii * batch];
            double* dsrow = &ds[ii * batch];
            for (int b = 0; b < batch; ++b) {
                const std::size_t ib = static_cast<std::size_t>(b);
                const double nrm = (srow[b] - blk.mean[ib]) * blk.inv_sd[ib];
                dsrow[b] = blk.inv_sd[ib] * (dyrow[b] * gain - mean_dyn[ib] -
                                             nrm * mean_dyn_n[ib]);
            }
        }

        // residual: s = h_in + mask .* (w2 a + b2)
        for (std::size_t i = 0; i < bd; ++i) dr[i] = ds[i] * blk.mask[i];
        for (int i = 0; i < d; ++i)
            bg.b2.v[static_cast<std::size_t>(i)] =
                row_sum(&dr[static_cast<std::size_t>(i) * batch], batch);
        weight_grad_acc(dr.data(), blk.a.data(), bg.w2.v.data(), d, inner, batch);

        // da = w2^T dr
        wt.resize(static_cast<std::size_t>(inner) * d);
        transpose(bp.w2.v.data(), wt.data(), d, inner);
        matmul_t(wt.data(), nullptr, dr.data(), da.data(), d, inner, batch, false);
        for (std::size_t i = 0; i < bi; ++i) da[i] *= silu_grad(blk.u[i]);
        std::swap(da, du);

        for (int c = 0; c < inner; ++c)
            bg.b1.v[static_cast<std::size_t>(c)] =
                row_sum(&du[static_cast<std::size_t>(c) * batch], batch);
        weight_grad_acc(du.data(), blk.h_in.data(), bg.w1.v.data(), inner, d, batch);

        // dh_in = ds (residual path) + w1^T du
        std::copy(ds.begin(), ds.end(), dh.begin());
        wt.resize(static_cast<std::size_t>(d) * inner);
        transpose(bp.w1.v.data(), wt.data(), inner, d);
        matmul_t(wt.data(), nullptr, du.data(), dh.data(), inner, d, batch, true);
    }

    // embedding backward: h0 = mask .* silu(embed_w x + embed_b)
    std::vector<double> de(bd);
    for (std::size_t i = 0; i < bd; ++i)
        de[i] = dh[i] * ws.emb_mask[i] * silu_grad(ws.emb_pre[i]);
    for (int i = 0; i < d; ++i)
        g.embed_b.v[static_cast<std::size_t>(i)] =
            row_sum(&de[static_cast<std::size_t>(i) * batch], batch);
    weight_grad_acc(de.data(), ws.x.data(), g.embed_w.v.data(), d, cfg.input_dim, batch);
    return g;
}

}  // namespace skyreserve::predictor
