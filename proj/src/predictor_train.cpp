#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "skyreserve/predictor.hpp"

namespace skyreserve::predictor {

void TrainConfig::validate() const {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw std::domain_error("split fraction must be in (0, 1)");
    if (batch_size < 1 || epochs < 1)
        throw std::domain_error("batch size and epochs must be positive");
    if (!(learning_rate > 0.0)) throw std::domain_error("learning rate must be positive");
    if (weight_decay < 0.0) throw std::domain_error("weight decay must be non-negative");
    if (grad_clip_norm < 0.0) throw std::domain_error("gradient clip must be non-negative");
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double fraction, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed(seed, 0x5e17));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        std::swap(perm[i - 1], perm[j]);
    }
    const std::size_t n_train = static_cast<std::size_t>(fraction * static_cast<double>(n));
    std::vector<std::size_t> train(perm.begin(), perm.begin() + n_train);
    std::vector<std::size_t> val(perm.begin() + n_train, perm.end());
    return {train, val};
}

namespace {

struct AdamState {
    NetParams m;
    NetParams v;
    long step = 0;
};

double global_grad_norm(NetParams& grads) {
    double total = 0.0;
    grads.for_each_tensor([&](Tensor& t, bool) {
        for (double g : t.v) total += g * g;
    });
    return std::sqrt(total);
}

void adamw_update(NetParams& params, NetParams& grads, AdamState& state,
                  const TrainConfig& cfg) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    // walk the three trees in lockstep (identical fixed order)
    std::vector<std::pair<Tensor*, bool>> ps, gs, ms, vs;
    params.for_each_tensor([&](Tensor& t, bool w) { ps.emplace_back(&t, w); });
    grads.for_each_tensor([&](Tensor& t, bool w) { gs.emplace_back(&t, w); });
    state.m.for_each_tensor([&](Tensor& t, bool w) { ms.emplace_back(&t, w); });
    state.v.for_each_tensor([&](Tensor& t, bool w) { vs.emplace_back(&t, w); });

    for (std::size_t k = 0; k < ps.size(); ++k) {
        Tensor& p = *ps[k].first;
        const Tensor& g = *gs[k].first;
        Tensor& m = *ms[k].first;
        Tensor& v = *vs[k].first;
        const bool decay = ps[k].second;
        for (std::size_t i = 0; i < p.v.size(); ++i) {
            if (decay && cfg.weight_decay > 0.0)
                p.v[i] -= cfg.learning_rate * cfg.weight_decay * p.v[i];
            m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * g.v[i];
            v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * g.v[i] * g.v[i];
            const double mhat = m.v[i] / bc1;
            const double vhat = v.v[i] / bc2;
            p.v[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

double dataset_nll(const NetParams& params, const NetConfig& netcfg,
                   const std::vector<double>& X, const std::vector<double>& z,
                   const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw std::domain_error("empty evaluation split");
    const int d0 = netcfg.input_dim;
    constexpr std::size_t kChunk = 1024;
    Workspace ws;
    std::vector<double> xb, zb;
    double total = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += kChunk) {
        const std::size_t count = std::min(kChunk, idx.size() - start);
        xb.resize(count * static_cast<std::size_t>(d0));
        zb.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t r = idx[start + i];
            std::copy_n(&X[r * static_cast<std::size_t>(d0)], d0,
                        &xb[i * static_cast<std::size_t>(d0)]);
            zb[i] = z[r];
        }
        forward_batch(params, netcfg, xb.data(), static_cast<int>(count), false, nullptr, ws);
        total += nll_loss(ws.mu, ws.lv, zb) * static_cast<double>(count);
    }
    return total / static_cast<double>(idx.size());
}

}  // namespace

Checkpoint train(std::span<const features::TransitRecord> records, const NetConfig& netcfg,
                 const TrainConfig& traincfg) {
    netcfg.validate();
    traincfg.validate();
    const auto usable = features::complete_records(records);
    if (usable.size() < 1000)
        std::cerr << "warning: training on only " << usable.size()
                  << " records; expect noisy estimates\n";
    if (usable.size() < 10)
        throw std::domain_error("not enough records to train");

    auto [train_idx, val_idx] = split_indices(usable.size(), traincfg.split_fraction,
                                              traincfg.seed);
    if (train_idx.empty() || val_idx.empty())
        throw std::domain_error("split produced an empty partition");

    std::vector<features::TransitRecord> train_records;
    train_records.reserve(train_idx.size());
    for (std::size_t i : train_idx) train_records.push_back(usable[i]);
    const features::NormalizationStats norm = features::fit_normalization(train_records);

    const int d0 = netcfg.input_dim;
    if (d0 != features::kFeatureCount)
        throw std::domain_error("input dimension must match the feature count");
    std::vector<double> X(usable.size() * static_cast<std::size_t>(d0));
    std::vector<double> z(usable.size());
    for (std::size_t r = 0; r < usable.size(); ++r) {
        if (!(usable[r].delta_e > -1.0))
            throw std::domain_error("overhead label at or below -1");
        const auto nx = features::apply_normalization(norm, usable[r].features);
        std::copy(nx.begin(), nx.end(), &X[r * static_cast<std::size_t>(d0)]);
        z[r] = std::log1p(usable[r].delta_e);
    }

    Rng rng(derive_seed(traincfg.seed, 0x7a11));
    NetParams params = NetParams::init(netcfg, rng);
    AdamState adam{NetParams::zeros(netcfg), NetParams::zeros(netcfg), 0};

    Checkpoint ckpt;
    ckpt.net = netcfg;
    ckpt.train = traincfg;
    ckpt.norm = norm;
    ckpt.params = params;
    ckpt.best_epoch = 0;
    ckpt.best_val_nll = dataset_nll(params, netcfg, X, z, val_idx);
    ckpt.log.push_back({0, dataset_nll(params, netcfg, X, z, train_idx),
                        ckpt.best_val_nll});

    std::vector<std::size_t> order = train_idx;
    Workspace ws;
    std::vector<double> xb, zb;
    int since_best = 0;
    for (int epoch = 1; epoch <= traincfg.epochs; ++epoch) {
        // fresh shuffle each epoch
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.uniform_index(i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(traincfg.batch_size)) {
            const std::size_t count =
                std::min(static_cast<std::size_t>(traincfg.batch_size),
                         order.size() - start);
            xb.resize(count * static_cast<std::size_t>(d0));
            zb.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t r = order[start + i];
                std::copy_n(&X[r * static_cast<std::size_t>(d0)], d0,
                            &xb[i * static_cast<std::size_t>(d0)]);
                zb[i] = z[r];
            }
            forward_batch(params, netcfg, xb.data(), static_cast<int>(count), true, &rng, ws);
            const double loss = nll_loss(ws.mu, ws.lv, zb);
            if (!std::isfinite(loss))
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch) + ", batch offset " +
                                         std::to_string(start));
            epoch_loss += loss * static_cast<double>(count);
            seen += count;
            NetParams grads = backward(params, netcfg, ws, zb);
            if (traincfg.grad_clip_norm > 0.0) {
                const double norm2 = global_grad_norm(grads);
                if (norm2 > traincfg.grad_clip_norm) {
                    const double scale = traincfg.grad_clip_norm / norm2;
                    grads.for_each_tensor([&](Tensor& t, bool) {
                        for (double& gv : t.v) gv *= scale;
                    });
                }
            }
            adamw_update(params, grads, adam, traincfg);
        }
        const double train_nll = epoch_loss / static_cast<double>(seen);
        const double val_nll = dataset_nll(params, netcfg, X, z, val_idx);
        ckpt.log.push_back({epoch, train_nll, val_nll});
        if (epoch % 25 == 0)
            std::cerr << "epoch " << epoch << ": train NLL " << train_nll << ", val NLL "
                      << val_nll << "\n";
        if (val_nll < ckpt.best_val_nll) {
            ckpt.best_val_nll = val_nll;
            ckpt.best_epoch = epoch;
            ckpt.params = params;
            since_best = 0;
        } else {
            ++since_best;
            if (traincfg.patience > 0 && since_best >= traincfg.patience) break;
        }
    }
    return ckpt;
}

}  // namespace skyreserve::predictor
