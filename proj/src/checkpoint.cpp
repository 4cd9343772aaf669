#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "skyreserve/predictor.hpp"

// Checkpoint container: 8-byte magic, little-endian u32 version, u64 JSON
// header length, the JSON header (network/train configs, normalization
// stats, training log, tensor manifest), then raw little-endian f64 tensor
// data in manifest order.

namespace skyreserve::predictor {

namespace {

constexpr char kMagic[8] = {'S', 'K', 'R', 'S', 'C', 'K', 'P', 'T'};

static_assert(sizeof(double) == 8, "checkpoint format assumes 8-byte doubles");

using ordered_json = nlohmann::ordered_json;

std::vector<std::pair<std::string, const Tensor*>> tensor_manifest(const NetParams& p) {
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.emplace_back("embed_w", &p.embed_w);
    out.emplace_back("embed_b", &p.embed_b);
    for (std::size_t l = 0; l < p.blocks.size(); ++l) {
        const std::string prefix = "block" + std::to_string(l) + ".";
        out.emplace_back(prefix + "w1", &p.blocks[l].w1);
        out.emplace_back(prefix + "b1", &p.blocks[l].b1);
        out.emplace_back(prefix + "w2", &p.blocks[l].w2);
        out.emplace_back(prefix + "b2", &p.blocks[l].b2);
        out.emplace_back(prefix + "ln_gain", &p.blocks[l].ln_gain);
        out.emplace_back(prefix + "ln_shift", &p.blocks[l].ln_shift);
    }
    out.emplace_back("head_mu_w", &p.head_mu_w);
    out.emplace_back("head_mu_b", &p.head_mu_b);
    out.emplace_back("head_lv_w", &p.head_lv_w);
    out.emplace_back("head_lv_b", &p.head_lv_b);
    return out;
}

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    ordered_json header;
    header["version"] = ckpt.version;
    header["net"] = {
        {"input_dim", ckpt.net.input_dim},
        {"hidden_dim", ckpt.net.hidden_dim},
        {"n_blocks", ckpt.net.n_blocks},
        {"ffn_inner_dim", ckpt.net.ffn_inner_dim},
        {"dropout_rate", ckpt.net.dropout_rate},
        {"logvar_min", ckpt.net.logvar_min},
        {"logvar_max", ckpt.net.logvar_max},
    };
    header["train"] = {
        {"learning_rate", ckpt.train.learning_rate},
        {"weight_decay", ckpt.train.weight_decay},
        {"beta1", ckpt.train.beta1},
        {"beta2", ckpt.train.beta2},
        {"eps", ckpt.train.eps},
        {"batch_size", ckpt.train.batch_size},
        {"grad_clip_norm", ckpt.train.grad_clip_norm},
        {"epochs", ckpt.train.epochs},
        {"patience", ckpt.train.patience},
        {"split_fraction", ckpt.train.split_fraction},
        {"seed", ckpt.train.seed},
    };
    header["normalization"] = {
        {"mean", ckpt.norm.mean},
        {"stddev", ckpt.norm.stddev},
        {"active", ckpt.norm.active},
    };
    ordered_json log = ordered_json::array();
    for (const auto& e : ckpt.log)
        log.push_back({{"epoch", e.epoch},
                       {"train_nll", e.train_nll},
                       {"val_nll", e.val_nll}});
    header["log"] = std::move(log);
    header["best_epoch"] = ckpt.best_epoch;
    header["best_val_nll"] = ckpt.best_val_nll;

    ordered_json tensors = ordered_json::array();
    const auto manifest = tensor_manifest(ckpt.params);
    for (const auto& [name, t] : manifest)
        tensors.push_back({{"name", name}, {"rows", t->rows}, {"cols", t->cols}});
    header["tensors"] = std::move(tensors);

    const std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, ckpt.version);
    const std::uint64_t header_len = header_text.size();
    write_raw(out, header_len);
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& [name, t] : manifest) {
        (void)name;
        out.write(reinterpret_cast<const char*>(t->v.data()),
                  static_cast<std::streamsize>(t->v.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    Checkpoint ckpt;
    read_raw(in, ckpt.version);
    if (ckpt.version != 1)
        throw std::runtime_error("unsupported checkpoint version " +
                                 std::to_string(ckpt.version));
    std::uint64_t header_len = 0;
    read_raw(in, header_len);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
    const auto header = nlohmann::json::parse(header_text);

    const auto& net = header.at("net");
    ckpt.net.input_dim = net.at("input_dim").get<int>();
    ckpt.net.hidden_dim = net.at("hidden_dim").get<int>();
    ckpt.net.n_blocks = net.at("n_blocks").get<int>();
    ckpt.net.ffn_inner_dim = net.at("ffn_inner_dim").get<int>();
    ckpt.net.dropout_rate = net.at("dropout_rate").get<double>();
    ckpt.net.logvar_min = net.at("logvar_min").get<double>();
    ckpt.net.logvar_max = net.at("logvar_max").get<double>();

    const auto& tr = header.at("train");
    ckpt.train.learning_rate = tr.at("learning_rate").get<double>();
    ckpt.train.weight_decay = tr.at("weight_decay").get<double>();
    ckpt.train.beta1 = tr.at("beta1").get<double>();
    ckpt.train.beta2 = tr.at("beta2").get<double>();
    ckpt.train.eps = tr.at("eps").get<double>();
    ckpt.train.batch_size = tr.at("batch_size").get<int>();
    ckpt.train.grad_clip_norm = tr.at("grad_clip_norm").get<double>();
    ckpt.train.epochs = tr.at("epochs").get<int>();
    ckpt.train.patience = tr.at("patience").get<int>();
    ckpt.train.split_fraction = tr.at("split_fraction").get<double>();
    ckpt.train.seed = tr.at("seed").get<std::uint64_t>();

    const auto& nm = header.at("normalization");
    for (int i = 0; i < features::kFeatureCount; ++i) {
        ckpt.norm.mean[i] = nm.at("mean").at(i).get<double>();
        ckpt.norm.stddev[i] = nm.at("stddev").at(i).get<double>();
        ckpt.norm.active[i] = nm.at("active").at(i).get<bool>();
    }

    for (const auto& e : header.at("log"))
        ckpt.log.push_back({e.at("epoch").get<int>(), e.at("train_nll").get<double>(),
                            e.at("val_nll").get<double>()});
    ckpt.best_epoch = header.at("best_epoch").get<int>();
    ckpt.best_val_nll = header.at("best_val_nll").get<double>();

    ckpt.params = NetParams::zeros(ckpt.net);
    auto manifest = tensor_manifest(ckpt.params);
    const auto& tensors = header.at("tensors");
    if (tensors.size() != manifest.size())
        throw std::runtime_error("checkpoint tensor manifest mismatch");
    for (std::size_t k = 0; k < manifest.size(); ++k) {
        const auto& meta = tensors.at(k);
        Tensor* t = const_cast<Tensor*>(manifest[k].second);
        if (meta.at("name").get<std::string>() != manifest[k].first ||
            meta.at("rows").get<int>() != t->rows || meta.at("cols").get<int>() != t->cols)
            throw std::runtime_error("checkpoint tensor layout mismatch at " +
                                     manifest[k].first);
        in.read(reinterpret_cast<char*>(t->v.data()),
                static_cast<std::streamsize>(t->v.size() * sizeof(double)));
    }
    if (!in) throw std::runtime_error("truncated checkpoint tensors: " + path);
    return ckpt;
}

}  // namespace skyreserve::predictor
