#include "gpse/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace gpse {

using nlohmann::json;

namespace {

struct FamilySpec {
    const char* name;
    int offset;
    int dim;
    bool graph_level;
};

// Reporting order: node-level families first, then the graph-level blocks.
const FamilySpec kFamilies[] = {
    {"LapPE", kLapPeOffset, kLapPeDim, false},
    {"ElstaticPE", kElstaticOffset, kElstaticDim, false},
    {"RWSE", kRwseOffset, kRwseDim, false},
    {"HKdiagSE", kHkOffset, kHkDim, false},
    {"EigValSE", kEigValOffset, kEigValDim, true},
    {"CycleSE", kCycleOffset, kCycleDim, true},
};

const std::vector<GraphTaskBlock> kGraphBlocks{{kEigValOffset, kEigValDim},
                                               {kCycleOffset, kCycleDim}};

std::vector<double> uniform_fan_in(size_t count, int fan_in, uint64_t seed) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
    GaussianStream stream(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = (2.0 * stream.next_uniform() - 1.0) * bound;
    return out;
}

}  // namespace

std::string conv_kind_name(ConvKind k) {
    switch (k) {
        case ConvKind::GatedGcn: return "gatedgcn";
        case ConvKind::Gin: return "gin";
        case ConvKind::Gcn: return "gcn";
    }
    throw std::invalid_argument("conv_kind_name: unknown kind");
}

ConvKind conv_kind_from_name(const std::string& name) {
    if (name == "gatedgcn") return ConvKind::GatedGcn;
    if (name == "gin") return ConvKind::Gin;
    if (name == "gcn") return ConvKind::Gcn;
    throw std::invalid_argument("unknown conv kind '" + name + "' (gatedgcn|gin|gcn)");
}

void GPSEConfig::validate() const {
    if (rand_feat_dim < 1 || hidden_dim < 1) throw std::invalid_argument("config: dims must be >= 1");
    if (rand_feat_dim > hidden_dim)
        throw std::invalid_argument("config: rand_feat_dim k (" + std::to_string(rand_feat_dim) +
                                    ") must not exceed hidden_dim d (" + std::to_string(hidden_dim) +
                                    ")");
    if (num_layers < 1) throw std::invalid_argument("config: num_layers must be >= 1");
    if (head_depth < 1) throw std::invalid_argument("config: head_depth must be >= 1");
    if (epochs < 0 || batch_size < 1) throw std::invalid_argument("config: bad training settings");
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be positive");
    if (clip_norm < 0.0) throw std::invalid_argument("config: clip_norm must be >= 0");
}

static json config_to_json(const GPSEConfig& c) {
    return json{{"rand_feat_dim", c.rand_feat_dim},
                {"hidden_dim", c.hidden_dim},
                {"num_layers", c.num_layers},
                {"head_depth", c.head_depth},
                {"independent_heads", c.independent_heads},
                {"conv", conv_kind_name(c.conv)},
                {"virtual_node", c.virtual_node},
                {"lr", c.lr},
                {"warmup_frac", c.warmup_frac},
                {"clip_norm", c.clip_norm},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"seed", c.seed},
                {"resample_features_each_epoch", c.resample_features_each_epoch}};
}

static GPSEConfig config_from_json(const json& j) {
    static const char* kKnown[] = {"rand_feat_dim", "hidden_dim", "num_layers", "head_depth",
                                   "independent_heads", "conv", "virtual_node", "lr",
                                   "warmup_frac", "clip_norm", "epochs", "batch_size", "seed",
                                   "resample_features_each_epoch"};
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : kKnown) known |= key == k;
        if (!known) throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    GPSEConfig c;
    c.rand_feat_dim = j.value("rand_feat_dim", c.rand_feat_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.num_layers = j.value("num_layers", c.num_layers);
    c.head_depth = j.value("head_depth", c.head_depth);
    c.independent_heads = j.value("independent_heads", c.independent_heads);
    c.conv = conv_kind_from_name(j.value("conv", std::string("gatedgcn")));
    c.virtual_node = j.value("virtual_node", c.virtual_node);
    c.lr = j.value("lr", c.lr);
    c.warmup_frac = j.value("warmup_frac", c.warmup_frac);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.resample_features_each_epoch =
        j.value("resample_features_each_epoch", c.resample_features_each_epoch);
    c.validate();
    return c;
}

std::string GPSEConfig::to_json() const { return config_to_json(*this).dump(2); }

GPSEConfig GPSEConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    return config_from_json(j);
}

GPSEModel init_model(const GPSEConfig& cfg) {
    cfg.validate();
    GPSEModel m;
    m.cfg = cfg;
    const int d = cfg.hidden_dim;
    uint64_t pidx = 0;

    auto linear = [&](const std::string& name, int in, int out) {
        LinearLayer l;
        l.w = m.params.create(name + ".w", in, out,
                              uniform_fan_in(static_cast<size_t>(in) * out, in, mix_seed(cfg.seed, ++pidx)));
        l.b = m.params.create(name + ".b", 1, out,
                              uniform_fan_in(out, in, mix_seed(cfg.seed, ++pidx)));
        return l;
    };
    auto norm = [&](const std::string& name, double gamma0 = 1.0) {
        FeatureNorm n;
        n.gamma = m.params.create(name + ".gamma", 1, d, std::vector<double>(d, gamma0));
        n.beta = m.params.create(name + ".beta", 1, d, std::vector<double>(d, 0.0));
        return n;
    };
    auto square = [&](const std::string& name) {
        return m.params.create(name, d, d,
                               uniform_fan_in(static_cast<size_t>(d) * d, d, mix_seed(cfg.seed, ++pidx)));
    };
    auto mlp = [&](const std::string& name, int depth, int out) {
        Mlp mm;
        for (int l = 0; l < depth; ++l)
            mm.layers.push_back(linear(name + ".l" + std::to_string(l), d, l + 1 == depth ? out : d));
        return mm;
    };

    m.proj = linear("proj", cfg.rand_feat_dim, d);
    for (int i = 0; i < cfg.num_layers; ++i) {
        const std::string base = "layer" + std::to_string(i);
        switch (cfg.conv) {
            case ConvKind::GatedGcn: {
                GatedGcnLayer l;
                l.w1 = square(base + ".w1");
                l.w2 = square(base + ".w2");
                l.w3 = square(base + ".w3");
                l.w4 = square(base + ".w4");
                l.w5 = square(base + ".w5");
                l.norm_h = norm(base + ".norm_h");
                l.norm_e = norm(base + ".norm_e");
                m.gated_layers.push_back(std::move(l));
                break;
            }
            case ConvKind::Gin: {
                GinLayer l{mlp(base + ".mlp", 2, d)};
                m.gin_layers.push_back(std::move(l));
                break;
            }
            case ConvKind::Gcn: {
                GcnLayer l{linear(base + ".lin", d, d)};
                m.gcn_layers.push_back(std::move(l));
                break;
            }
        }
        if (cfg.virtual_node) {
            VirtualNodeLayer vn;
            vn.mlp = mlp("vn" + std::to_string(i) + ".mlp", 2, d);
            // Zero-init the residual branch: the pooled sum entering the MLP
            // scales with graph size, and broadcasting an O(n)-sized update to
            // every node at step 0 destabilizes early training. Starting the
            // branch at identity lets its contribution be learned instead.
            auto& last = vn.mlp.layers.back();
            std::fill(last.w.mutable_values().begin(), last.w.mutable_values().end(), 0.0);
            std::fill(last.b.mutable_values().begin(), last.b.mutable_values().end(), 0.0);
            m.vn_layers.push_back(std::move(vn));
        }
    }
    if (cfg.independent_heads) {
        for (const auto& fam : kFamilies) {
            auto head = mlp(std::string("head.") + fam.name, cfg.head_depth, fam.dim);
            (fam.graph_level ? m.graph_heads : m.node_heads).push_back(std::move(head));
        }
    } else {
        m.node_heads.push_back(mlp("head.node", cfg.head_depth, kNodeTargetDim));
        m.graph_heads.push_back(mlp("head.graph", cfg.head_depth, kGraphTargetDim));
    }
    m.graph_target_mean.assign(kGraphTargetDim, 0.0);
    m.graph_target_std.assign(kGraphTargetDim, 1.0);
    return m;
}

ForwardResult forward_batch(const GPSEModel& model, const Batch& batch, const DenseMatrix& feats) {
    if (feats.rows != batch.num_nodes || feats.cols != model.cfg.rand_feat_dim)
        throw std::invalid_argument("forward_batch: feature shape mismatch");
    const int d = model.cfg.hidden_dim;
    Tensor h = model.proj.apply(Tensor::constant(feats));
    Tensor e = Tensor::zeros(static_cast<int>(batch.edge_src.size()), d);
    Tensor v = Tensor::zeros(batch.num_graphs, d);
    for (int i = 0; i < model.cfg.num_layers; ++i) {
        switch (model.cfg.conv) {
            case ConvKind::GatedGcn: {
                auto [hn, en] = model.gated_layers[i].apply(h, e, batch);
                h = hn;
                e = en;
                break;
            }
            case ConvKind::Gin: h = model.gin_layers[i].apply(h, batch); break;
            case ConvKind::Gcn: h = model.gcn_layers[i].apply(h, batch); break;
        }
        if (model.cfg.virtual_node) {
            auto [hb, vn] = model.vn_layers[i].apply(h, v, batch);
            h = hb;
            v = vn;
        }
    }
    ForwardResult out;
    out.node_states = h;
    out.graph_states =
        model.cfg.virtual_node ? v : scatter_add_rows(h, batch.node2graph, batch.num_graphs);
    std::vector<Tensor> node_parts, graph_parts;
    for (const auto& head : model.node_heads) node_parts.push_back(head.apply(h));
    for (const auto& head : model.graph_heads) graph_parts.push_back(head.apply(out.graph_states));
    out.node_pred = concat_cols(node_parts);
    out.graph_pred = concat_cols(graph_parts);
    return out;
}

DenseMatrix encode(const GPSEModel& model, const Graph& g, uint64_t seed, int draws) {
    if (draws < 1) throw std::invalid_argument("encode: draws must be >= 1");
    Batch b = make_batch({&g});
    DenseMatrix acc(g.num_nodes(), model.cfg.hidden_dim);
    for (int t = 0; t < draws; ++t) {
        DenseMatrix feats =
            gaussian_matrix(g.num_nodes(), model.cfg.rand_feat_dim, mix_seed(seed, 7, t));
        auto fwd = forward_batch(model, b, feats);
        const auto& vals = fwd.node_states.values();
        for (size_t i = 0; i < vals.size(); ++i) acc.data[i] += vals[i];
    }
    for (auto& x : acc.data) x /= draws;
    return acc;
}

TargetCache compute_target_cache(const GraphCorpus& corpus) {
    TargetCache cache;
    cache.bundles.reserve(corpus.graphs.size());
    for (const auto& g : corpus.graphs) cache.bundles.push_back(compute_all_targets(g));
    return cache;
}

namespace {

std::vector<double> normalized_graph_targets(const GPSEModel& m, const TargetBundle& b) {
    std::vector<double> out(kGraphTargetDim);
    for (int j = 0; j < kGraphTargetDim; ++j) {
        if (m.graph_target_std[j] < 1e-12)
            out[j] = 0.0;
        else
            out[j] = (b.graph_targets[j] - m.graph_target_mean[j]) / m.graph_target_std[j];
    }
    return out;
}

struct BatchTargets {
    DenseMatrix node;   // total nodes x 51
    DenseMatrix graph;  // G x 11
};

BatchTargets stack_targets(const GPSEModel& model, const GraphCorpus& corpus,
                           const TargetCache& cache, const std::vector<int>& idx) {
    int total = 0;
    for (int i : idx) total += corpus.graphs[i].num_nodes();
    BatchTargets t{DenseMatrix(total, kNodeTargetDim),
                   DenseMatrix(static_cast<int>(idx.size()), kGraphTargetDim)};
    int row = 0;
    for (size_t gi = 0; gi < idx.size(); ++gi) {
        const auto& bundle = cache.bundles[idx[gi]];
        for (int i = 0; i < bundle.node_targets.rows; ++i, ++row)
            for (int j = 0; j < kNodeTargetDim; ++j)
                t.node.at(row, j) = bundle.node_targets.at(i, j);
        auto gt = normalized_graph_targets(model, bundle);
        for (int j = 0; j < kGraphTargetDim; ++j) t.graph.at(static_cast<int>(gi), j) = gt[j];
    }
    return t;
}

DenseMatrix stack_features(const GPSEModel& model, const GraphCorpus& corpus,
                           const std::vector<int>& idx, uint64_t epoch_stream) {
    int total = 0;
    for (int i : idx) total += corpus.graphs[i].num_nodes();
    DenseMatrix feats(total, model.cfg.rand_feat_dim);
    int row = 0;
    for (int i : idx) {
        const int n = corpus.graphs[i].num_nodes();
        DenseMatrix f = gaussian_matrix(n, model.cfg.rand_feat_dim,
                                        mix_seed(model.cfg.seed, epoch_stream, static_cast<uint64_t>(i)));
        std::copy(f.data.begin(), f.data.end(),
                  feats.data.begin() + static_cast<size_t>(row) * model.cfg.rand_feat_dim);
        row += n;
    }
    return feats;
}

double batch_loss_value(const GPSEModel& model, const GraphCorpus& corpus, const TargetCache& cache,
                        const std::vector<int>& idx, uint64_t epoch_stream, bool do_backward,
                        std::vector<const Graph*>* scratch) {
    scratch->clear();
    for (int i : idx) scratch->push_back(&corpus.graphs[i]);
    Batch b = make_batch(*scratch);
    DenseMatrix feats = stack_features(model, corpus, idx, epoch_stream);
    auto fwd = forward_batch(model, b, feats);
    BatchTargets t = stack_targets(model, corpus, cache, idx);
    Tensor loss = l1_cosine_loss(fwd.node_pred, t.node, b.node2graph, b.num_graphs, fwd.graph_pred,
                                 t.graph, kGraphBlocks);
    const double value = loss.scalar();
    if (do_backward) backward(loss);
    return value;
}

}  // namespace

RecoveryReport train(GPSEModel& model, const GraphCorpus& corpus, const TargetCache& targets) {
    const auto& cfg = model.cfg;
    if (corpus.splits.size() != corpus.graphs.size())
        throw std::invalid_argument("train: corpus has no split assignment");
    if (targets.bundles.size() != corpus.graphs.size())
        throw std::invalid_argument("train: target cache size mismatch");
    std::vector<int> train_idx = corpus.indices_of(Split::Train);
    std::vector<int> val_idx = corpus.indices_of(Split::Val);
    if (train_idx.empty() || val_idx.empty())
        throw std::invalid_argument("train: empty train or val split");

    // Freeze corpus-wide graph-target statistics from the training split.
    for (int j = 0; j < kGraphTargetDim; ++j) {
        double mean = 0.0;
        for (int i : train_idx) mean += targets.bundles[i].graph_targets[j];
        mean /= static_cast<double>(train_idx.size());
        double var = 0.0;
        for (int i : train_idx) {
            const double c = targets.bundles[i].graph_targets[j] - mean;
            var += c * c;
        }
        model.graph_target_mean[j] = mean;
        model.graph_target_std[j] = std::sqrt(var / static_cast<double>(train_idx.size()));
    }

    const long batches_per_epoch =
        (static_cast<long>(train_idx.size()) + cfg.batch_size - 1) / cfg.batch_size;
    AdamConfig acfg;
    acfg.lr = cfg.lr;
    acfg.clip_norm = cfg.clip_norm;
    acfg.total_steps = static_cast<long>(cfg.epochs) * batches_per_epoch;
    acfg.warmup_frac = cfg.warmup_frac;
    Adam opt(model.params.all(), acfg);

    RecoveryReport report;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_params;
    std::vector<const Graph*> scratch;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order = train_idx;
        std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 900, static_cast<uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const uint64_t feat_stream = cfg.resample_features_each_epoch ? 100 + epoch : 100;

        double train_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<int> idx(order.begin() + start,
                                 order.begin() + std::min(order.size(), start + cfg.batch_size));
            opt.zero_grad();
            const double value =
                batch_loss_value(model, corpus, targets, idx, feat_stream, true, &scratch);
            if (!std::isfinite(value))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch starting at " + std::to_string(start));
            opt.step();
            train_loss += value * static_cast<double>(idx.size());
        }
        train_loss /= static_cast<double>(train_idx.size());

        // Validation uses the fixed feature stream so epochs are comparable.
        double val_loss = 0.0;
        for (size_t start = 0; start < val_idx.size(); start += cfg.batch_size) {
            std::vector<int> idx(val_idx.begin() + start,
                                 val_idx.begin() + std::min(val_idx.size(), start + cfg.batch_size));
            val_loss += batch_loss_value(model, corpus, targets, idx, 0, false, &scratch) *
                        static_cast<double>(idx.size());
        }
        val_loss /= static_cast<double>(val_idx.size());
        if (!std::isfinite(val_loss))
            throw std::runtime_error("train: non-finite validation loss at epoch " +
                                     std::to_string(epoch));

        report.train_loss.push_back(train_loss);
        report.val_loss.push_back(val_loss);
        if (val_loss < best_val) {
            best_val = val_loss;
            report.best_epoch = epoch;
            best_params.clear();
            for (const auto& p : model.params.all()) best_params.push_back(p->value.values());
        }
    }

    if (!best_params.empty()) {
        const auto& all = model.params.all();
        for (size_t i = 0; i < all.size(); ++i) all[i]->value.mutable_values() = best_params[i];
    }
    return report;
}

RecoveryReport evaluate_recovery(const GPSEModel& model, const GraphCorpus& corpus,
                                 const TargetCache& targets, Split split) {
    std::vector<int> idx = corpus.indices_of(split);
    if (idx.empty()) throw std::invalid_argument("evaluate_recovery: empty split");
    std::vector<std::vector<double>> y_true(std::size(kFamilies)), y_pred(std::size(kFamilies));
    std::vector<const Graph*> scratch;
    for (size_t start = 0; start < idx.size(); start += model.cfg.batch_size) {
        std::vector<int> chunk(idx.begin() + start,
                               idx.begin() + std::min(idx.size(), start + model.cfg.batch_size));
        scratch.clear();
        for (int i : chunk) scratch.push_back(&corpus.graphs[i]);
        Batch b = make_batch(scratch);
        DenseMatrix feats = stack_features(model, corpus, chunk, 0);
        auto fwd = forward_batch(model, b, feats);
        BatchTargets t = stack_targets(model, corpus, targets, chunk);
        for (size_t f = 0; f < std::size(kFamilies); ++f) {
            const auto& fam = kFamilies[f];
            if (fam.graph_level) {
                for (int gi = 0; gi < t.graph.rows; ++gi)
                    for (int j = 0; j < fam.dim; ++j) {
                        y_true[f].push_back(t.graph.at(gi, fam.offset + j));
                        y_pred[f].push_back(fwd.graph_pred.value_at(gi, fam.offset + j));
                    }
            } else {
                for (int i = 0; i < t.node.rows; ++i)
                    for (int j = 0; j < fam.dim; ++j) {
                        y_true[f].push_back(t.node.at(i, fam.offset + j));
                        y_pred[f].push_back(fwd.node_pred.value_at(i, fam.offset + j));
                    }
            }
        }
    }
    RecoveryReport report;
    double sum = 0.0;
    for (size_t f = 0; f < std::size(kFamilies); ++f) {
        const double r2 = r2_score(y_true[f], y_pred[f]);
        report.family_r2.emplace_back(kFamilies[f].name, r2);
        sum += r2;
    }
    report.overall = sum / static_cast<double>(std::size(kFamilies));
    return report;
}

// --- checkpoint I/O -------------------------------------------------------

namespace {

constexpr char kCkptMagic[8] = {'G', 'P', 'S', 'E', 'C', 'K', 'P', 'T'};
constexpr uint32_t kCkptVersion = 1;

void write_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t read_u32(std::istream& in, const char* what) {
    uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 4))
        throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
    return v;
}

}  // namespace

void save_checkpoint(const GPSEModel& model, const std::string& path) {
    json header;
    header["config"] = config_to_json(model.cfg);
    header["graph_target_mean"] = model.graph_target_mean;
    header["graph_target_std"] = model.graph_target_std;
    json tensors = json::array();
    for (const auto& p : model.params.all())
        tensors.push_back(
            json{{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
    header["tensors"] = tensors;
    const std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    out.write(kCkptMagic, 8);
    write_u32(out, kCkptVersion);
    write_u32(out, static_cast<uint32_t>(htext.size()));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& p : model.params.all()) {
        const auto& vals = p->value.values();
        out.write(reinterpret_cast<const char*>(vals.data()),
                  static_cast<std::streamsize>(vals.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

GPSEModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
    const uint32_t version = read_u32(in, "version");
    if (version != kCkptVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version) +
                                 " (expected " + std::to_string(kCkptVersion) + ")");
    const uint32_t hlen = read_u32(in, "header length");
    std::string htext(hlen, '\0');
    if (!in.read(htext.data(), hlen)) throw std::runtime_error("checkpoint: truncated header");
    json header = json::parse(htext);

    GPSEModel model = init_model(config_from_json(header.at("config")));
    model.graph_target_mean = header.at("graph_target_mean").get<std::vector<double>>();
    model.graph_target_std = header.at("graph_target_std").get<std::vector<double>>();
    if (model.graph_target_mean.size() != kGraphTargetDim ||
        model.graph_target_std.size() != kGraphTargetDim)
        throw std::runtime_error("checkpoint: bad normalization statistics length");

    const auto& tensors = header.at("tensors");
    const auto& params = model.params.all();
    if (tensors.size() != params.size())
        throw std::runtime_error("checkpoint: header lists " + std::to_string(tensors.size()) +
                                 " tensors, model has " + std::to_string(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& t = tensors[i];
        if (t.at("name").get<std::string>() != params[i]->name ||
            t.at("rows").get<int>() != params[i]->value.rows() ||
            t.at("cols").get<int>() != params[i]->value.cols())
            throw std::runtime_error("checkpoint: tensor mismatch at '" + params[i]->name + "'");
        auto& vals = params[i]->value.mutable_values();
        if (!in.read(reinterpret_cast<char*>(vals.data()),
                     static_cast<std::streamsize>(vals.size() * sizeof(double))))
            throw std::runtime_error("checkpoint: truncated payload at '" + params[i]->name + "'");
    }
    return model;
}

// --- encodings export -----------------------------------------------------

void export_encodings(const GPSEModel& model, const GraphCorpus& corpus, const std::string& path,
                      uint64_t seed, bool csv, int draws) {
    if (csv) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error("export: cannot open '" + path + "'");
        out << "graph_id,node_id";
        for (int j = 0; j < model.cfg.hidden_dim; ++j) out << ",e" << j;
        out << "\n";
        out.precision(17);
        for (size_t gi = 0; gi < corpus.graphs.size(); ++gi) {
            DenseMatrix enc = encode(model, corpus.graphs[gi], mix_seed(seed, 11, gi), draws);
            for (int i = 0; i < enc.rows; ++i) {
                out << corpus.graphs[gi].id() << ',' << i;
                for (int j = 0; j < enc.cols; ++j) out << ',' << enc.at(i, j);
                out << "\n";
            }
        }
        if (!out) throw std::runtime_error("export: write failed for '" + path + "'");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("export: cannot open '" + path + "'");
    out.write("GPSEENC1", 8);
    write_u32(out, 1);
    write_u32(out, static_cast<uint32_t>(corpus.graphs.size()));
    write_u32(out, static_cast<uint32_t>(model.cfg.hidden_dim));
    for (size_t gi = 0; gi < corpus.graphs.size(); ++gi) {
        const Graph& g = corpus.graphs[gi];
        write_u32(out, static_cast<uint32_t>(g.id().size()));
        out.write(g.id().data(), static_cast<std::streamsize>(g.id().size()));
        write_u32(out, static_cast<uint32_t>(g.num_nodes()));
        DenseMatrix enc = encode(model, g, mix_seed(seed, 11, gi), draws);
        std::vector<float> row(enc.data.begin(), enc.data.end());
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("export: write failed for '" + path + "'");
}

}  // namespace gpse
