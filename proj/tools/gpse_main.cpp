// gpse: command-line driver for corpus generation, target computation,
// encoder training/evaluation, encoding export, and the analysis probes.
// Exit codes: 0 success, 1 input/validation error, 2 numerical failure.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpse/analysis.hpp"
#include "gpse/model.hpp"
#include "gpse/pse.hpp"

using nlohmann::json;
using namespace gpse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

/// Thrown for failures of the numerical machinery (NaN loss, eigensolver
/// non-convergence) as opposed to bad input.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

uint64_t default_seed() {
    if (const char* env = std::getenv("GPSE_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

/// Runs fn(i) for i in [0, n) on `jobs` workers; callers index into
/// preallocated output slots so results keep input order.
template <typename F>
void parallel_for(int n, int jobs, F&& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < jobs; ++t)
        workers.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& w : workers) w.join();
}

GraphCorpus read_corpus_checked(const std::string& path) { return corpus_read(path); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::invalid_argument("write failed for '" + path + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json report_to_json(const RecoveryReport& rep) {
    json j;
    j["Overall"] = rep.overall;
    for (const auto& [name, r2] : rep.family_r2) j[name] = r2;
    return j;
}

// Parses "8..30" or "12" into an inclusive range.
std::pair<int, int> parse_range(const std::string& text) {
    auto pos = text.find("..");
    if (pos == std::string::npos) {
        const int v = std::stoi(text);
        return {v, v};
    }
    return {std::stoi(text.substr(0, pos)), std::stoi(text.substr(pos + 2))};
}

GraphCorpus load_split_corpus(const std::string& path, double val_frac, double test_frac,
                              uint64_t seed) {
    GraphCorpus corpus = read_corpus_checked(path);
    corpus.assign_splits(val_frac, test_frac, seed);
    return corpus;
}

// --- subcommand bodies ----------------------------------------------------

struct GenOpts {
    std::string kind = "er", out, n_range = "8..30";
    int count = 100;
    double p = 0.15;
    uint64_t seed = default_seed();
};

int cmd_gen(const GenOpts& o) {
    GraphCorpus corpus;
    if (o.kind == "er") {
        auto [lo, hi] = parse_range(o.n_range);
        if (lo < 1 || hi < lo) throw std::invalid_argument("gen: bad --n range");
        for (int i = 0; i < o.count; ++i) {
            std::mt19937_64 rng(mix_seed(o.seed, 1, static_cast<uint64_t>(i)));
            const int n = lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
            corpus.graphs.push_back(gen_er("er" + std::to_string(i), n, o.p,
                                           mix_seed(o.seed, 2, static_cast<uint64_t>(i))));
        }
    } else if (o.kind == "csl") {
        corpus = gen_csl_benchmark();
    } else if (o.kind == "wl-pair") {
        auto [h1, h2] = gen_wl_pair(WlPairKind::HexPent);
        auto [t1, t2] = gen_wl_pair(WlPairKind::TriHex);
        corpus.graphs = {h1, h2, t1, t2};
    } else if (o.kind == "family") {
        for (int i = 0; i < o.count; ++i)
            corpus.graphs.push_back(gen_quadfree("qf" + std::to_string(i),
                                                 mix_seed(o.seed, 3, static_cast<uint64_t>(i))));
    } else {
        throw std::invalid_argument("gen: unknown --kind '" + o.kind +
                                    "' (er|csl|wl-pair|family)");
    }
    corpus_write(corpus, o.out);
    double nodes = 0, edges = 0;
    for (const auto& g : corpus.graphs) {
        nodes += g.num_nodes();
        edges += g.num_edges();
    }
    const auto count = static_cast<double>(std::max<size_t>(1, corpus.graphs.size()));
    json summary{{"graphs", corpus.graphs.size()},
                 {"mean_nodes", nodes / count},
                 {"mean_edges", edges / count},
                 {"out", o.out}};
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

struct PseOpts {
    std::string in, out, graph_out;
    bool raw = false;
    int jobs = 1;
};

int cmd_pse(const PseOpts& o) {
    GraphCorpus corpus = read_corpus_checked(o.in);
    const int n = static_cast<int>(corpus.graphs.size());
    std::vector<TargetBundle> bundles(n);
    try {
        parallel_for(n, o.jobs, [&](int i) {
            bundles[i] = o.raw ? compute_raw_targets(corpus.graphs[i])
                               : compute_all_targets(corpus.graphs[i]);
        });
    } catch (const std::runtime_error& e) {
        throw NumericalFailure(e.what());
    }
    std::string text = "graph_id,node_id";
    for (const auto& name : node_target_column_names()) text += "," + name;
    text += "\n";
    for (int gi = 0; gi < n; ++gi)
        for (int v = 0; v < corpus.graphs[gi].num_nodes(); ++v) {
            text += corpus.graphs[gi].id() + "," + std::to_string(v);
            for (int c = 0; c < kNodeTargetDim; ++c)
                text += "," + fmt(bundles[gi].node_targets.at(v, c));
            text += "\n";
        }
    write_text(o.out, text);
    if (!o.graph_out.empty()) {
        std::string gt = "graph_id";
        for (const auto& name : graph_target_column_names()) gt += "," + name;
        gt += "\n";
        for (int gi = 0; gi < n; ++gi) {
            gt += corpus.graphs[gi].id();
            for (double v : bundles[gi].graph_targets) gt += "," + fmt(v);
            gt += "\n";
        }
        write_text(o.graph_out, gt);
    }
    return kExitOk;
}

struct TrainOpts {
    std::string in, config_path, out, report_path;
    double val_frac = 0.05, test_frac = 0.05;
    int epochs = -1;
    int64_t seed = -1;
};

GPSEConfig load_config(const std::string& path) {
    if (path.empty()) return GPSEConfig{};
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    return GPSEConfig::from_json(text);
}

int cmd_train(const TrainOpts& o) {
    GPSEConfig cfg = load_config(o.config_path);
    if (o.epochs >= 0) cfg.epochs = o.epochs;
    if (o.seed >= 0) cfg.seed = static_cast<uint64_t>(o.seed);
    cfg.validate();
    GraphCorpus corpus = load_split_corpus(o.in, o.val_frac, o.test_frac, cfg.seed);

    // Echo the fully-resolved configuration next to the checkpoint.
    std::cout << cfg.to_json() << "\n";
    write_text(o.out + ".config.json", cfg.to_json() + "\n");

    GPSEModel model = init_model(cfg);
    RecoveryReport report;
    try {
        TargetCache cache = compute_target_cache(corpus);
        report = train(model, corpus, cache);
        auto eval = evaluate_recovery(model, corpus, cache, Split::Test);
        report.family_r2 = eval.family_r2;
        report.overall = eval.overall;
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw NumericalFailure(e.what());
    }
    save_checkpoint(model, o.out);
    json rj = report_to_json(report);
    rj["train_loss"] = report.train_loss;
    rj["val_loss"] = report.val_loss;
    rj["best_epoch"] = report.best_epoch;
    const std::string text = rj.dump(2) + "\n";
    if (!o.report_path.empty()) write_text(o.report_path, text);
    std::cout << text;
    return kExitOk;
}

struct EvalOpts {
    std::string ckpt, in, out, split = "test";
    double val_frac = 0.05, test_frac = 0.05;
};

int cmd_eval(const EvalOpts& o) {
    GPSEModel model = load_checkpoint(o.ckpt);
    GraphCorpus corpus = load_split_corpus(o.in, o.val_frac, o.test_frac, model.cfg.seed);
    Split split = Split::Test;
    if (o.split == "train") split = Split::Train;
    else if (o.split == "val") split = Split::Val;
    else if (o.split != "test") throw std::invalid_argument("eval: --split must be train|val|test");
    RecoveryReport rep;
    try {
        TargetCache cache = compute_target_cache(corpus);
        rep = evaluate_recovery(model, corpus, cache, split);
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw NumericalFailure(e.what());
    }
    const std::string text = report_to_json(rep).dump(2) + "\n";
    if (!o.out.empty()) write_text(o.out, text);
    std::cout << text;
    return kExitOk;
}

struct EncodeOpts {
    std::string ckpt, in, out;
    bool csv = false;
    int draws = 1;
    uint64_t seed = default_seed();
};

int cmd_encode(const EncodeOpts& o) {
    GPSEModel model = load_checkpoint(o.ckpt);
    GraphCorpus corpus = read_corpus_checked(o.in);
    try {
        export_encodings(model, corpus, o.out, o.seed, o.csv, o.draws);
    } catch (const std::runtime_error& e) {
        throw NumericalFailure(e.what());
    }
    return kExitOk;
}

struct AnalyzeOpts {
    std::string mode, in, out, ckpt;
    int draws = 20;
    int source = 0, target = 0, layer = 0;
    int jobs = 1;
    uint64_t seed = default_seed();
};

int cmd_analyze(const AnalyzeOpts& o) {
    GraphCorpus corpus = read_corpus_checked(o.in);
    if (o.mode == "curvature") {
        const int n = static_cast<int>(corpus.graphs.size());
        std::vector<std::string> chunks(n);
        parallel_for(n, o.jobs, [&](int gi) {
            const Graph& g = corpus.graphs[gi];
            std::string& text = chunks[gi];
            for (const auto& [i, j] : g.edges()) {
                auto rec = balanced_forman_curvature(g, i, j);
                auto p1 = prop1_check(g, i, j);
                text += g.id() + "," + std::to_string(i) + "," + std::to_string(j) + "," +
                        std::to_string(rec.deg_i) + "," + std::to_string(rec.deg_j) + "," +
                        std::to_string(rec.triangles) + "," + std::to_string(rec.squares_i) + "," +
                        std::to_string(rec.squares_j) + "," + std::to_string(rec.gamma_max) + "," +
                        fmt(rec.ric) + "," + fmt(p1.ric_vn) + "," + fmt(p1.bound) + "," +
                        (p1.holds ? "1" : "0") + "\n";
            }
        });
        std::string text =
            "graph_id,i,j,deg_i,deg_j,triangles,squares_i,squares_j,gamma_max,ric,ric_vn,"
            "prop1_bound,prop1_holds\n";
        for (const auto& c : chunks) text += c;
        write_text(o.out, text);
        return kExitOk;
    }
    if (o.mode == "wl") {
        if (corpus.graphs.size() % 2 != 0)
            throw std::invalid_argument("analyze wl: corpus must hold an even number of graphs "
                                        "(consecutive pairs are compared)");
        json pairs = json::array();
        for (size_t i = 0; i + 1 < corpus.graphs.size(); i += 2) {
            auto res = wl_distinguish(corpus.graphs[i], corpus.graphs[i + 1]);
            pairs.push_back(json{{"pair", {corpus.graphs[i].id(), corpus.graphs[i + 1].id()}},
                                 {"distinguished", res.distinguished},
                                 {"rounds", res.rounds}});
        }
        const std::string text = pairs.dump(2) + "\n";
        write_text(o.out, text);
        std::cout << text;
        return kExitOk;
    }
    if (o.mode == "separation" || o.mode == "influence") {
        if (o.ckpt.empty())
            throw std::invalid_argument("analyze " + o.mode + ": --ckpt is required");
        GPSEModel model = load_checkpoint(o.ckpt);
        json out;
        if (o.mode == "separation") {
            if (corpus.graphs.size() < 2)
                throw std::invalid_argument("analyze separation: need two graphs");
            auto rep = separation_experiment(model, corpus.graphs[0], corpus.graphs[1], o.draws,
                                             o.seed);
            out = json{{"ones_distance", rep.ones_distance},
                       {"cross_centroid_distance", rep.cross_centroid_distance},
                       {"max_intra_distance", rep.max_intra_distance},
                       {"separated", rep.separated}};
        } else {
            if (corpus.graphs.empty()) throw std::invalid_argument("analyze influence: empty corpus");
            const double value = influence_probe(model, corpus.graphs[0], o.source, o.target,
                                                 o.layer, o.seed);
            out = json{{"graph", corpus.graphs[0].id()},
                       {"source", o.source},
                       {"target", o.target},
                       {"layer", o.layer},
                       {"influence_l1", value}};
        }
        const std::string text = out.dump(2) + "\n";
        if (!o.out.empty()) write_text(o.out, text);
        std::cout << text;
        return kExitOk;
    }
    throw std::invalid_argument("analyze: unknown mode '" + o.mode +
                                "' (curvature|wl|separation|influence)");
}

struct GridOpts {
    std::string in, out, depths = "5,10,15,20";
    int hidden_dim = 64, epochs = 25, batch_size = 32, rand_feat_dim = 16;
    uint64_t seed = default_seed();
};

int cmd_grid(const GridOpts& o) {
    GraphCorpus corpus = load_split_corpus(o.in, 0.1, 0.1, o.seed);
    TargetCache cache = compute_target_cache(corpus);
    std::vector<int> depths;
    for (size_t pos = 0; pos < o.depths.size();) {
        auto comma = o.depths.find(',', pos);
        if (comma == std::string::npos) comma = o.depths.size();
        depths.push_back(std::stoi(o.depths.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    std::string text = "depth,virtual_node,overall";
    for (const char* fam : {"LapPE", "ElstaticPE", "RWSE", "HKdiagSE", "EigValSE", "CycleSE"})
        text += std::string(",") + fam;
    text += "\n";
    for (int depth : depths) {
        for (bool vn : {true, false}) {
            GPSEConfig cfg;
            cfg.rand_feat_dim = o.rand_feat_dim;
            cfg.hidden_dim = o.hidden_dim;
            cfg.num_layers = depth;
            cfg.epochs = o.epochs;
            cfg.batch_size = o.batch_size;
            cfg.virtual_node = vn;
            cfg.seed = o.seed;
            GPSEModel model = init_model(cfg);
            RecoveryReport rep;
            try {
                train(model, corpus, cache);
                rep = evaluate_recovery(model, corpus, cache, Split::Test);
            } catch (const std::invalid_argument&) {
                throw;
            } catch (const std::runtime_error& e) {
                throw NumericalFailure(e.what());
            }
            text += std::to_string(depth) + "," + (vn ? "1" : "0") + "," + fmt(rep.overall);
            for (const auto& [name, r2] : rep.family_r2) text += "," + fmt(r2);
            text += "\n";
            std::cout << "depth " << depth << (vn ? " +vn " : " -vn ") << "overall "
                      << rep.overall << "\n";
        }
    }
    write_text(o.out, text);
    return kExitOk;
}

int cmd_selftest(bool force_fail) {
    int failures = 0;
    int checks = 0;
    auto expect = [&](bool ok, const char* what) {
        ++checks;
        if (!ok) {
            ++failures;
            std::cerr << "selftest FAIL: " << what << "\n";
        }
    };

    // Gradient checks on every primitive through a small composite, 5 seeds.
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        DenseMatrix am = gaussian_matrix(3, 4, mix_seed(seed, 1));
        DenseMatrix bm = gaussian_matrix(4, 3, mix_seed(seed, 2));
        Tensor a = Tensor::leaf(3, 4, am.data);
        Tensor b = Tensor::leaf(4, 3, bm.data);
        Tensor gamma = Tensor::leaf(1, 3, {0.7, 1.1, 0.9});
        Tensor beta = Tensor::leaf(1, 3, {0.1, -0.2, 0.3});
        auto f = [&] {
            Tensor m = matmul(a, b);
            Tensor n = feature_norm(m, gamma, beta);
            Tensor r = relu(add(n, sigmoid(m)));
            Tensor g2 = gather_rows(r, {2, 0, 1});
            Tensor s = scatter_add_rows(g2, {0, 1, 0}, 2);
            Tensor l2 = l2_normalize_rows(abs_val(s));
            return mean_all(mul(l2, div_eps(s, abs_val(s), 1.0)));
        };
        expect(grad_check(f, {a, b, gamma, beta}, 1e-5, 10, seed) <= 1e-4, "primitive gradients");
    }

    // Two-layer encoder gradient check.
    {
        GPSEConfig cfg;
        cfg.rand_feat_dim = 3;
        cfg.hidden_dim = 8;
        cfg.num_layers = 2;
        cfg.epochs = 0;
        GPSEModel model = init_model(cfg);
        auto g = gen_er("g", 6, 0.5, 1);
        Batch b = make_batch({&g});
        DenseMatrix feats = gaussian_matrix(6, 3, 9);
        auto bundle = compute_all_targets(g);
        std::vector<Tensor> leaves;
        for (const auto& p : model.params.all()) leaves.push_back(p->value);
        auto f = [&] {
            auto fwd = forward_batch(model, b, feats);
            DenseMatrix gt(1, kGraphTargetDim);
            for (int j = 0; j < kGraphTargetDim; ++j) gt.at(0, j) = bundle.graph_targets[j];
            return l1_cosine_loss(fwd.node_pred, bundle.node_targets, b.node2graph, 1,
                                  fwd.graph_pred, gt, {{0, kEigValDim}, {kEigValDim, kCycleDim}});
        };
        expect(grad_check(f, leaves, 1e-5, 3, 0) <= 1e-4, "two-layer encoder gradients");
    }

    // Oracle equivalences and invariants at small scale.
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto g = gen_er("er", 7, 0.4, seed);
        auto r = rwse(g, 4);
        auto p = g.random_walk_matrix();
        auto p4 = matpow(p, 4);
        bool ok = true;
        for (int v = 0; v < 7; ++v) ok &= std::fabs(r.at(v, 3) - p4.at(v, v)) <= 1e-12;
        expect(ok, "rwse against matrix powers");

        auto dec = sym_eig(g.laplacian());
        DenseMatrix l = g.laplacian();
        DenseMatrix rec(7, 7);
        for (int k = 0; k < 7; ++k)
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j < 7; ++j)
                    rec.at(i, j) += dec.values[k] * dec.vectors.at(i, k) * dec.vectors.at(j, k);
        expect(max_abs_diff(l, rec) <= 1e-8, "eigen reconstruction");

        auto cy = cycle_se(g);
        expect(cy[0] == g.num_edges(), "cycle length-2 entry");
    }
    expect(!wl_distinguish(gen_wl_pair(WlPairKind::TriHex).first,
                           gen_wl_pair(WlPairKind::TriHex).second)
                .distinguished,
           "wl equivalence of the triangle/hexagon pair");

    std::cout << "selftest: " << (checks - failures) << "/" << checks << " checks passed\n";
    if (force_fail) {
        std::cerr << "selftest FAIL: forced failure hook\n";
        return kExitInput;
    }
    return failures == 0 ? kExitOk : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPSE toolkit: graph encodings, encoder training, and analysis probes"};
    app.require_subcommand(1);

    GenOpts gen_o;
    auto* gen_cmd = app.add_subcommand("gen", "generate a graph corpus");
    gen_cmd->add_option("--kind", gen_o.kind, "er|csl|wl-pair|family");
    gen_cmd->add_option("--out", gen_o.out, "corpus output path")->required();
    gen_cmd->add_option("--count", gen_o.count, "number of graphs (er/family)");
    gen_cmd->add_option("--n", gen_o.n_range, "node count or range, e.g. 8..30");
    gen_cmd->add_option("--p", gen_o.p, "ER edge probability");
    gen_cmd->add_option("--seed", gen_o.seed, "generator seed");

    PseOpts pse_o;
    auto* pse_cmd = app.add_subcommand("pse", "compute PSE targets for a corpus");
    pse_cmd->add_option("--in", pse_o.in, "corpus path")->required();
    pse_cmd->add_option("--out", pse_o.out, "node-target CSV path")->required();
    pse_cmd->add_option("--graph-out", pse_o.graph_out, "graph-target CSV path");
    pse_cmd->add_flag("--raw", pse_o.raw, "skip per-graph normalization");
    pse_cmd->add_option("--jobs", pse_o.jobs, "worker count");

    TrainOpts train_o;
    auto* train_cmd = app.add_subcommand("train", "train the encoder");
    train_cmd->add_option("--in", train_o.in, "corpus path")->required();
    train_cmd->add_option("--config", train_o.config_path, "GPSEConfig JSON file");
    train_cmd->add_option("--out", train_o.out, "checkpoint output path")->required();
    train_cmd->add_option("--report", train_o.report_path, "report JSON path");
    train_cmd->add_option("--epochs", train_o.epochs, "override config epochs");
    train_cmd->add_option("--seed", train_o.seed, "override config seed");
    train_cmd->add_option("--val-frac", train_o.val_frac, "validation fraction");
    train_cmd->add_option("--test-frac", train_o.test_frac, "test fraction");

    EvalOpts eval_o;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate PSE recovery of a checkpoint");
    eval_cmd->add_option("--ckpt", eval_o.ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--in", eval_o.in, "corpus path")->required();
    eval_cmd->add_option("--out", eval_o.out, "report JSON path");
    eval_cmd->add_option("--split", eval_o.split, "train|val|test");
    eval_cmd->add_option("--val-frac", eval_o.val_frac, "validation fraction");
    eval_cmd->add_option("--test-frac", eval_o.test_frac, "test fraction");

    EncodeOpts enc_o;
    auto* enc_cmd = app.add_subcommand("encode", "export encodings for a corpus");
    enc_cmd->add_option("--ckpt", enc_o.ckpt, "checkpoint path")->required();
    enc_cmd->add_option("--in", enc_o.in, "corpus path")->required();
    enc_cmd->add_option("--out", enc_o.out, "output path")->required();
    enc_cmd->add_flag("--csv", enc_o.csv, "CSV instead of binary");
    enc_cmd->add_option("--draws", enc_o.draws, "feature draws to average");
    enc_cmd->add_option("--seed", enc_o.seed, "feature seed");

    AnalyzeOpts an_o;
    auto* an_cmd = app.add_subcommand("analyze", "curvature / wl / separation / influence");
    an_cmd->add_option("mode", an_o.mode, "curvature|wl|separation|influence")->required();
    an_cmd->add_option("--in", an_o.in, "corpus path")->required();
    an_cmd->add_option("--out", an_o.out, "report output path");
    an_cmd->add_option("--ckpt", an_o.ckpt, "checkpoint (separation/influence)");
    an_cmd->add_option("--draws", an_o.draws, "random draws (separation)");
    an_cmd->add_option("--source", an_o.source, "source node (influence)");
    an_cmd->add_option("--target", an_o.target, "target node (influence)");
    an_cmd->add_option("--layer", an_o.layer, "layer r (influence)");
    an_cmd->add_option("--jobs", an_o.jobs, "worker count (curvature)");
    an_cmd->add_option("--seed", an_o.seed, "feature seed");

    GridOpts grid_o;
    auto* grid_cmd = app.add_subcommand("grid", "depth x virtual-node ablation grid");
    grid_cmd->add_option("--in", grid_o.in, "corpus path")->required();
    grid_cmd->add_option("--out", grid_o.out, "grid CSV path")->required();
    grid_cmd->add_option("--depths", grid_o.depths, "comma-separated depths");
    grid_cmd->add_option("--d", grid_o.hidden_dim, "hidden width");
    grid_cmd->add_option("--k", grid_o.rand_feat_dim, "random feature width");
    grid_cmd->add_option("--epochs", grid_o.epochs, "epochs per cell");
    grid_cmd->add_option("--batch-size", grid_o.batch_size, "batch size");
    grid_cmd->add_option("--seed", grid_o.seed, "training seed");

    bool selftest_fail = false;
    auto* self_cmd = app.add_subcommand("selftest", "run built-in verification suites");
    self_cmd->add_flag("--force-fail", selftest_fail, "test hook: report failure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen_o);
        if (*pse_cmd) return cmd_pse(pse_o);
        if (*train_cmd) return cmd_train(train_o);
        if (*eval_cmd) return cmd_eval(eval_o);
        if (*enc_cmd) return cmd_encode(enc_o);
        if (*an_cmd) return cmd_analyze(an_o);
        if (*grid_cmd) return cmd_grid(grid_o);
        if (*self_cmd) return cmd_selftest(selftest_fail);
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
