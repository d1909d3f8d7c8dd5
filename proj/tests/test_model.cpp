#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "gpse/model.hpp"

using namespace gpse;

namespace {

GraphCorpus small_corpus(int count, uint64_t seed) {
    GraphCorpus c;
    for (int i = 0; i < count; ++i) {
        const int n = 8 + static_cast<int>((seed + i) % 9);
        c.graphs.push_back(gen_er("er" + std::to_string(i), n, 0.3, seed + i));
    }
    c.assign_splits(0.1, 0.1, seed);
    return c;
}

GPSEConfig tiny_config() {
    GPSEConfig cfg;
    cfg.rand_feat_dim = 4;
    cfg.hidden_dim = 16;
    cfg.num_layers = 2;
    cfg.epochs = 0;
    return cfg;
}

std::string temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "gpse_test_model";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST_CASE("config validation and JSON round trip") {
    GPSEConfig cfg;
    cfg.rand_feat_dim = 20;
    cfg.hidden_dim = 16;  // k > d
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.hidden_dim = 64;
    cfg.num_layers = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.num_layers = 3;
    cfg.conv = ConvKind::Gin;
    cfg.virtual_node = false;
    cfg.seed = 99;
    cfg.epochs = 17;
    auto back = GPSEConfig::from_json(cfg.to_json());
    CHECK(back.rand_feat_dim == cfg.rand_feat_dim);
    CHECK(back.hidden_dim == cfg.hidden_dim);
    CHECK(back.num_layers == cfg.num_layers);
    CHECK(back.conv == ConvKind::Gin);
    CHECK(back.virtual_node == false);
    CHECK(back.seed == 99);
    CHECK(back.epochs == 17);

    CHECK_THROWS_AS(conv_kind_from_name("transformer"), std::invalid_argument);
    CHECK(conv_kind_from_name(conv_kind_name(ConvKind::Gcn)) == ConvKind::Gcn);
}

TEST_CASE("init_model is deterministic per seed") {
    auto cfg = tiny_config();
    auto m1 = init_model(cfg);
    auto m2 = init_model(cfg);
    const auto &p1 = m1.params.all(), &p2 = m2.params.all();
    REQUIRE(p1.size() == p2.size());
    for (size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i]->name == p2[i]->name);
        CHECK(p1[i]->value.values() == p2[i]->value.values());
    }
    cfg.seed = 1;
    auto m3 = init_model(cfg);
    CHECK(m3.params.all()[0]->value.values() != p1[0]->value.values());
}

TEST_CASE("full-scale configuration exceeds one million parameters") {
    GPSEConfig cfg;
    cfg.hidden_dim = 512;
    cfg.num_layers = 20;
    auto m = init_model(cfg);
    CHECK(m.params.total_size() > 1000000);
}

TEST_CASE("k > d rejected by init_model") {
    GPSEConfig cfg = tiny_config();
    cfg.rand_feat_dim = 32;
    CHECK_THROWS_AS(init_model(cfg), std::invalid_argument);
}

TEST_CASE("encode determinism, draws averaging, and non-degeneracy") {
    auto m = init_model(tiny_config());
    auto g = gen_er("g", 10, 0.3, 4);
    auto e1 = encode(m, g, 5);
    auto e2 = encode(m, g, 5);
    CHECK(e1.data == e2.data);
    CHECK(e1.rows == 10);
    CHECK(e1.cols == 16);
    auto e3 = encode(m, g, 6);
    CHECK(e1.data != e3.data);  // different seeds draw different features

    // draws=1 repeated equals itself; draws=2 is the mean of the two draws'
    // states only if the two single-draw states are averaged — verify the
    // averaging property with a 1-layer sanity bound instead: the mean of k
    // encodings has smaller spread than single draws.
    auto ed = encode(m, g, 5, 8);
    CHECK(ed.rows == 10);
    double lone = 0.0, avg = 0.0;
    for (size_t i = 0; i < e1.data.size(); ++i) {
        lone += e1.data[i] * e1.data[i];
        avg += ed.data[i] * ed.data[i];
    }
    CHECK(std::isfinite(avg));
    CHECK(avg <= lone * 4.0);  // loose sanity: averaging does not blow up
}

TEST_CASE("forward_batch permutation equivariance with permuted features") {
    auto m = init_model(tiny_config());
    auto g = gen_er("g", 8, 0.4, 12);
    std::vector<int> perm{5, 2, 7, 0, 3, 6, 1, 4};
    auto pg = g.permuted(perm, "pg");
    Batch b = make_batch({&g});
    Batch pb = make_batch({&pg});
    DenseMatrix feats = gaussian_matrix(8, m.cfg.rand_feat_dim, 77);
    DenseMatrix pfeats(8, m.cfg.rand_feat_dim);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < m.cfg.rand_feat_dim; ++j) pfeats.at(perm[i], j) = feats.at(i, j);
    auto f1 = forward_batch(m, b, feats);
    auto f2 = forward_batch(m, pb, pfeats);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < m.cfg.hidden_dim; ++j)
            CHECK(std::fabs(f1.node_states.value_at(i, j) -
                            f2.node_states.value_at(perm[i], j)) <= 1e-9);
    for (int j = 0; j < kGraphTargetDim; ++j)
        CHECK(std::fabs(f1.graph_pred.value_at(0, j) - f2.graph_pred.value_at(0, j)) <= 1e-9);
}

TEST_CASE("training descends and is reproducible") {
    auto corpus = small_corpus(40, 3);
    auto cache = compute_target_cache(corpus);
    GPSEConfig cfg;
    cfg.rand_feat_dim = 4;
    cfg.hidden_dim = 24;
    cfg.num_layers = 2;
    cfg.epochs = 8;
    cfg.batch_size = 16;
    auto model = init_model(cfg);
    auto report = train(model, corpus, cache);
    REQUIRE(report.train_loss.size() == 8);
    CHECK(report.train_loss.back() < report.train_loss.front());
    CHECK(report.best_epoch >= 0);
    for (double v : report.val_loss) CHECK(std::isfinite(v));

    // Same seed, fresh model: identical loss curve.
    auto model2 = init_model(cfg);
    auto report2 = train(model2, corpus, cache);
    CHECK(report2.train_loss == report.train_loss);
    CHECK(report2.val_loss == report.val_loss);

    // Returned parameters are the best-validation snapshot.
    double best = report.val_loss[report.best_epoch];
    for (double v : report.val_loss) CHECK(best <= v + 1e-15);

    // Recovery evaluation: six families, overall = their mean, all <= 1.
    auto rec = evaluate_recovery(model, corpus, cache, Split::Test);
    REQUIRE(rec.family_r2.size() == 6);
    double sum = 0.0;
    for (const auto& [name, r2] : rec.family_r2) {
        CHECK(r2 <= 1.0);
        CHECK(std::isfinite(r2));
        sum += r2;
    }
    CHECK(rec.overall == doctest::Approx(sum / 6.0).epsilon(1e-12));
}

TEST_CASE("train input validation") {
    auto cfg = tiny_config();
    cfg.epochs = 1;
    auto model = init_model(cfg);
    GraphCorpus empty_splits;
    empty_splits.graphs.push_back(gen_er("a", 6, 0.4, 1));
    TargetCache cache = compute_target_cache(empty_splits);
    CHECK_THROWS_AS(train(model, empty_splits, cache), std::invalid_argument);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    auto cfg = tiny_config();
    auto model = init_model(cfg);
    model.graph_target_mean.assign(kGraphTargetDim, 1.5);
    model.graph_target_std.assign(kGraphTargetDim, 2.25);
    auto path = temp_path("ckpt.bin");
    save_checkpoint(model, path);
    auto back = load_checkpoint(path);
    const auto &p1 = model.params.all(), &p2 = back.params.all();
    REQUIRE(p1.size() == p2.size());
    for (size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->value.values() == p2[i]->value.values());
    CHECK(back.graph_target_mean == model.graph_target_mean);
    CHECK(back.graph_target_std == model.graph_target_std);

    auto g = gen_er("g", 9, 0.35, 8);
    CHECK(encode(model, g, 3).data == encode(back, g, 3).data);

    // save(load(x)) is byte-identical.
    auto path2 = temp_path("ckpt2.bin");
    save_checkpoint(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
}

TEST_CASE("checkpoint rejects corruption") {
    auto model = init_model(tiny_config());
    auto path = temp_path("ckpt3.bin");
    save_checkpoint(model, path);

    // Truncation.
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign((std::istreambuf_iterator<char>(in)), {});
    }
    auto tpath = temp_path("ckpt_trunc.bin");
    {
        std::ofstream out(tpath, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 64));
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(tpath), doctest::Contains("truncated"), std::runtime_error);

    // Version bump.
    auto vpath = temp_path("ckpt_ver.bin");
    {
        std::string mod = bytes;
        mod[8] = 2;  // little-endian u32 version right after the magic
        std::ofstream out(vpath, std::ios::binary);
        out.write(mod.data(), static_cast<std::streamsize>(mod.size()));
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(vpath), doctest::Contains("version"), std::runtime_error);

    // Bad magic.
    auto mpath = temp_path("ckpt_magic.bin");
    {
        std::string mod = bytes;
        mod[0] = 'X';
        std::ofstream out(mpath, std::ios::binary);
        out.write(mod.data(), static_cast<std::streamsize>(mod.size()));
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(mpath), doctest::Contains("magic"), std::runtime_error);
}

TEST_CASE("encodings export: binary contract, determinism, CSV") {
    auto model = init_model(tiny_config());
    GraphCorpus c;
    c.graphs.push_back(gen_er("a", 5, 0.5, 1));
    c.graphs.push_back(gen_er("bb", 7, 0.4, 2));
    c.graphs.push_back(gen_er("ccc", 4, 0.6, 3));
    auto path = temp_path("enc.bin");
    export_encodings(model, c, path, 42);

    std::ifstream in(path, std::ios::binary);
    char magic[8];
    REQUIRE(in.read(magic, 8));
    CHECK(std::string(magic, 8) == "GPSEENC1");
    auto u32 = [&in] {
        uint32_t v;
        REQUIRE(in.read(reinterpret_cast<char*>(&v), 4));
        return v;
    };
    CHECK(u32() == 1);           // version
    CHECK(u32() == 3);           // graph count
    CHECK(u32() == 16);          // dim
    const char* ids[] = {"a", "bb", "ccc"};
    const int sizes[] = {5, 7, 4};
    for (int g = 0; g < 3; ++g) {
        uint32_t idlen = u32();
        std::string id(idlen, '\0');
        REQUIRE(in.read(id.data(), idlen));
        CHECK(id == ids[g]);
        uint32_t n = u32();
        CHECK(n == static_cast<uint32_t>(sizes[g]));
        std::vector<float> vals(static_cast<size_t>(n) * 16);
        REQUIRE(in.read(reinterpret_cast<char*>(vals.data()),
                        static_cast<std::streamsize>(vals.size() * sizeof(float))));
        for (float v : vals) CHECK(std::isfinite(v));
    }
    CHECK(in.peek() == EOF);

    // Re-export with the same seed: byte-identical.
    auto path2 = temp_path("enc2.bin");
    export_encodings(model, c, path2, 42);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);

    // CSV: header plus one row per node.
    auto cpath = temp_path("enc.csv");
    export_encodings(model, c, cpath, 42, true);
    std::ifstream csv(cpath);
    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(line.rfind("graph_id,node_id,e0,", 0) == 0);
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 5 + 7 + 4);
}

TEST_CASE("non-VN model pools node states for graph heads") {
    auto cfg = tiny_config();
    cfg.virtual_node = false;
    auto m = init_model(cfg);
    auto g = gen_er("g", 6, 0.5, 9);
    Batch b = make_batch({&g});
    auto fwd = forward_batch(m, b, gaussian_matrix(6, cfg.rand_feat_dim, 3));
    CHECK(fwd.graph_states.rows() == 1);
    CHECK(fwd.graph_pred.cols() == kGraphTargetDim);
    for (double v : fwd.graph_pred.values()) CHECK(std::isfinite(v));
}
