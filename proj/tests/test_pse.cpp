#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>

#include "gpse/pse.hpp"
#include "oracles.hpp"

using namespace gpse;

namespace {

Graph k3() { return Graph::from_edge_list("k3", 3, {{0, 1}, {1, 2}, {0, 2}}); }
Graph p3() { return Graph::from_edge_list("p3", 3, {{0, 1}, {1, 2}}); }
Graph c6() {
    return Graph::from_edge_list("c6", 6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
}

}  // namespace

TEST_CASE("lap_pe on P3 and K1") {
    auto pe = lap_pe(p3());
    CHECK(pe.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2)).epsilon(1e-9));
    CHECK(pe.at(1, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(pe.at(2, 0) == doctest::Approx(1.0 / std::sqrt(2)).epsilon(1e-9));
    CHECK(pe.at(0, 1) == doctest::Approx(1.0 / std::sqrt(6)).epsilon(1e-9));
    CHECK(pe.at(1, 1) == doctest::Approx(2.0 / std::sqrt(6)).epsilon(1e-9));
    CHECK(pe.at(2, 1) == doctest::Approx(1.0 / std::sqrt(6)).epsilon(1e-9));
    for (int v = 0; v < 3; ++v) {
        CHECK(pe.at(v, 2) == 0.0);
        CHECK(pe.at(v, 3) == 0.0);
    }

    auto k1 = Graph::from_edge_list("k1", 1, {});
    auto pk = lap_pe(k1);
    for (int j = 0; j < 4; ++j) CHECK(pk.at(0, j) == 0.0);

    for (uint64_t seed = 0; seed < 5; ++seed)
        for (double x : lap_pe(gen_er("er", 10, 0.3, seed)).data) CHECK(x >= 0.0);
}

TEST_CASE("eigval_se") {
    auto ek = eigval_se(k3());
    CHECK(ek[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(ek[1] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(ek[2] == 0.0);
    CHECK(ek[3] == 0.0);

    auto ec = eigval_se(c6());
    CHECK(ec[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ec[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ec[2] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(ec[3] == doctest::Approx(3.0).epsilon(1e-9));

    auto e0 = eigval_se(Graph::from_edge_list("e", 4, {}));
    for (double v : e0) CHECK(v == 0.0);
}

TEST_CASE("elstatic_pe on K3") {
    auto pe = elstatic_pe(k3());
    for (int v = 0; v < 3; ++v) {
        CHECK(pe.at(v, 0) == doctest::Approx(-1.0 / 3).epsilon(1e-10));      // min of column
        CHECK(pe.at(v, 1) == doctest::Approx(-2.0 / 9).epsilon(1e-10));      // mean of column
        CHECK(pe.at(v, 2) == doctest::Approx(std::sqrt(2.0) / 9).epsilon(1e-10));  // population std
    }
}

TEST_CASE("rwse closed forms and bipartite zeros") {
    auto r = rwse(k3(), 4);
    for (int v = 0; v < 3; ++v) {
        CHECK(r.at(v, 0) == doctest::Approx(0.0));
        CHECK(r.at(v, 1) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.at(v, 2) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(r.at(v, 3) == doctest::Approx(0.375).epsilon(1e-12));
    }

    auto rp = rwse(p3(), 2);
    CHECK(rp.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rp.at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rp.at(2, 1) == doctest::Approx(0.5).epsilon(1e-12));

    // Bipartite: all odd-k entries zero.
    auto rc = rwse(c6(), 6);
    for (int v = 0; v < 6; ++v)
        for (int k = 1; k <= 5; k += 2) CHECK(rc.at(v, k - 1) == 0.0);
}

TEST_CASE("rwse matches exhaustive walk enumeration (n<=8, k<=6)") {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        auto g = gen_er("er", 4 + static_cast<int>(seed % 5), 0.4, seed);
        auto r = rwse(g, 6);
        for (int v = 0; v < g.num_nodes(); ++v)
            for (int k = 1; k <= 6; ++k)
                CHECK(std::fabs(r.at(v, k - 1) - oracle::walk_return_probability(g, v, k)) <= 1e-12);
    }
}

TEST_CASE("hk_diag_se closed form and series oracle") {
    auto h = hk_diag_se(k3(), 3);
    for (int v = 0; v < 3; ++v)
        CHECK(h.at(v, 0) == doctest::Approx(std::exp(-3.0) * 2.0 / 3.0).epsilon(1e-10));

    auto h0 = hk_diag_se(Graph::from_edge_list("e", 3, {}), 5);
    for (double x : h0.data) CHECK(x == 0.0);

    // Strictly decreasing in k when a non-trivial eigenvalue exists.
    auto hp = hk_diag_se(p3(), 10);
    for (int v = 0; v < 3; ++v)
        for (int k = 1; k < 10; ++k) CHECK(hp.at(v, k) < hp.at(v, k - 1));

    for (uint64_t seed = 0; seed < 6; ++seed) {
        auto g = gen_er("er", 6 + static_cast<int>(seed % 5), 0.35, seed);
        auto hm = hk_diag_se(g, 4);
        for (int k = 1; k <= 4; ++k) {
            auto diag = oracle::heat_kernel_diag_series(g, k);
            for (int v = 0; v < g.num_nodes(); ++v)
                CHECK(std::fabs(hm.at(v, k - 1) - diag[v]) <= 1e-8);
        }
    }
}

TEST_CASE("cycle_se closed cases") {
    auto cy = cycle_se(c6());
    CHECK(cy == std::vector<double>{6, 0, 0, 0, 1, 0, 0});

    auto k4 = Graph::from_edge_list("k4", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    auto ck = cycle_se(k4);
    CHECK(ck[0] == 6);  // edges
    CHECK(ck[1] == 4);  // triangles
    CHECK(ck[2] == 3);  // 4-cycles
    for (int i = 3; i < 7; ++i) CHECK(ck[i] == 0);

    auto tree = Graph::from_edge_list("t", 5, {{0, 1}, {0, 2}, {1, 3}, {1, 4}});
    CHECK(cycle_se(tree) == std::vector<double>{4, 0, 0, 0, 0, 0, 0});
}

TEST_CASE("cycle_se matches trace formulas on seeded ER graphs") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        auto g = gen_er("er", 6 + static_cast<int>(seed % 7), 0.35, seed);
        auto cy = cycle_se(g);
        CHECK(cy[1] == static_cast<double>(oracle::triangle_count_trace(g)));
        CHECK(cy[2] == static_cast<double>(oracle::square_count_trace(g)));
    }
}

TEST_CASE("normalize_targets") {
    TargetBundle b;
    b.node_targets = DenseMatrix(3, 3);
    double col0[3] = {0.5, 1.0, 0.5};
    for (int i = 0; i < 3; ++i) {
        b.node_targets.at(i, 0) = col0[i];
        b.node_targets.at(i, 1) = 7.0;  // constant
        b.node_targets.at(i, 2) = 0.0;  // already zero
    }
    b.graph_targets.assign(kGraphTargetDim, 0.0);
    auto nb = normalize_targets(b);
    CHECK(nb.node_targets.at(0, 0) == doctest::Approx(-1.0 / std::sqrt(2)).epsilon(1e-9));
    CHECK(nb.node_targets.at(1, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(nb.node_targets.at(2, 0) == doctest::Approx(-1.0 / std::sqrt(2)).epsilon(1e-9));
    for (int i = 0; i < 3; ++i) {
        CHECK(nb.node_targets.at(i, 1) == 0.0);
        CHECK(nb.node_targets.at(i, 2) == 0.0);
    }
    CHECK_THROWS_AS(normalize_targets(nb), std::invalid_argument);
}

TEST_CASE("compute_all_targets shapes, determinism, normalization") {
    auto b = compute_all_targets(k3());
    CHECK(b.node_targets.rows == 3);
    CHECK(b.node_targets.cols == kNodeTargetDim);
    CHECK(b.graph_targets.size() == kGraphTargetDim);
    CHECK(b.normalized);

    auto b2 = compute_all_targets(k3());
    CHECK(b.node_targets.data == b2.node_targets.data);
    CHECK(b.graph_targets == b2.graph_targets);

    // Normalized columns: |mean| <= 1e-9 and |std-1| <= 1e-9 unless all-zero.
    auto g = gen_er("er", 14, 0.3, 9);
    auto bg = compute_all_targets(g);
    for (int j = 0; j < bg.node_targets.cols; ++j) {
        double mean = 0.0;
        for (int i = 0; i < bg.node_targets.rows; ++i) mean += bg.node_targets.at(i, j);
        mean /= bg.node_targets.rows;
        double var = 0.0;
        bool all_zero = true;
        for (int i = 0; i < bg.node_targets.rows; ++i) {
            var += (bg.node_targets.at(i, j) - mean) * (bg.node_targets.at(i, j) - mean);
            all_zero &= (bg.node_targets.at(i, j) == 0.0);
        }
        if (all_zero) continue;
        CHECK(std::fabs(mean) <= 1e-9);
        CHECK(std::fabs(std::sqrt(var / bg.node_targets.rows) - 1.0) <= 1e-9);
    }

    // C6 vs 2xK3: graph-level targets differ.
    auto [tri, hex] = gen_wl_pair(WlPairKind::TriHex);
    auto bt = compute_all_targets(tri);
    auto bh = compute_all_targets(hex);
    CHECK(bt.graph_targets != bh.graph_targets);
}

TEST_CASE("raw RWSE entries stay in [0,1]") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto g = gen_er("er", 10, 0.25, seed);
        auto raw = compute_raw_targets(g);
        for (int i = 0; i < raw.node_targets.rows; ++i)
            for (int j = kRwseOffset; j < kRwseOffset + kRwseDim; ++j) {
                CHECK(raw.node_targets.at(i, j) >= 0.0);
                CHECK(raw.node_targets.at(i, j) <= 1.0);
            }
    }
}

TEST_CASE("permutation equivariance of node targets") {
    auto g = gen_er("er", 9, 0.35, 21);
    std::vector<int> perm{3, 7, 1, 0, 8, 2, 6, 4, 5};
    auto pg = g.permuted(perm, "perm");
    auto b = compute_all_targets(g);
    auto pb = compute_all_targets(pg);
    for (int v = 0; v < g.num_nodes(); ++v)
        for (int j = 0; j < kNodeTargetDim; ++j)
            CHECK(std::fabs(b.node_targets.at(v, j) - pb.node_targets.at(perm[v], j)) <= 1e-9);
    for (int j = 0; j < kGraphTargetDim; ++j)
        CHECK(std::fabs(b.graph_targets[j] - pb.graph_targets[j]) <= 1e-9);
}
