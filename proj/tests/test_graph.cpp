#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "gpse/graph.hpp"

using namespace gpse;

TEST_CASE("from_edge_list canonicalizes and validates") {
    auto g = Graph::from_edge_list("p3", 3, {{0, 1}, {1, 0}, {1, 2}});
    CHECK(g.num_edges() == 2);
    CHECK(g.edges() == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});

    auto k3 = Graph::from_edge_list("k3", 3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(k3.num_edges() == 3);

    CHECK_THROWS_AS(Graph::from_edge_list("bad", 2, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Graph::from_edge_list("bad", 3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("degree vector") {
    auto p3 = Graph::from_edge_list("p3", 3, {{0, 1}, {1, 2}});
    CHECK(p3.degree_vector() == std::vector<int>{1, 2, 1});
    auto k3 = Graph::from_edge_list("k3", 3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(k3.degree_vector() == std::vector<int>{2, 2, 2});
    auto e2 = Graph::from_edge_list("e2", 2, {});
    CHECK(e2.degree_vector() == std::vector<int>{0, 0});
}

TEST_CASE("laplacian structure") {
    auto p3 = Graph::from_edge_list("p3", 3, {{0, 1}, {1, 2}});
    auto l = p3.laplacian();
    const double expect[3][3] = {{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(l.at(i, j) == doctest::Approx(expect[i][j]));

    auto k3 = Graph::from_edge_list("k3", 3, {{0, 1}, {1, 2}, {0, 2}});
    auto lk = k3.laplacian();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(lk.at(i, j) == doctest::Approx(i == j ? 2.0 : -1.0));

    // Row sums exactly zero and symmetric, on a batch of random graphs.
    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto g = gen_er("er", 12, 0.3, seed);
        auto lg = g.laplacian();
        for (int i = 0; i < 12; ++i) {
            double s = 0.0;
            for (int j = 0; j < 12; ++j) {
                s += lg.at(i, j);
                CHECK(lg.at(i, j) == lg.at(j, i));
            }
            CHECK(s == 0.0);
        }
    }
}

TEST_CASE("random walk matrix with zero-degree convention") {
    auto p3 = Graph::from_edge_list("p3", 3, {{0, 1}, {1, 2}});
    auto p = p3.random_walk_matrix();
    CHECK(p.at(0, 1) == 1.0);
    CHECK(p.at(1, 0) == 0.5);
    CHECK(p.at(1, 2) == 0.5);
    CHECK(p.at(2, 1) == 1.0);

    auto k1 = Graph::from_edge_list("k1", 1, {});
    CHECK(k1.random_walk_matrix().at(0, 0) == 0.0);
}

TEST_CASE("add_virtual_node") {
    auto p3 = Graph::from_edge_list("p3", 3, {{0, 1}, {1, 2}});
    auto g = p3.add_virtual_node();
    CHECK(g.num_nodes() == 4);
    CHECK(g.edges() == std::vector<std::pair<int, int>>{{0, 1}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});

    auto k3 = Graph::from_edge_list("k3", 3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(k3.add_virtual_node().num_edges() == 6);  // K4

    auto k1 = Graph::from_edge_list("k1", 1, {});
    auto p2 = k1.add_virtual_node();
    CHECK(p2.num_nodes() == 2);
    CHECK(p2.num_edges() == 1);

    // Diameter <= 2: every pair is adjacent or shares the virtual node.
    auto er = gen_er("er", 15, 0.1, 3);
    auto vn = er.add_virtual_node();
    for (int u = 0; u < 15; ++u) CHECK(vn.has_edge(u, 15));
}

TEST_CASE("gen_er determinism and extremes") {
    CHECK(gen_er("a", 5, 0.0, 1).num_edges() == 0);
    CHECK(gen_er("a", 5, 1.0, 1).num_edges() == 10);
    auto g1 = gen_er("a", 20, 0.1, 7);
    auto g2 = gen_er("b", 20, 0.1, 7);
    CHECK(g1.edges() == g2.edges());
    auto g3 = gen_er("c", 20, 0.1, 8);
    CHECK(g1.edges() != g3.edges());
}

TEST_CASE("gen_csl") {
    auto g = gen_csl("csl", 41, 2);
    CHECK(g.num_nodes() == 41);
    CHECK(g.num_edges() == 82);
    for (int d : g.degree_vector()) CHECK(d == 4);

    auto h = gen_csl("csl6", 6, 2);
    CHECK(h.num_edges() == 12);
    for (int d : h.degree_vector()) CHECK(d == 4);

    CHECK_THROWS_AS(gen_csl("bad", 6, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_csl("bad", 6, 5), std::invalid_argument);
}

TEST_CASE("gen_wl_pair shapes and degree multisets") {
    auto [t1, t2] = gen_wl_pair(WlPairKind::TriHex);
    CHECK(t1.num_nodes() == 6);
    CHECK(t2.num_nodes() == 6);
    CHECK(t1.num_edges() == 6);
    CHECK(t2.num_edges() == 6);
    for (int d : t1.degree_vector()) CHECK(d == 2);
    for (int d : t2.degree_vector()) CHECK(d == 2);

    auto [h1, h2] = gen_wl_pair(WlPairKind::HexPent);
    CHECK(h1.num_nodes() == 10);
    CHECK(h2.num_nodes() == 10);
    CHECK(h1.num_edges() == 11);
    CHECK(h2.num_edges() == 11);
    for (const auto& g : {h1, h2}) {
        std::multiset<int> degs;
        for (int d : g.degree_vector()) degs.insert(d);
        CHECK(degs == std::multiset<int>{2, 2, 2, 2, 2, 2, 2, 2, 3, 3});
    }
}

TEST_CASE("corpus round trip and error reporting") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "gpse_test_corpus";
    fs::create_directories(dir);
    auto path = (dir / "c.jsonl").string();

    GraphCorpus c;
    c.graphs.push_back(Graph::from_edge_list("g0", 3, {{0, 1}, {1, 2}}));
    c.graphs.push_back(gen_er("g1", 10, 0.3, 5));
    corpus_write(c, path);
    auto back = corpus_read(path);
    REQUIRE(back.graphs.size() == 2);
    CHECK(back.graphs[0].id() == "g0");
    CHECK(back.graphs[0].edges() == c.graphs[0].edges());
    CHECK(back.graphs[1].edges() == c.graphs[1].edges());

    // Round trip identity on canonical form: write(read(file)) == file.
    auto path2 = (dir / "c2.jsonl").string();
    corpus_write(back, path2);
    std::ifstream f1(path), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);

    {
        std::ofstream out(path);
        out << "";
    }
    CHECK(corpus_read(path).graphs.empty());

    {
        std::ofstream out(path);
        out << R"({"id":"g0","num_nodes":3,"edges":[[0,3]]})" << "\n";
    }
    CHECK_THROWS_WITH_AS(corpus_read(path), doctest::Contains("line 1"), std::runtime_error);

    {
        std::ofstream out(path);
        out << R"({"id":"g0","num_nodes":2,"edges":[]})" << "\n";
        out << R"({"id":"g0","num_nodes":2,"edges":[]})" << "\n";
    }
    CHECK_THROWS_WITH_AS(corpus_read(path), doctest::Contains("duplicate"), std::runtime_error);
}

TEST_CASE("csl benchmark corpus") {
    auto corpus = gen_csl_benchmark();
    CHECK(corpus.graphs.size() == 150);
    std::set<std::string> ids;
    for (const auto& g : corpus.graphs) {
        CHECK(g.num_nodes() == 41);
        CHECK(g.num_edges() == 82);
        ids.insert(g.id());
    }
    CHECK(ids.size() == 150);
}

TEST_CASE("split assignment") {
    GraphCorpus c;
    for (int i = 0; i < 100; ++i) c.graphs.push_back(gen_er("g" + std::to_string(i), 8, 0.3, i));
    c.assign_splits(0.05, 0.05, 42);
    CHECK(c.indices_of(Split::Val).size() == 5);
    CHECK(c.indices_of(Split::Test).size() == 5);
    CHECK(c.indices_of(Split::Train).size() == 90);
}
