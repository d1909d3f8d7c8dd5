#include "gpse/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace gpse {

Graph Graph::from_edge_list(std::string id, int n, const std::vector<std::pair<int, int>>& pairs) {
    if (n < 0) throw std::invalid_argument("from_edge_list: negative node count");
    std::set<std::pair<int, int>> canon;
    for (auto [u, v] : pairs) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("from_edge_list: edge (" + std::to_string(u) + "," +
                                        std::to_string(v) + ") out of range for n=" + std::to_string(n));
        if (u == v)
            throw std::invalid_argument("from_edge_list: self-loop (" + std::to_string(u) + "," +
                                        std::to_string(v) + ")");
        canon.emplace(std::min(u, v), std::max(u, v));
    }
    Graph g;
    g.id_ = std::move(id);
    g.n_ = n;
    g.edges_.assign(canon.begin(), canon.end());
    g.adj_.resize(n);
    for (auto [u, v] : g.edges_) {
        g.adj_[u].push_back(v);
        g.adj_[v].push_back(u);
    }
    for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
    return g;
}

bool Graph::has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(u, v));
}

std::vector<int> Graph::degree_vector() const {
    std::vector<int> deg(n_);
    for (int v = 0; v < n_; ++v) deg[v] = static_cast<int>(adj_[v].size());
    return deg;
}

DenseMatrix Graph::adjacency() const {
    DenseMatrix m(n_, n_);
    for (auto [u, v] : edges_) {
        m.at(u, v) = 1.0;
        m.at(v, u) = 1.0;
    }
    return m;
}

DenseMatrix Graph::laplacian() const {
    DenseMatrix l(n_, n_);
    for (auto [u, v] : edges_) {
        l.at(u, v) = -1.0;
        l.at(v, u) = -1.0;
        l.at(u, u) += 1.0;
        l.at(v, v) += 1.0;
    }
    return l;
}

DenseMatrix Graph::random_walk_matrix() const {
    DenseMatrix p(n_, n_);
    for (int i = 0; i < n_; ++i) {
        if (adj_[i].empty()) continue;
        const double w = 1.0 / static_cast<double>(adj_[i].size());
        for (int j : adj_[i]) p.at(i, j) = w;
    }
    return p;
}

Graph Graph::add_virtual_node() const {
    if (n_ < 1) throw std::invalid_argument("add_virtual_node: need at least one node");
    auto pairs = edges_;
    for (int v = 0; v < n_; ++v) pairs.emplace_back(v, n_);
    return from_edge_list(id_ + "+vn", n_ + 1, pairs);
}

Graph Graph::permuted(const std::vector<int>& perm, std::string new_id) const {
    if (static_cast<int>(perm.size()) != n_)
        throw std::invalid_argument("permuted: permutation size mismatch");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(edges_.size());
    for (auto [u, v] : edges_) pairs.emplace_back(perm[u], perm[v]);
    return from_edge_list(std::move(new_id), n_, pairs);
}

void GraphCorpus::assign_splits(double val_frac, double test_frac, uint64_t seed) {
    if (val_frac < 0 || test_frac < 0 || val_frac + test_frac > 1.0)
        throw std::invalid_argument("assign_splits: invalid fractions");
    const int n = static_cast<int>(graphs.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(rng() % static_cast<uint64_t>(i + 1));
        std::swap(order[i], order[j]);
    }
    const int n_val = static_cast<int>(val_frac * n);
    const int n_test = static_cast<int>(test_frac * n);
    splits.assign(n, Split::Train);
    for (int i = 0; i < n_val; ++i) splits[order[i]] = Split::Val;
    for (int i = n_val; i < n_val + n_test; ++i) splits[order[i]] = Split::Test;
}

std::vector<int> GraphCorpus::indices_of(Split s) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(graphs.size()); ++i)
        if (i < static_cast<int>(splits.size()) && splits[i] == s) out.push_back(i);
    return out;
}

Graph gen_er(std::string id, int n, double p, uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("gen_er: p outside [0,1]");
    std::mt19937_64 rng(seed);
    std::vector<std::pair<int, int>> pairs;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const double x = (rng() >> 11) * 0x1.0p-53;
            if (x < p) pairs.emplace_back(u, v);
        }
    return Graph::from_edge_list(std::move(id), n, pairs);
}

Graph gen_csl(std::string id, int n, int skip) {
    if (skip < 2 || skip > n - 2)
        throw std::invalid_argument("gen_csl: skip must satisfy 2 <= skip <= n-2");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        pairs.emplace_back(i, (i + 1) % n);
        pairs.emplace_back(i, (i + skip) % n);
    }
    return Graph::from_edge_list(std::move(id), n, pairs);
}

Graph gen_quadfree(std::string id, uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int kind = static_cast<int>(rng() % 3);
    if (kind == 0) {  // cycle of length >= 5
        const int n = 5 + static_cast<int>(rng() % 10);
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
        return Graph::from_edge_list(std::move(id), n, pairs);
    }
    // Random attachment tree (kind 1), optionally decorated with triangles
    // (kind 2). Triangles touch the tree in a single vertex each and use
    // fresh nodes, so no edge ever lies on a 4-cycle.
    const int tree_n = 5 + static_cast<int>(rng() % 12);
    std::vector<std::pair<int, int>> pairs;
    for (int v = 1; v < tree_n; ++v) pairs.emplace_back(static_cast<int>(rng() % v), v);
    int n = tree_n;
    if (kind == 2) {
        const int decorations = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < decorations; ++t) {
            const int u = static_cast<int>(rng() % tree_n);
            pairs.emplace_back(u, n);
            pairs.emplace_back(u, n + 1);
            pairs.emplace_back(n, n + 1);
            n += 2;
        }
    }
    return Graph::from_edge_list(std::move(id), n, pairs);
}

std::pair<Graph, Graph> gen_wl_pair(WlPairKind kind) {
    if (kind == WlPairKind::TriHex) {
        Graph two_triangles = Graph::from_edge_list(
            "two_triangles", 6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
        Graph hexagon = Graph::from_edge_list(
            "hexagon", 6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
        return {two_triangles, hexagon};
    }
    // Two hexagons sharing the edge (0,1) vs two pentagons joined by a bridge.
    Graph fused_hexagons = Graph::from_edge_list(
        "fused_hexagons", 10,
        {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {1, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 0}});
    Graph bridged_pentagons = Graph::from_edge_list(
        "bridged_pentagons", 10,
        {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 5}, {0, 5}});
    return {fused_hexagons, bridged_pentagons};
}

GraphCorpus gen_csl_benchmark(int n, const std::vector<int>& skips, int copies_per_class,
                              uint64_t seed) {
    GraphCorpus corpus;
    for (size_t c = 0; c < skips.size(); ++c) {
        Graph base = gen_csl("csl_s" + std::to_string(skips[c]) + "_0", n, skips[c]);
        corpus.graphs.push_back(base);
        for (int r = 1; r < copies_per_class; ++r) {
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::mt19937_64 rng(mix_seed(seed, c, static_cast<uint64_t>(r)));
            for (int i = n - 1; i > 0; --i) {
                int j = static_cast<int>(rng() % static_cast<uint64_t>(i + 1));
                std::swap(perm[i], perm[j]);
            }
            corpus.graphs.push_back(
                base.permuted(perm, "csl_s" + std::to_string(skips[c]) + "_" + std::to_string(r)));
        }
    }
    return corpus;
}

GraphCorpus corpus_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("corpus_read: cannot open " + path);
    GraphCorpus corpus;
    std::unordered_set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            std::string id = j.at("id").get<std::string>();
            int n = j.at("num_nodes").get<int>();
            std::vector<std::pair<int, int>> pairs;
            for (const auto& e : j.at("edges")) {
                if (!e.is_array() || e.size() != 2) throw std::runtime_error("edge is not a pair");
                pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
            if (!seen.insert(id).second)
                throw std::runtime_error("duplicate graph id '" + id + "'");
            corpus.graphs.push_back(Graph::from_edge_list(std::move(id), n, pairs));
        } catch (const std::exception& e) {
            throw std::runtime_error("corpus_read: " + path + " line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
    }
    return corpus;
}

void corpus_write(const GraphCorpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("corpus_write: cannot open " + path);
    for (const auto& g : corpus.graphs) {
        nlohmann::json edges = nlohmann::json::array();
        for (auto [u, v] : g.edges()) edges.push_back({u, v});
        nlohmann::json j;
        j["id"] = g.id();
        j["num_nodes"] = g.num_nodes();
        j["edges"] = edges;
        out << j.dump() << "\n";
    }
}

}  // namespace gpse
