#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gpse/matrix.hpp"

namespace gpse {

/// Immutable simple undirected unweighted graph. Edges are canonical
/// (u < v, lexicographic); adjacency lists are built once at construction.
class Graph {
public:
    /// Validates, canonicalizes and deduplicates the edge list.
    /// Throws std::invalid_argument on out-of-range indices or self-loops,
    /// naming the offending pair.
    static Graph from_edge_list(std::string id, int n, const std::vector<std::pair<int, int>>& pairs);

    const std::string& id() const { return id_; }
    int num_nodes() const { return n_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    bool has_edge(int u, int v) const;

    std::vector<int> degree_vector() const;
    DenseMatrix adjacency() const;
    DenseMatrix laplacian() const;

    /// Row-normalized adjacency. Zero-degree rows are all-zero, so the
    /// return probability of an isolated node is 0 for every k >= 1.
    DenseMatrix random_walk_matrix() const;

    /// New graph with node n connected to every original node.
    Graph add_virtual_node() const;

    /// Relabeled copy: node v becomes perm[v].
    Graph permuted(const std::vector<int>& perm, std::string new_id) const;

private:
    std::string id_;
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
};

enum class Split : uint8_t { Train = 0, Val = 1, Test = 2 };

struct GraphCorpus {
    std::vector<Graph> graphs;
    std::vector<Split> splits;  // empty until assign_splits

    /// Seeded shuffle split; fractions of val/test, remainder train.
    void assign_splits(double val_frac, double test_frac, uint64_t seed);
    std::vector<int> indices_of(Split s) const;
};

// --- generators ------------------------------------------------------------

/// Erdos-Renyi G(n, p); pure function of (n, p, seed).
Graph gen_er(std::string id, int n, double p, uint64_t seed);

/// Circular skip-link graph: ring edges (i, i+1 mod n) plus chords
/// (i, i+skip mod n). Requires 2 <= skip <= n-2.
Graph gen_csl(std::string id, int n, int skip);

/// Quadrilateral-free family member: a random tree, a cycle of length >= 5,
/// or a tree decorated with triangles, chosen by seed. No edge of any member
/// lies on a 4-cycle, which is the precondition of the virtual-node
/// curvature bound.
Graph gen_quadfree(std::string id, uint64_t seed);

enum class WlPairKind { HexPent, TriHex };

/// The two 1-WL-indistinguishable benchmark pairs: two fused hexagons vs
/// two bridged pentagons, and two triangles vs a hexagon.
std::pair<Graph, Graph> gen_wl_pair(WlPairKind kind);

/// Standard CSL benchmark: skips {2,3,4,5,6,9,11,12,13,16} on n=41 nodes,
/// 15 seeded node relabelings per class (150 graphs).
GraphCorpus gen_csl_benchmark(int n = 41, const std::vector<int>& skips = {2, 3, 4, 5, 6, 9, 11, 12, 13, 16},
                              int copies_per_class = 15, uint64_t seed = 0);

// --- corpus I/O ------------------------------------------------------------

/// JSON Lines, one graph per line:
/// {"id": "...", "num_nodes": n, "edges": [[u,v],...]}
/// Malformed lines and duplicate ids raise errors carrying the line number.
GraphCorpus corpus_read(const std::string& path);
void corpus_write(const GraphCorpus& corpus, const std::string& path);

}  // namespace gpse
