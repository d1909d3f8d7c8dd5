// Independent oracles used by the unit and acceptance suites. These
// deliberately avoid the code paths they check: walk enumeration is pure
// recursion, the heat-kernel oracle uses a truncated matrix-exponential
// series with a BFS-based kernel projector, and the cycle-count cross-check
// uses adjacency-power traces.
#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "gpse/graph.hpp"
#include "gpse/matrix.hpp"

namespace gpse::oracle {

// k-step return probability of node `start` by exhaustive walk enumeration.
inline double walk_return_probability(const Graph& g, int start, int k) {
    struct Rec {
        const Graph& g;
        int start;
        double run(int v, int steps_left, double prob) {
            if (steps_left == 0) return v == start ? prob : 0.0;
            const auto& nb = g.neighbors(v);
            if (nb.empty()) return 0.0;
            double total = 0.0;
            const double w = prob / static_cast<double>(nb.size());
            for (int u : nb) total += run(u, steps_left - 1, w);
            return total;
        }
    };
    return Rec{g, start}.run(start, k, 1.0);
}

// Connected component sizes, for the Laplacian kernel projector diagonal.
inline std::vector<int> component_sizes_per_node(const Graph& g) {
    const int n = g.num_nodes();
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        comp[s] = ncomp;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int u : g.neighbors(v))
                if (comp[u] < 0) {
                    comp[u] = ncomp;
                    q.push(u);
                }
        }
        ++ncomp;
    }
    std::vector<int> size(ncomp, 0);
    for (int v = 0; v < n; ++v) ++size[comp[v]];
    std::vector<int> out(n);
    for (int v = 0; v < n; ++v) out[v] = size[comp[v]];
    return out;
}

// diag(exp(-kL)) restricted to the non-trivial eigenspace, via the series
// sum_{j<=terms} (-kL)^j / j! minus the kernel projector. For a simple
// graph the kernel of L is spanned by per-component indicators, so the
// projector diagonal at v is 1/|component(v)|.
inline std::vector<double> heat_kernel_diag_series(const Graph& g, int k, int terms = 50) {
    const int n = g.num_nodes();
    DenseMatrix l = g.laplacian();
    for (auto& x : l.data) x *= -static_cast<double>(k);
    // Scaling and squaring keeps the truncated series accurate for any k:
    // run the series on L / 2^s with ||L/2^s||_inf <= 0.5, then square s times.
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::fabs(l.at(i, j));
        norm = std::max(norm, row);
    }
    int s = 0;
    while (norm > 0.5) {
        norm /= 2.0;
        ++s;
    }
    for (auto& x : l.data) x /= static_cast<double>(1LL << s);
    DenseMatrix acc = DenseMatrix::identity(n);
    DenseMatrix term = DenseMatrix::identity(n);
    for (int j = 1; j <= terms; ++j) {
        term = matmul(term, l);
        const double inv = 1.0 / static_cast<double>(j);
        for (auto& x : term.data) x *= inv;
        for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += term.data[i];
    }
    for (int i = 0; i < s; ++i) acc = matmul(acc, acc);
    auto comp = component_sizes_per_node(g);
    std::vector<double> diag(n);
    for (int v = 0; v < n; ++v) diag[v] = acc.at(v, v) - 1.0 / comp[v];
    return diag;
}

// Triangle count from tr(A^3)/6.
inline long long triangle_count_trace(const Graph& g) {
    DenseMatrix a3 = matpow(g.adjacency(), 3);
    double tr = 0.0;
    for (int i = 0; i < a3.rows; ++i) tr += a3.at(i, i);
    return std::llround(tr / 6.0);
}

// 4-cycle count from (tr(A^4) - 2m - 2*sum_i d_i(d_i-1)) / 8.
inline long long square_count_trace(const Graph& g) {
    DenseMatrix a4 = matpow(g.adjacency(), 4);
    double tr = 0.0;
    for (int i = 0; i < a4.rows; ++i) tr += a4.at(i, i);
    double deg_term = 0.0;
    for (int d : g.degree_vector()) deg_term += static_cast<double>(d) * (d - 1);
    return std::llround((tr - 2.0 * g.num_edges() - 2.0 * deg_term) / 8.0);
}

}  // namespace gpse::oracle
