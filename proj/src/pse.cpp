#include "gpse/pse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpse {

std::vector<std::string> node_target_column_names() {
    std::vector<std::string> names;
    for (int i = 1; i <= kLapPeDim; ++i) names.push_back("LapPE_" + std::to_string(i));
    for (int i = 1; i <= kElstaticDim; ++i) names.push_back("ElstaticPE_" + std::to_string(i));
    for (int i = 1; i <= kRwseDim; ++i) names.push_back("RWSE_" + std::to_string(i));
    for (int i = 1; i <= kHkDim; ++i) names.push_back("HKdiagSE_" + std::to_string(i));
    return names;
}

std::vector<std::string> graph_target_column_names() {
    std::vector<std::string> names;
    for (int i = 1; i <= kEigValDim; ++i) names.push_back("EigValSE_" + std::to_string(i));
    for (int k = 2; k <= 8; ++k) names.push_back("CycleSE_" + std::to_string(k));
    return names;
}

DenseMatrix lap_pe(const Graph& g, int dims) {
    const int n = g.num_nodes();
    auto dec = sym_eig(g.laplacian());
    DenseMatrix out(n, dims);
    int col = 0;
    for (int e = 0; e < n && col < dims; ++e) {
        if (dec.values[e] <= kEigZeroTol) continue;
        double norm = 0.0;
        for (int v = 0; v < n; ++v) norm += dec.vectors.at(v, e) * dec.vectors.at(v, e);
        norm = std::sqrt(norm);
        for (int v = 0; v < n; ++v) out.at(v, col) = std::fabs(dec.vectors.at(v, e) / norm);
        ++col;
    }
    return out;
}

std::vector<double> eigval_se(const Graph& g, int dims) {
    auto dec = sym_eig(g.laplacian());
    std::vector<double> out(dims, 0.0);
    int col = 0;
    for (double lam : dec.values) {
        if (lam <= kEigZeroTol) continue;
        if (col >= dims) break;
        out[col++] = lam;
    }
    return out;
}

DenseMatrix elstatic_pe(const Graph& g) {
    const int n = g.num_nodes();
    auto dec = sym_eig(g.laplacian());
    DenseMatrix lp = pinv_from_eig(dec);
    // Ground each column at its diagonal: node's potential on itself is 0.
    DenseMatrix q(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) q.at(j, i) = lp.at(j, i) - lp.at(i, i);
    DenseMatrix mq = matmul(g.adjacency(), q);

    auto col_stats = [&](const DenseMatrix& m, int i, double& mn, double& mean, double& sd) {
        mn = m.at(0, i);
        mean = 0.0;
        for (int j = 0; j < n; ++j) {
            mn = std::min(mn, m.at(j, i));
            mean += m.at(j, i);
        }
        mean /= n;
        double var = 0.0;
        for (int j = 0; j < n; ++j) var += (m.at(j, i) - mean) * (m.at(j, i) - mean);
        sd = std::sqrt(var / n);
    };
    auto row_stats = [&](const DenseMatrix& m, int i, double& mn, double& mean, double& sd) {
        mn = m.at(i, 0);
        mean = 0.0;
        for (int j = 0; j < n; ++j) {
            mn = std::min(mn, m.at(i, j));
            mean += m.at(i, j);
        }
        mean /= n;
        double var = 0.0;
        for (int j = 0; j < n; ++j) var += (m.at(i, j) - mean) * (m.at(i, j) - mean);
        sd = std::sqrt(var / n);
    };

    DenseMatrix out(n, kElstaticDim);
    for (int i = 0; i < n; ++i) {
        double cmin, cmean, csd, rmin, rmean, rsd;
        col_stats(q, i, cmin, cmean, csd);
        row_stats(q, i, rmin, rmean, rsd);
        double mqc_min, mqc_mean, mqc_sd, mqr_min, mqr_mean, mqr_sd;
        col_stats(mq, i, mqc_min, mqc_mean, mqc_sd);
        row_stats(mq, i, mqr_min, mqr_mean, mqr_sd);
        out.at(i, 0) = cmin;
        out.at(i, 1) = cmean;
        out.at(i, 2) = csd;
        out.at(i, 3) = rmin;
        out.at(i, 4) = rsd;
        out.at(i, 5) = mqc_mean;
        out.at(i, 6) = mqr_mean;
    }
    return out;
}

DenseMatrix rwse(const Graph& g, int kmax) {
    const int n = g.num_nodes();
    DenseMatrix p = g.random_walk_matrix();
    DenseMatrix pk = DenseMatrix::identity(n);
    DenseMatrix out(n, kmax);
    for (int k = 1; k <= kmax; ++k) {
        pk = matmul(pk, p);
        for (int v = 0; v < n; ++v) out.at(v, k - 1) = pk.at(v, v);
    }
    return out;
}

DenseMatrix hk_diag_se(const Graph& g, int kmax) {
    const int n = g.num_nodes();
    auto dec = sym_eig(g.laplacian());
    DenseMatrix out(n, kmax);
    for (int e = 0; e < n; ++e) {
        if (dec.values[e] <= kEigZeroTol) continue;
        for (int k = 1; k <= kmax; ++k) {
            const double w = std::exp(-static_cast<double>(k) * dec.values[e]);
            for (int v = 0; v < n; ++v)
                out.at(v, k - 1) += w * dec.vectors.at(v, e) * dec.vectors.at(v, e);
        }
    }
    return out;
}

namespace {

// Counts simple cycles of each length by rooted DFS: every cycle is
// enumerated exactly twice (once per direction) from its minimum-labeled
// vertex, with all other vertices above the anchor.
void count_cycles_dfs(const Graph& g, int anchor, int v, int depth, int max_len,
                      std::vector<char>& visited, std::vector<long long>& counts) {
    for (int w : g.neighbors(v)) {
        if (w == anchor) {
            if (depth >= 3) counts[depth] += 1;
            continue;
        }
        if (w < anchor || visited[w] || depth >= max_len) continue;
        visited[w] = 1;
        count_cycles_dfs(g, anchor, w, depth + 1, max_len, visited, counts);
        visited[w] = 0;
    }
}

}  // namespace

std::vector<double> cycle_se(const Graph& g, int kmin, int kmax) {
    if (kmin < 2 || kmax < kmin) throw std::invalid_argument("cycle_se: invalid length range");
    const int n = g.num_nodes();
    std::vector<long long> counts(kmax + 1, 0);
    std::vector<char> visited(n, 0);
    for (int a = 0; a < n; ++a) {
        visited[a] = 1;
        count_cycles_dfs(g, a, a, 1, kmax, visited, counts);
        visited[a] = 0;
    }
    std::vector<double> out;
    for (int k = kmin; k <= kmax; ++k) {
        if (k == 2)
            out.push_back(static_cast<double>(g.num_edges()));
        else
            out.push_back(static_cast<double>(counts[k] / 2));
    }
    return out;
}

TargetBundle normalize_targets(TargetBundle bundle) {
    if (bundle.normalized) throw std::invalid_argument("normalize_targets: bundle already normalized");
    const int n = bundle.node_targets.rows;
    const int c = bundle.node_targets.cols;
    for (int j = 0; j < c; ++j) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += bundle.node_targets.at(i, j);
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = bundle.node_targets.at(i, j) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / n);
        if (sd < 1e-12) {
            for (int i = 0; i < n; ++i) bundle.node_targets.at(i, j) = 0.0;
        } else {
            for (int i = 0; i < n; ++i)
                bundle.node_targets.at(i, j) = (bundle.node_targets.at(i, j) - mean) / sd;
        }
    }
    bundle.normalized = true;
    return bundle;
}

TargetBundle compute_raw_targets(const Graph& g) {
    const int n = g.num_nodes();
    TargetBundle b;
    b.node_targets = DenseMatrix(n, kNodeTargetDim);
    auto copy_block = [&](const DenseMatrix& m, int offset) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m.cols; ++j) b.node_targets.at(i, offset + j) = m.at(i, j);
    };
    copy_block(lap_pe(g), kLapPeOffset);
    copy_block(elstatic_pe(g), kElstaticOffset);
    copy_block(rwse(g), kRwseOffset);
    copy_block(hk_diag_se(g), kHkOffset);

    b.graph_targets.resize(kGraphTargetDim);
    auto ev = eigval_se(g);
    auto cy = cycle_se(g);
    for (int i = 0; i < kEigValDim; ++i) b.graph_targets[kEigValOffset + i] = ev[i];
    for (int i = 0; i < kCycleDim; ++i) b.graph_targets[kCycleOffset + i] = cy[i];
    return b;
}

TargetBundle compute_all_targets(const Graph& g) { return normalize_targets(compute_raw_targets(g)); }

}  // namespace gpse
