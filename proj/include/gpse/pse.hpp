#pragma once

#include <string>
#include <vector>

#include "gpse/graph.hpp"
#include "gpse/matrix.hpp"

namespace gpse {

// Column layout of the supervision bundle.
inline constexpr int kLapPeDim = 4;
inline constexpr int kElstaticDim = 7;
inline constexpr int kRwseDim = 20;
inline constexpr int kHkDim = 20;
inline constexpr int kNodeTargetDim = kLapPeDim + kElstaticDim + kRwseDim + kHkDim;  // 51
inline constexpr int kEigValDim = 4;
inline constexpr int kCycleDim = 7;  // cycle lengths 2..8
inline constexpr int kGraphTargetDim = kEigValDim + kCycleDim;  // 11

inline constexpr int kLapPeOffset = 0;
inline constexpr int kElstaticOffset = kLapPeDim;
inline constexpr int kRwseOffset = kElstaticOffset + kElstaticDim;
inline constexpr int kHkOffset = kRwseOffset + kRwseDim;
inline constexpr int kEigValOffset = 0;
inline constexpr int kCycleOffset = kEigValDim;

/// Per-graph supervision: 51 node-level values per node plus 11 graph-level
/// values. Node columns are z-scored per graph by normalize_targets;
/// graph-level values stay raw here and are z-scored corpus-wide at
/// training time.
struct TargetBundle {
    DenseMatrix node_targets;           // n x 51
    std::vector<double> graph_targets;  // 11
    bool normalized = false;
};

std::vector<std::string> node_target_column_names();
std::vector<std::string> graph_target_column_names();

/// Absolute values of the l2-normalized eigenvectors for the first `dims`
/// non-trivial Laplacian eigenpairs; zero-padded when fewer exist.
DenseMatrix lap_pe(const Graph& g, int dims = kLapPeDim);

/// Smallest `dims` non-trivial Laplacian eigenvalues, ascending, zero-padded.
std::vector<double> eigval_se(const Graph& g, int dims = kEigValDim);

/// Seven aggregations of the diagonal-grounded Laplacian pseudoinverse
/// Q[j][i] = Lpinv[j][i] - Lpinv[i][i], per node i:
///   min / mean / std of Q[:,i], min / std of Q[i,:],
///   mean of (M Q)[:,i], mean of (M Q)[i,:].
DenseMatrix elstatic_pe(const Graph& g);

/// Column k (1-based step count) = diag(P^k) for k = 1..kmax.
DenseMatrix rwse(const Graph& g, int kmax = kRwseDim);

/// Heat kernel diagonal over the non-trivial eigenspace:
/// entry (v,k) = sum over lambda > tol of exp(-k lambda) * u[v]^2.
DenseMatrix hk_diag_se(const Graph& g, int kmax = kHkDim);

/// Number of simple k-cycles as subgraphs for k = 2..8; the k=2 entry is
/// the edge count m.
std::vector<double> cycle_se(const Graph& g, int kmin = 2, int kmax = 8);

/// Z-scores each node-level column per graph with population std; columns
/// with std below 1e-12 become all-zero. Throws on double normalization.
TargetBundle normalize_targets(TargetBundle bundle);

/// All six families at default dims, node columns normalized.
TargetBundle compute_all_targets(const Graph& g);

/// Raw bundle (no normalization), for export and testing.
TargetBundle compute_raw_targets(const Graph& g);

}  // namespace gpse
