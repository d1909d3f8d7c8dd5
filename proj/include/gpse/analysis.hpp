#pragma once

#include <utility>
#include <vector>

#include "gpse/graph.hpp"
#include "gpse/model.hpp"

namespace gpse {

/// Balanced Forman curvature of one directed edge record, with the counts
/// that enter the formula:
///   Ric(i,j) = 2/d_i + 2/d_j - 2 + triangles * (2/d_max + 1/d_min)
///              + (gamma_max / d_max) * (squares_i + squares_j)
/// where triangles = |N(i) & N(j)|, squares_i counts neighbors of i on
/// chordless 4-cycles through (i,j), and gamma_max is the largest number of
/// those 4-cycles sharing one outer node.
struct CurvatureRecord {
    int i = 0, j = 0;
    int deg_i = 0, deg_j = 0;
    int triangles = 0;
    int squares_i = 0, squares_j = 0;
    int gamma_max = 0;
    double ric = 0.0;
};

/// Throws std::invalid_argument if (i, j) is not an edge of g.
CurvatureRecord balanced_forman_curvature(const Graph& g, int i, int j);

/// Curvature drop of an edge when a virtual node is attached, against the
/// closed-form bound 1/((d-delta)^2 + d - delta) - 2 delta/(d^2 + d) with
/// d = max(deg_i, deg_j) and delta their difference. The bound is proved on
/// graphs whose edges lie on no 4-cycles; quad_free reports whether this
/// edge qualifies.
struct Prop1Result {
    double ric = 0.0;
    double ric_vn = 0.0;
    double lhs = 0.0;    // ric - ric_vn
    double bound = 0.0;
    bool holds = false;  // lhs <= bound + 1e-12
    bool quad_free = false;
};

Prop1Result prop1_check(const Graph& g, int i, int j);

/// Sum over edges of the l1 distance between endpoint state rows.
double smoothness_metric(const DenseMatrix& states, const Graph& g);

/// l1 norm of the Jacobian block d h_target^(layers) / d x_source, computed
/// by reverse accumulation, one backward pass per output coordinate.
/// layers = 0 probes the projection only.
double influence_probe(const GPSEModel& model, const Graph& g, int source, int target, int layers,
                       uint64_t seed);

/// Stable 1-WL coloring. Colors are dictionary ids from canonical
/// (color, sorted neighbor colors) signatures, so equal signatures always
/// map to equal ids and no false merges can occur.
struct WLColoring {
    std::vector<int> colors;
    int rounds = 0;
    /// Sorted (color, count) pairs of the stable coloring.
    std::vector<std::pair<int, int>> histogram;
};

WLColoring wl_refine(const Graph& g, int max_rounds = -1);

struct WlPairResult {
    bool distinguished = false;
    int rounds = 0;
};

/// Refines both graphs against a shared color dictionary and compares the
/// stable histograms.
WlPairResult wl_distinguish(const Graph& a, const Graph& b);

/// Encodes two graphs `draws` times with random features and once with
/// all-ones features, mean-pools the node states, and reports the embedding
/// geometry: centroid distance across classes vs the largest within-class
/// spread.
struct SeparationReport {
    double ones_distance = 0.0;           // deterministic all-ones feature mode
    double cross_centroid_distance = 0.0; // random-feature centroids
    double max_intra_distance = 0.0;      // worst draw-to-own-centroid distance
    bool separated = false;               // cross > max_intra
};

SeparationReport separation_experiment(const GPSEModel& model, const Graph& a, const Graph& b,
                                       int draws = 20, uint64_t seed = 0);

}  // namespace gpse
