#include "gpse/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gpse {

CurvatureRecord balanced_forman_curvature(const Graph& g, int i, int j) {
    if (!g.has_edge(i, j))
        throw std::invalid_argument("balanced_forman_curvature: (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") is not an edge");
    CurvatureRecord rec;
    rec.i = i;
    rec.j = j;
    const auto deg = g.degree_vector();
    rec.deg_i = deg[i];
    rec.deg_j = deg[j];
    for (int k : g.neighbors(i))
        if (k != j && g.has_edge(k, j)) ++rec.triangles;

    // Chordless 4-cycles i - k - w - j - i: k a neighbor of i not adjacent
    // to j, w a neighbor of j not adjacent to i, k adjacent to w.
    std::vector<int> ks, ws;
    std::map<int, int> per_node;  // outer node -> number of squares through it
    for (int k : g.neighbors(i)) {
        if (k == j || g.has_edge(k, j)) continue;
        for (int w : g.neighbors(j)) {
            if (w == i || w == k || g.has_edge(w, i)) continue;
            if (!g.has_edge(k, w)) continue;
            ks.push_back(k);
            ws.push_back(w);
            ++per_node[k];
            ++per_node[w];
        }
    }
    std::sort(ks.begin(), ks.end());
    std::sort(ws.begin(), ws.end());
    rec.squares_i = static_cast<int>(std::unique(ks.begin(), ks.end()) - ks.begin());
    rec.squares_j = static_cast<int>(std::unique(ws.begin(), ws.end()) - ws.begin());
    for (const auto& [node, count] : per_node) rec.gamma_max = std::max(rec.gamma_max, count);

    const double dmax = std::max(rec.deg_i, rec.deg_j);
    const double dmin = std::min(rec.deg_i, rec.deg_j);
    rec.ric = 2.0 / rec.deg_i + 2.0 / rec.deg_j - 2.0 +
              rec.triangles * (2.0 / dmax + 1.0 / dmin) +
              (rec.gamma_max / dmax) * (rec.squares_i + rec.squares_j);
    return rec;
}

Prop1Result prop1_check(const Graph& g, int i, int j) {
    CurvatureRecord before = balanced_forman_curvature(g, i, j);
    CurvatureRecord after = balanced_forman_curvature(g.add_virtual_node(), i, j);
    Prop1Result r;
    r.ric = before.ric;
    r.ric_vn = after.ric;
    r.lhs = before.ric - after.ric;
    const int d = std::max(before.deg_i, before.deg_j);
    const int delta = d - std::min(before.deg_i, before.deg_j);
    const double dd = static_cast<double>(d) - delta;
    r.bound = 1.0 / (dd * dd + dd) - 2.0 * delta / (static_cast<double>(d) * d + d);
    r.holds = r.lhs <= r.bound + 1e-12;
    r.quad_free = before.squares_i == 0 && before.squares_j == 0;
    return r;
}

double smoothness_metric(const DenseMatrix& states, const Graph& g) {
    if (states.rows != g.num_nodes())
        throw std::invalid_argument("smoothness_metric: state row count mismatch");
    double total = 0.0;
    for (const auto& [u, v] : g.edges())
        for (int c = 0; c < states.cols; ++c) total += std::fabs(states.at(u, c) - states.at(v, c));
    return total;
}

double influence_probe(const GPSEModel& model, const Graph& g, int source, int target, int layers,
                       uint64_t seed) {
    if (layers < 0 || layers > model.cfg.num_layers)
        throw std::invalid_argument("influence_probe: layer out of range");
    if (source < 0 || source >= g.num_nodes() || target < 0 || target >= g.num_nodes())
        throw std::invalid_argument("influence_probe: node out of range");
    Batch b = make_batch({&g});
    const int d = model.cfg.hidden_dim;
    DenseMatrix feats = gaussian_matrix(g.num_nodes(), model.cfg.rand_feat_dim, seed);
    Tensor x = Tensor::leaf(feats.rows, feats.cols, feats.data);
    Tensor h = model.proj.apply(x);
    Tensor e = Tensor::zeros(static_cast<int>(b.edge_src.size()), d);
    Tensor v = Tensor::zeros(1, d);
    for (int l = 0; l < layers; ++l) {
        switch (model.cfg.conv) {
            case ConvKind::GatedGcn: {
                auto [hn, en] = model.gated_layers[l].apply(h, e, b);
                h = hn;
                e = en;
                break;
            }
            case ConvKind::Gin: h = model.gin_layers[l].apply(h, b); break;
            case ConvKind::Gcn: h = model.gcn_layers[l].apply(h, b); break;
        }
        if (model.cfg.virtual_node) {
            auto [hb, vn] = model.vn_layers[l].apply(h, v, b);
            h = hb;
            v = vn;
        }
    }
    Tensor row = gather_rows(h, {target});
    double total = 0.0;
    for (int c = 0; c < d; ++c) {
        std::vector<double> mask(d, 0.0);
        mask[c] = 1.0;
        backward(sum_all(mul(row, Tensor::constant(1, d, mask))));
        const auto& grad = x.grad();
        for (int t = 0; t < feats.cols; ++t)
            total += std::fabs(grad[static_cast<size_t>(source) * feats.cols + t]);
    }
    return total;
}

// --- 1-WL -----------------------------------------------------------------

namespace {

using Signature = std::vector<int>;  // own color, then sorted neighbor colors

// One refinement round over possibly several graphs sharing a dictionary.
// Returns the total number of distinct colors afterwards.
int refine_round(const std::vector<const Graph*>& graphs, std::vector<std::vector<int>>& colors) {
    std::map<Signature, int> dict;
    std::vector<std::vector<int>> next(colors.size());
    for (size_t gi = 0; gi < graphs.size(); ++gi) {
        const Graph& g = *graphs[gi];
        next[gi].resize(g.num_nodes());
        for (int v = 0; v < g.num_nodes(); ++v) {
            Signature sig;
            sig.push_back(colors[gi][v]);
            for (int u : g.neighbors(v)) sig.push_back(colors[gi][u]);
            std::sort(sig.begin() + 1, sig.end());
            auto [it, inserted] = dict.emplace(std::move(sig), static_cast<int>(dict.size()));
            next[gi][v] = it->second;
        }
    }
    colors = std::move(next);
    return static_cast<int>(dict.size());
}

int count_colors(const std::vector<std::vector<int>>& colors) {
    std::vector<int> all;
    for (const auto& c : colors) all.insert(all.end(), c.begin(), c.end());
    std::sort(all.begin(), all.end());
    return static_cast<int>(std::unique(all.begin(), all.end()) - all.begin());
}

std::vector<std::pair<int, int>> color_histogram(const std::vector<int>& colors) {
    std::map<int, int> counts;
    for (int c : colors) ++counts[c];
    return {counts.begin(), counts.end()};
}

}  // namespace

WLColoring wl_refine(const Graph& g, int max_rounds) {
    if (max_rounds < 0) max_rounds = std::max(1, g.num_nodes());
    std::vector<std::vector<int>> colors{std::vector<int>(g.num_nodes(), 0)};
    WLColoring out;
    int classes = g.num_nodes() > 0 ? 1 : 0;
    for (int r = 0; r < max_rounds; ++r) {
        const int next_classes = refine_round({&g}, colors);
        ++out.rounds;
        if (next_classes == classes) break;  // refinement only splits: fixed point
        classes = next_classes;
    }
    out.colors = colors[0];
    out.histogram = color_histogram(out.colors);
    return out;
}

WlPairResult wl_distinguish(const Graph& a, const Graph& b) {
    std::vector<std::vector<int>> colors{std::vector<int>(a.num_nodes(), 0),
                                         std::vector<int>(b.num_nodes(), 0)};
    const int max_rounds = std::max(1, a.num_nodes() + b.num_nodes());
    WlPairResult out;
    int classes = count_colors(colors);
    for (int r = 0; r < max_rounds; ++r) {
        const int next_classes = refine_round({&a, &b}, colors);
        ++out.rounds;
        if (color_histogram(colors[0]) != color_histogram(colors[1])) {
            out.distinguished = true;
            return out;
        }
        if (next_classes == classes) break;
        classes = next_classes;
    }
    return out;
}

// --- separation -----------------------------------------------------------

namespace {

std::vector<double> pooled_encoding(const GPSEModel& model, const Graph& g,
                                    const DenseMatrix& feats) {
    Batch b = make_batch({&g});
    auto fwd = forward_batch(model, b, feats);
    std::vector<double> mean(model.cfg.hidden_dim, 0.0);
    for (int i = 0; i < g.num_nodes(); ++i)
        for (int c = 0; c < model.cfg.hidden_dim; ++c) mean[c] += fwd.node_states.value_at(i, c);
    for (auto& x : mean) x /= std::max(1, g.num_nodes());
    return mean;
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

SeparationReport separation_experiment(const GPSEModel& model, const Graph& a, const Graph& b,
                                       int draws, uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("separation_experiment: draws must be >= 1");
    const Graph* graphs[2] = {&a, &b};
    SeparationReport rep;

    // Deterministic all-ones feature mode (the zero-variance draw).
    std::vector<std::vector<double>> ones_emb(2);
    for (int cls = 0; cls < 2; ++cls) {
        DenseMatrix ones(graphs[cls]->num_nodes(), model.cfg.rand_feat_dim);
        std::fill(ones.data.begin(), ones.data.end(), 1.0);
        ones_emb[cls] = pooled_encoding(model, *graphs[cls], ones);
    }
    rep.ones_distance = l2_dist(ones_emb[0], ones_emb[1]);

    // Random-feature draws.
    std::vector<std::vector<std::vector<double>>> emb(2);
    std::vector<std::vector<double>> centroid(2, std::vector<double>(model.cfg.hidden_dim, 0.0));
    for (int cls = 0; cls < 2; ++cls) {
        for (int t = 0; t < draws; ++t) {
            DenseMatrix feats = gaussian_matrix(graphs[cls]->num_nodes(), model.cfg.rand_feat_dim,
                                                mix_seed(seed, 40 + cls, t));
            emb[cls].push_back(pooled_encoding(model, *graphs[cls], feats));
            for (int c = 0; c < model.cfg.hidden_dim; ++c) centroid[cls][c] += emb[cls].back()[c];
        }
        for (auto& x : centroid[cls]) x /= draws;
        for (const auto& e : emb[cls])
            rep.max_intra_distance = std::max(rep.max_intra_distance, l2_dist(e, centroid[cls]));
    }
    rep.cross_centroid_distance = l2_dist(centroid[0], centroid[1]);
    rep.separated = rep.cross_centroid_distance > rep.max_intra_distance;
    return rep;
}

}  // namespace gpse
