#include "gpse/layers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gpse {

Tensor ParamStore::create(const std::string& name, int rows, int cols, std::vector<double> init) {
    if (find(name)) throw std::invalid_argument("ParamStore: duplicate parameter name '" + name + "'");
    auto p = std::make_shared<Param>();
    p->name = name;
    p->value = Tensor::leaf(rows, cols, std::move(init));
    params_.push_back(p);
    return p->value;
}

std::shared_ptr<Param> ParamStore::find(const std::string& name) const {
    for (const auto& p : params_)
        if (p->name == name) return p;
    return nullptr;
}

size_t ParamStore::total_size() const {
    size_t n = 0;
    for (const auto& p : params_) n += p->value.values().size();
    return n;
}

Tensor Mlp::apply(const Tensor& x) const {
    if (layers.empty()) throw std::invalid_argument("Mlp: no layers");
    Tensor out = x;
    for (size_t i = 0; i < layers.size(); ++i) {
        out = layers[i].apply(out);
        if (i + 1 < layers.size()) out = relu(out);
    }
    return out;
}

Batch make_batch(const std::vector<const Graph*>& graphs) {
    Batch b;
    b.num_graphs = static_cast<int>(graphs.size());
    for (int g = 0; g < b.num_graphs; ++g) {
        const Graph& graph = *graphs[g];
        const int base = b.num_nodes;
        for (int v = 0; v < graph.num_nodes(); ++v) b.node2graph.push_back(g);
        for (const auto& [u, v] : graph.edges()) {
            b.edge_src.push_back(base + u);
            b.edge_dst.push_back(base + v);
            b.edge_src.push_back(base + v);
            b.edge_dst.push_back(base + u);
        }
        b.num_nodes += graph.num_nodes();
    }
    return b;
}

std::pair<Tensor, Tensor> GatedGcnLayer::apply(const Tensor& h, const Tensor& e,
                                               const Batch& b) const {
    if (h.cols() != w1.rows()) throw std::invalid_argument("GatedGcnLayer: width mismatch");
    if (e.rows() != static_cast<int>(b.edge_src.size()) || e.cols() != h.cols())
        throw std::invalid_argument("GatedGcnLayer: edge-state shape mismatch");
    Tensor hs = gather_rows(h, b.edge_src);
    Tensor hd = gather_rows(h, b.edge_dst);
    Tensor pre = add(add(matmul(hd, w3), matmul(hs, w4)), matmul(e, w5));
    Tensor ehat = add(e, relu(norm_e.apply(pre)));
    Tensor gate = sigmoid(ehat);
    Tensor denom = gather_rows(scatter_add_rows(gate, b.edge_dst, b.num_nodes), b.edge_dst);
    Tensor eta = div_eps(gate, denom, kGateEps);
    Tensor agg = scatter_add_rows(mul(eta, matmul(hs, w2)), b.edge_dst, b.num_nodes);
    Tensor hn = add(h, relu(norm_h.apply(add(matmul(h, w1), agg))));
    return {hn, ehat};
}

Tensor GinLayer::apply(const Tensor& h, const Batch& b) const {
    Tensor agg = scatter_add_rows(gather_rows(h, b.edge_src), b.edge_dst, b.num_nodes);
    return mlp.apply(add(h, agg));
}

Tensor GcnLayer::apply(const Tensor& h, const Batch& b) const {
    std::vector<int> deg(b.num_nodes, 0);
    for (int d : b.edge_dst) ++deg[d];
    std::vector<double> edge_coef(b.edge_src.size());
    for (size_t k = 0; k < b.edge_src.size(); ++k)
        edge_coef[k] =
            1.0 / std::sqrt(static_cast<double>(deg[b.edge_src[k]] + 1) * (deg[b.edge_dst[k]] + 1));
    std::vector<double> self_coef(b.num_nodes);
    for (int i = 0; i < b.num_nodes; ++i) self_coef[i] = 1.0 / (deg[i] + 1);
    Tensor hw = lin.apply(h);
    Tensor agg = add(scatter_add_rows(row_scale(gather_rows(hw, b.edge_src), std::move(edge_coef)),
                                      b.edge_dst, b.num_nodes),
                     row_scale(hw, std::move(self_coef)));
    return relu(agg);
}

std::pair<Tensor, Tensor> VirtualNodeLayer::apply(const Tensor& h, const Tensor& v,
                                                  const Batch& b) const {
    if (v.rows() != b.num_graphs || v.cols() != h.cols())
        throw std::invalid_argument("VirtualNodeLayer: state shape mismatch");
    Tensor pooled = scatter_add_rows(h, b.node2graph, b.num_graphs);
    Tensor vp = add(v, mlp.apply(add(v, pooled)));
    Tensor hb = add(h, gather_rows(vp, b.node2graph));
    return {hb, vp};
}

// --- loss -----------------------------------------------------------------

namespace {

constexpr double kNormGuard = 1e-12;

// Accumulates one (graph, task) term and its gradient with respect to the
// prediction entries. Zero-norm targets have no direction to match, so they
// contribute the l1 part only.
double term_with_grad(const double* y, const double* p, size_t len, size_t stride, double* gp) {
    double l1 = 0.0, ry2 = 0.0, rp2 = 0.0;
    for (size_t k = 0; k < len; ++k) {
        l1 += std::fabs(y[k * stride] - p[k * stride]);
        ry2 += y[k * stride] * y[k * stride];
        rp2 += p[k * stride] * p[k * stride];
    }
    const double ry = std::sqrt(ry2), rp = std::sqrt(rp2);
    for (size_t k = 0; k < len; ++k) {
        const double d = y[k * stride] - p[k * stride];
        gp[k * stride] += d > 0.0 ? -1.0 : (d < 0.0 ? 1.0 : 0.0);
    }
    if (ry == 0.0) return l1;
    double dot = 0.0;
    for (size_t k = 0; k < len; ++k) dot += y[k * stride] * p[k * stride];
    const double dy = ry + kNormGuard, dp = rp + kNormGuard;
    const double cos_sim = dot / (dy * dp);
    // d/dp_k of (ty . p / (rp + guard)) with ty constant.
    for (size_t k = 0; k < len; ++k) {
        double g = y[k * stride] / (dy * dp);
        if (rp > 0.0) g -= dot / dy * p[k * stride] / (rp * dp * dp);
        gp[k * stride] -= g;  // term carries (1 - cos)
    }
    return l1 + 1.0 - cos_sim;
}

}  // namespace

double l1_cosine_term(const std::vector<double>& target, const std::vector<double>& pred) {
    if (target.size() != pred.size()) throw std::invalid_argument("l1_cosine_term: length mismatch");
    std::vector<double> scratch(pred.size(), 0.0);
    return term_with_grad(target.data(), pred.data(), pred.size(), 1, scratch.data());
}

Tensor l1_cosine_node_loss(const Tensor& node_pred, const DenseMatrix& node_target,
                           const std::vector<int>& node2graph, int num_graphs) {
    if (node_pred.rows() != node_target.rows || node_pred.cols() != node_target.cols)
        throw std::invalid_argument("l1_cosine_node_loss: shape mismatch");
    if (static_cast<int>(node2graph.size()) != node_pred.rows())
        throw std::invalid_argument("l1_cosine_node_loss: segment length mismatch");
    const int d = node_pred.cols();
    // Group stacked node rows per graph (rows of one graph are contiguous in a
    // batch, but grouping keeps this correct for any segment layout).
    std::vector<std::vector<int>> rows_of(num_graphs);
    for (size_t i = 0; i < node2graph.size(); ++i) rows_of[node2graph[i]].push_back(static_cast<int>(i));

    auto grad = std::make_shared<std::vector<double>>(node_pred.values().size(), 0.0);
    double total = 0.0;
    std::vector<double> y, p, g;
    for (int gi = 0; gi < num_graphs; ++gi) {
        const auto& rows = rows_of[gi];
        if (rows.empty()) continue;
        y.resize(rows.size());
        p.resize(rows.size());
        g.assign(rows.size(), 0.0);
        for (int c = 0; c < d; ++c) {
            for (size_t k = 0; k < rows.size(); ++k) {
                y[k] = node_target.at(rows[k], c);
                p[k] = node_pred.value_at(rows[k], c);
            }
            std::fill(g.begin(), g.end(), 0.0);
            total += term_with_grad(y.data(), p.data(), rows.size(), 1, g.data());
            for (size_t k = 0; k < rows.size(); ++k)
                (*grad)[static_cast<size_t>(rows[k]) * d + c] += g[k];
        }
    }
    auto pn = node_pred.node();
    return Tensor::make(1, 1, {total}, {node_pred}, [pn, grad](Tensor::Node& self) {
        pn->ensure_grad();
        for (size_t i = 0; i < grad->size(); ++i) pn->grad[i] += self.grad[0] * (*grad)[i];
    });
}

Tensor l1_cosine_vector_loss(const Tensor& graph_pred, const DenseMatrix& graph_target,
                             const std::vector<GraphTaskBlock>& blocks) {
    if (graph_pred.rows() != graph_target.rows || graph_pred.cols() != graph_target.cols)
        throw std::invalid_argument("l1_cosine_vector_loss: shape mismatch");
    const int d = graph_pred.cols();
    for (const auto& blk : blocks)
        if (blk.offset < 0 || blk.len <= 0 || blk.offset + blk.len > d)
            throw std::invalid_argument("l1_cosine_vector_loss: block out of range");
    auto grad = std::make_shared<std::vector<double>>(graph_pred.values().size(), 0.0);
    double total = 0.0;
    for (int gi = 0; gi < graph_pred.rows(); ++gi) {
        const size_t base = static_cast<size_t>(gi) * d;
        for (const auto& blk : blocks)
            total += term_with_grad(graph_target.data.data() + base + blk.offset,
                                    graph_pred.values().data() + base + blk.offset,
                                    static_cast<size_t>(blk.len), 1, grad->data() + base + blk.offset);
    }
    auto pn = graph_pred.node();
    return Tensor::make(1, 1, {total}, {graph_pred}, [pn, grad](Tensor::Node& self) {
        pn->ensure_grad();
        for (size_t i = 0; i < grad->size(); ++i) pn->grad[i] += self.grad[0] * (*grad)[i];
    });
}

Tensor l1_cosine_loss(const Tensor& node_pred, const DenseMatrix& node_target,
                      const std::vector<int>& node2graph, int num_graphs, const Tensor& graph_pred,
                      const DenseMatrix& graph_target, const std::vector<GraphTaskBlock>& blocks) {
    Tensor sum = add(l1_cosine_node_loss(node_pred, node_target, node2graph, num_graphs),
                     l1_cosine_vector_loss(graph_pred, graph_target, blocks));
    const double terms =
        static_cast<double>(num_graphs) * (node_pred.cols() + static_cast<double>(blocks.size()));
    return scale(sum, 1.0 / terms);
}

// --- optimizer ------------------------------------------------------------

Adam::Adam(std::vector<std::shared_ptr<Param>> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    for (auto& p : params_) {
        p->m.assign(p->value.values().size(), 0.0);
        p->v.assign(p->value.values().size(), 0.0);
    }
}

double Adam::lr_at(long step) const {
    if (cfg_.total_steps <= 0) return cfg_.lr;
    const long warmup = std::max(1L, std::lround(cfg_.warmup_frac * cfg_.total_steps));
    if (step <= warmup) return cfg_.lr * static_cast<double>(step) / warmup;
    const double t = static_cast<double>(step - warmup) / std::max(1L, cfg_.total_steps - warmup);
    return cfg_.lr * 0.5 * (1.0 + std::cos(M_PI * std::min(1.0, t)));
}

void Adam::step() {
    ++step_;
    const double lr = lr_at(step_);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    double scale = 1.0;
    if (cfg_.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& p : params_) {
            const auto& node = *p->value.raw();
            if (node.grad.size() != node.val.size()) continue;
            for (double g : node.grad) sq += g * g;
        }
        const double norm = std::sqrt(sq);
        if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
    }
    for (auto& p : params_) {
        auto& node = *p->value.raw();
        if (node.grad.size() != node.val.size()) continue;  // untouched this step
        for (size_t i = 0; i < node.val.size(); ++i) {
            const double g = node.grad[i] * scale;
            p->m[i] = cfg_.beta1 * p->m[i] + (1.0 - cfg_.beta1) * g;
            p->v[i] = cfg_.beta2 * p->v[i] + (1.0 - cfg_.beta2) * g * g;
            node.val[i] -= lr * (p->m[i] / bc1) / (std::sqrt(p->v[i] / bc2) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p->value.raw()->grad.clear();
}

// --- verification ---------------------------------------------------------

double grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& leaves,
                  double step, int coords_per_leaf, uint64_t seed) {
    Tensor loss = forward();
    backward(loss);
    std::vector<std::vector<double>> ad;
    for (const auto& leaf : leaves) {
        leaf.raw()->ensure_grad();
        ad.push_back(leaf.grad());
    }
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (size_t li = 0; li < leaves.size(); ++li) {
        auto& vals = const_cast<Tensor&>(leaves[li]).mutable_values();
        std::vector<size_t> coords(vals.size());
        for (size_t i = 0; i < coords.size(); ++i) coords[i] = i;
        if (static_cast<int>(coords.size()) > coords_per_leaf) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(coords_per_leaf);
        }
        for (size_t c : coords) {
            const double saved = vals[c];
            vals[c] = saved + step;
            const double fp = forward().scalar();
            vals[c] = saved - step;
            const double fm = forward().scalar();
            vals[c] = saved;
            const double fd = (fp - fm) / (2.0 * step);
            // The guard floor sits above the central-difference noise level
            // (~eps * |f| / step ~ 1e-11), so coordinates whose true gradient
            // is below it are compared absolutely rather than amplified into
            // spurious relative errors.
            const double rel = std::fabs(ad[li][c] - fd) / std::max(1e-5, std::fabs(ad[li][c]) + std::fabs(fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace gpse
