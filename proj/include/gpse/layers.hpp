#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gpse/graph.hpp"
#include "gpse/tensor.hpp"

namespace gpse {

/// Named trainable tensor with its optimizer moment slots.
struct Param {
    std::string name;
    Tensor value;           // differentiable leaf
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment
};

/// Registry of model parameters. Names are unique; registration order is the
/// checkpoint payload order.
class ParamStore {
public:
    /// Registers a new parameter initialized with the given values.
    Tensor create(const std::string& name, int rows, int cols, std::vector<double> init);
    const std::vector<std::shared_ptr<Param>>& all() const { return params_; }
    std::shared_ptr<Param> find(const std::string& name) const;
    size_t total_size() const;

private:
    std::vector<std::shared_ptr<Param>> params_;
};

/// Affine map x -> xW + b for row-major stacked inputs.
struct LinearLayer {
    Tensor w;  // in x out
    Tensor b;  // 1 x out
    Tensor apply(const Tensor& x) const { return add_broadcast_row(matmul(x, w), b); }
};

/// Affine-ReLU stack; the final layer is affine.
struct Mlp {
    std::vector<LinearLayer> layers;
    Tensor apply(const Tensor& x) const;
};

/// Feature-axis normalization with learned affine parameters. Statistics are
/// per row, so outputs do not depend on batch composition.
struct FeatureNorm {
    Tensor gamma;  // 1 x d
    Tensor beta;   // 1 x d
    Tensor apply(const Tensor& x) const { return feature_norm(x, gamma, beta); }
};

/// A batch of graphs stacked block-diagonally: nodes are concatenated, the
/// directed edge list stores both orientations of each undirected edge, and
/// node2graph maps each stacked node to its graph slot.
struct Batch {
    int num_nodes = 0;
    int num_graphs = 0;
    std::vector<int> node2graph;
    std::vector<int> edge_src;
    std::vector<int> edge_dst;
};

Batch make_batch(const std::vector<const Graph*>& graphs);

/// Gated graph convolution with residual connections and edge states.
///   e_hat_ij = e_ij + ReLU(Norm(W3 h_i + W4 h_j + W5 e_ij))
///   eta_ij   = sigmoid(e_hat_ij) / (sum_{j'} sigmoid(e_hat_ij') + kGateEps)
///   h'_i     = h_i + ReLU(Norm(W1 h_i + sum_j eta_ij (.) W2 h_j))
///   e'       = e_hat
/// where i is the receiving endpoint of each directed edge.
struct GatedGcnLayer {
    Tensor w1, w2, w3, w4, w5;  // d x d
    FeatureNorm norm_h, norm_e;
    static constexpr double kGateEps = 1e-6;

    std::pair<Tensor, Tensor> apply(const Tensor& h, const Tensor& e, const Batch& b) const;
};

/// Classic GIN block used only for architecture comparisons (no residual
/// stream or normalization, matching the original formulation):
///   h'_i = MLP(h_i + sum_j h_j).
struct GinLayer {
    Mlp mlp;
    Tensor apply(const Tensor& h, const Batch& b) const;
};

/// Classic GCN block used only for architecture comparisons (no residual
/// stream or normalization, matching the original formulation):
///   h'_i = ReLU(W sum_{j in N(i) U {i}} h_j / sqrt((d_i+1)(d_j+1))).
struct GcnLayer {
    LinearLayer lin;
    Tensor apply(const Tensor& h, const Batch& b) const;
};

/// Virtual-node update maintaining one global state row per graph:
///   v' = v + MLP(v + sum_i h_i);  h_out[i] = h[i] + v'[graph(i)].
struct VirtualNodeLayer {
    Mlp mlp;
    std::pair<Tensor, Tensor> apply(const Tensor& h, const Tensor& v, const Batch& b) const;
};

// --- loss -----------------------------------------------------------------

/// One (graph, task) loss term: sum_k |y_k - p_k| + (1 - y_tilde . p_tilde),
/// with the target direction y_tilde = y / (||y|| + 1e-12) and the prediction
/// normalized the same way. Exposed for direct evaluation in tests.
double l1_cosine_term(const std::vector<double>& target, const std::vector<double>& pred);

/// Sum of per-(graph, column) terms over node-level tasks. node_pred rows are
/// stacked batch nodes; each column of each graph contributes one term.
Tensor l1_cosine_node_loss(const Tensor& node_pred, const DenseMatrix& node_target,
                           const std::vector<int>& node2graph, int num_graphs);

/// Contiguous column block of the graph-target row treated as one vector task.
struct GraphTaskBlock {
    int offset;
    int len;
};

/// Sum of per-(graph, block) terms over graph-level vector tasks. graph_pred
/// has one row per graph.
Tensor l1_cosine_vector_loss(const Tensor& graph_pred, const DenseMatrix& graph_target,
                             const std::vector<GraphTaskBlock>& blocks);

/// Full batch loss: mean of all graph-task terms (node columns plus graph
/// blocks), so the scale is independent of batch size.
Tensor l1_cosine_loss(const Tensor& node_pred, const DenseMatrix& node_target,
                      const std::vector<int>& node2graph, int num_graphs, const Tensor& graph_pred,
                      const DenseMatrix& graph_target, const std::vector<GraphTaskBlock>& blocks);

// --- optimizer ------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long total_steps = 0;    // 0 disables the schedule (constant lr)
    double warmup_frac = 0.05;
    double clip_norm = 1.0;  // global gradient-norm clip; 0 disables
};

/// Adam with linear warmup followed by cosine decay to zero.
class Adam {
public:
    Adam(std::vector<std::shared_ptr<Param>> params, AdamConfig cfg);
    /// Learning rate used for step number `step` (1-based).
    double lr_at(long step) const;
    /// Applies one update from the gradients currently stored on the params.
    void step();
    void zero_grad();
    long steps_taken() const { return step_; }

private:
    std::vector<std::shared_ptr<Param>> params_;
    AdamConfig cfg_;
    long step_ = 0;
};

// --- verification ---------------------------------------------------------

/// Central-difference gradient check. `forward` must rebuild the computation
/// from the current leaf values and return a scalar loss. For each leaf, up to
/// `coords_per_leaf` coordinates are sampled; returns the maximum relative
/// error |ad - fd| / max(1e-5, |ad| + |fd|), the guard sitting above the
/// finite-difference noise floor.
double grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& leaves,
                  double step = 1e-5, int coords_per_leaf = 20, uint64_t seed = 0);

}  // namespace gpse
