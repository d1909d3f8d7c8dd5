#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gpse/matrix.hpp"

namespace gpse {

/// Reverse-mode autodiff tensor: a shared node in an implicit computation
/// record. Forward ops append nodes; backward(loss) topologically sorts the
/// record reachable from the loss and runs each node's backward closure
/// once. Values and gradients are dense row-major 64-bit floats.
class Tensor {
public:
    struct Node {
        int rows = 0;
        int cols = 0;
        std::vector<double> val;
        std::vector<double> grad;  // sized lazily by backward()
        bool requires_grad = false;
        std::vector<std::shared_ptr<Node>> parents;
        std::function<void(Node&)> backward_fn;

        size_t size() const { return val.size(); }
        void ensure_grad() {
            if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
        }
    };

    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor constant(int rows, int cols, std::vector<double> val);
    static Tensor constant(const DenseMatrix& m) { return constant(m.rows, m.cols, m.data); }
    static Tensor zeros(int rows, int cols) {
        return constant(rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, 0.0));
    }
    /// Differentiable leaf (a parameter or probed input).
    static Tensor leaf(int rows, int cols, std::vector<double> val);

    /// Escape hatch for custom primitives (used by fused ops and tests).
    static Tensor make(int rows, int cols, std::vector<double> val, std::vector<Tensor> parents,
                       std::function<void(Node&)> backward_fn, bool requires_grad = true);

    bool valid() const { return node_ != nullptr; }
    int rows() const { return node_->rows; }
    int cols() const { return node_->cols; }
    const std::vector<double>& values() const { return node_->val; }
    std::vector<double>& mutable_values() { return node_->val; }
    const std::vector<double>& grad() const { return node_->grad; }
    double value_at(int i, int j) const { return node_->val[static_cast<size_t>(i) * cols() + j]; }
    double scalar() const;
    bool all_finite() const;

    std::shared_ptr<Node> node() const { return node_; }
    Node* raw() const { return node_.get(); }

private:
    std::shared_ptr<Node> node_;
};

/// Runs reverse accumulation from a scalar loss. Gradients of every node
/// reachable from the loss are zeroed first, then the loss grad is seeded
/// with 1.
void backward(const Tensor& loss);

// --- primitive forward/backward set ---------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double c);
Tensor add_broadcast_row(const Tensor& x, const Tensor& row);  // x: n x d, row: 1 x d
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor abs_val(const Tensor& x);
/// a / (b + eps), elementwise; the guard keeps gate denominators positive.
Tensor div_eps(const Tensor& a, const Tensor& b, double eps);

/// out[i] = x[idx[i]] (row gather).
Tensor gather_rows(const Tensor& x, std::vector<int> idx);
/// out[idx[i]] += x[i] (row scatter-add / segment sum over an edge list).
Tensor scatter_add_rows(const Tensor& x, std::vector<int> idx, int out_rows);
/// Rows scaled by fixed per-row weights (no gradient to the weights).
Tensor row_scale(const Tensor& x, std::vector<double> w);

/// Normalization over the feature axis with affine parameters, computed
/// from per-row statistics so results do not depend on batch composition.
Tensor feature_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Row-wise l2 normalization with guarded norm (norm + eps).
Tensor l2_normalize_rows(const Tensor& x, double eps = 1e-12);

/// Side-by-side column concatenation of tensors with equal row counts.
Tensor concat_cols(const std::vector<Tensor>& xs);

Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

}  // namespace gpse
