#include "gpse/tensor.hpp"

#include <cblas.h>

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace gpse {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
}

}  // namespace

Tensor Tensor::constant(int rows, int cols, std::vector<double> val) {
    if (val.size() != static_cast<size_t>(rows) * cols)
        throw std::invalid_argument("Tensor::constant: value size mismatch");
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->val = std::move(val);
    n->requires_grad = false;
    return Tensor(std::move(n));
}

Tensor Tensor::leaf(int rows, int cols, std::vector<double> val) {
    auto t = constant(rows, cols, std::move(val));
    t.node()->requires_grad = true;
    return t;
}

Tensor Tensor::make(int rows, int cols, std::vector<double> val, std::vector<Tensor> parents,
                    std::function<void(Node&)> backward_fn, bool requires_grad) {
    auto t = constant(rows, cols, std::move(val));
    auto& n = *t.node();
    for (auto& p : parents) n.parents.push_back(p.node());
    bool any_grad = false;
    for (auto& p : n.parents) any_grad |= p->requires_grad;
    n.requires_grad = requires_grad && any_grad;
    if (n.requires_grad) n.backward_fn = std::move(backward_fn);
    return t;
}

double Tensor::scalar() const {
    if (node_->val.size() != 1) throw std::invalid_argument("Tensor::scalar: not a scalar");
    return node_->val[0];
}

bool Tensor::all_finite() const {
    for (double x : node_->val)
        if (!std::isfinite(x)) return false;
    return true;
}

void backward(const Tensor& loss) {
    if (loss.values().size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    // Iterative post-order DFS.
    std::vector<Tensor::Node*> order;
    std::unordered_set<Tensor::Node*> seen;
    std::vector<std::pair<Tensor::Node*, size_t>> stack;
    stack.emplace_back(loss.raw(), 0);
    seen.insert(loss.raw());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor::Node* p = node->parents[next++].get();
            if (!seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (auto* n : order) n->grad.assign(n->val.size(), 0.0);
    loss.raw()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn && (*it)->requires_grad) (*it)->backward_fn(**it);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
    if (m && n && k)
        cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, m, n, k, 1.0, a.values().data(), k,
                    b.values().data(), n, 0.0, out.data(), n);
    auto an = a.node(), bn = b.node();
    return Tensor::make(m, n, std::move(out), {a, b}, [an, bn, m, k, n](Tensor::Node& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            if (m && n && k)
                cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, m, k, n, 1.0, self.grad.data(),
                            n, bn->val.data(), n, 1.0, an->grad.data(), k);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            if (m && n && k)
                cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, k, n, m, 1.0, an->val.data(), k,
                            self.grad.data(), n, 1.0, bn->grad.data(), n);
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.values());
    for (size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
    auto an = a.node(), bn = b.node();
    return Tensor::make(a.rows(), a.cols(), std::move(out), {a, b}, [an, bn](Tensor::Node& self) {
        for (auto* p : {an.get(), bn.get()}) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.values());
    for (size_t i = 0; i < out.size(); ++i) out[i] -= b.values()[i];
    auto an = a.node(), bn = b.node();
    return Tensor::make(a.rows(), a.cols(), std::move(out), {a, b}, [an, bn](Tensor::Node& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.values());
    for (size_t i = 0; i < out.size(); ++i) out[i] *= b.values()[i];
    auto an = a.node(), bn = b.node();
    return Tensor::make(a.rows(), a.cols(), std::move(out), {a, b}, [an, bn](Tensor::Node& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * bn->val[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i] * an->val[i];
        }
    });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.values());
    for (auto& x : out) x *= c;
    auto an = a.node();
    return Tensor::make(a.rows(), a.cols(), std::move(out), {a}, [an, c](Tensor::Node& self) {
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += c * self.grad[i];
    });
}

Tensor add_broadcast_row(const Tensor& x, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != x.cols())
        throw std::invalid_argument("add_broadcast_row: row must be 1 x cols(x)");
    std::vector<double> out(x.values());
    const int d = x.cols();
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < d; ++j) out[static_cast<size_t>(i) * d + j] += row.values()[j];
    auto xn = x.node(), rn = row.node();
    return Tensor::make(x.rows(), d, std::move(out), {x, row}, [xn, rn, d](Tensor::Node& self) {
        if (xn->requires_grad) {
            xn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) xn->grad[i] += self.grad[i];
        }
        if (rn->requires_grad) {
            rn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) rn->grad[i % d] += self.grad[i];
        }
    });
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.values());
    for (auto& v : out) v = v > 0.0 ? v : 0.0;
    auto xn = x.node();
    return Tensor::make(x.rows(), x.cols(), std::move(out), {x}, [xn](Tensor::Node& self) {
        xn->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            if (xn->val[i] > 0.0) xn->grad[i] += self.grad[i];
    });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.values());
    for (auto& v : out) v = 1.0 / (1.0 + std::exp(-v));
    auto xn = x.node();
    return Tensor::make(x.rows(), x.cols(), std::move(out), {x}, [xn](Tensor::Node& self) {
        xn->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            xn->grad[i] += self.grad[i] * self.val[i] * (1.0 - self.val[i]);
    });
}

Tensor abs_val(const Tensor& x) {
    std::vector<double> out(x.values());
    for (auto& v : out) v = std::fabs(v);
    auto xn = x.node();
    return Tensor::make(x.rows(), x.cols(), std::move(out), {x}, [xn](Tensor::Node& self) {
        xn->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            xn->grad[i] += self.grad[i] * (xn->val[i] > 0.0 ? 1.0 : (xn->val[i] < 0.0 ? -1.0 : 0.0));
    });
}

Tensor div_eps(const Tensor& a, const Tensor& b, double eps) {
    require_same_shape(a, b, "div_eps");
    std::vector<double> out(a.values());
    for (size_t i = 0; i < out.size(); ++i) out[i] /= (b.values()[i] + eps);
    auto an = a.node(), bn = b.node();
    return Tensor::make(a.rows(), a.cols(), std::move(out), {a, b}, [an, bn, eps](Tensor::Node& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                an->grad[i] += self.grad[i] / (bn->val[i] + eps);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) {
                const double denom = bn->val[i] + eps;
                bn->grad[i] -= self.grad[i] * an->val[i] / (denom * denom);
            }
        }
    });
}

Tensor gather_rows(const Tensor& x, std::vector<int> idx) {
    const int d = x.cols();
    std::vector<double> out(idx.size() * static_cast<size_t>(d));
    for (size_t i = 0; i < idx.size(); ++i)
        for (int j = 0; j < d; ++j)
            out[i * d + j] = x.values()[static_cast<size_t>(idx[i]) * d + j];
    auto xn = x.node();
    auto ids = std::make_shared<std::vector<int>>(std::move(idx));
    return Tensor::make(static_cast<int>(ids->size()), d, std::move(out), {x},
                        [xn, ids, d](Tensor::Node& self) {
                            xn->ensure_grad();
                            for (size_t i = 0; i < ids->size(); ++i)
                                for (int j = 0; j < d; ++j)
                                    xn->grad[static_cast<size_t>((*ids)[i]) * d + j] +=
                                        self.grad[i * d + j];
                        });
}

Tensor scatter_add_rows(const Tensor& x, std::vector<int> idx, int out_rows) {
    if (idx.size() != static_cast<size_t>(x.rows()))
        throw std::invalid_argument("scatter_add_rows: index length must equal row count");
    const int d = x.cols();
    std::vector<double> out(static_cast<size_t>(out_rows) * d, 0.0);
    for (size_t i = 0; i < idx.size(); ++i)
        for (int j = 0; j < d; ++j)
            out[static_cast<size_t>(idx[i]) * d + j] += x.values()[i * d + j];
    auto xn = x.node();
    auto ids = std::make_shared<std::vector<int>>(std::move(idx));
    return Tensor::make(out_rows, d, std::move(out), {x}, [xn, ids, d](Tensor::Node& self) {
        xn->ensure_grad();
        for (size_t i = 0; i < ids->size(); ++i)
            for (int j = 0; j < d; ++j)
                xn->grad[i * d + j] += self.grad[static_cast<size_t>((*ids)[i]) * d + j];
    });
}

Tensor row_scale(const Tensor& x, std::vector<double> w) {
    if (w.size() != static_cast<size_t>(x.rows()))
        throw std::invalid_argument("row_scale: weight length must equal row count");
    const int d = x.cols();
    std::vector<double> out(x.values());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < d; ++j) out[static_cast<size_t>(i) * d + j] *= w[i];
    auto xn = x.node();
    auto ws = std::make_shared<std::vector<double>>(std::move(w));
    return Tensor::make(x.rows(), d, std::move(out), {x}, [xn, ws, d](Tensor::Node& self) {
        xn->ensure_grad();
        for (int i = 0; i < self.rows; ++i)
            for (int j = 0; j < d; ++j)
                xn->grad[static_cast<size_t>(i) * d + j] +=
                    self.grad[static_cast<size_t>(i) * d + j] * (*ws)[i];
    });
}

Tensor feature_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    if (gamma.rows() != 1 || gamma.cols() != x.cols() || beta.rows() != 1 || beta.cols() != x.cols())
        throw std::invalid_argument("feature_norm: affine params must be 1 x cols(x)");
    const int n = x.rows(), d = x.cols();
    auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(n) * d);
    auto inv_std = std::make_shared<std::vector<double>>(n);
    std::vector<double> out(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i) {
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += x.values()[static_cast<size_t>(i) * d + j];
        mean /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            const double c = x.values()[static_cast<size_t>(i) * d + j] - mean;
            var += c * c;
        }
        var /= d;
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_std)[i] = is;
        for (int j = 0; j < d; ++j) {
            const double xh = (x.values()[static_cast<size_t>(i) * d + j] - mean) * is;
            (*xhat)[static_cast<size_t>(i) * d + j] = xh;
            out[static_cast<size_t>(i) * d + j] = gamma.values()[j] * xh + beta.values()[j];
        }
    }
    auto xn = x.node(), gn = gamma.node(), bn = beta.node();
    return Tensor::make(
        n, d, std::move(out), {x, gamma, beta}, [xn, gn, bn, xhat, inv_std, n, d](Tensor::Node& self) {
            if (gn->requires_grad) gn->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            if (xn->requires_grad) xn->ensure_grad();
            for (int i = 0; i < n; ++i) {
                const size_t base = static_cast<size_t>(i) * d;
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double dy = self.grad[base + j];
                    if (gn->requires_grad) gn->grad[j] += dy * (*xhat)[base + j];
                    if (bn->requires_grad) bn->grad[j] += dy;
                    const double dxh = dy * gn->val[j];
                    sum_dxhat += dxh;
                    sum_dxhat_xhat += dxh * (*xhat)[base + j];
                }
                if (!xn->requires_grad) continue;
                const double is = (*inv_std)[i];
                for (int j = 0; j < d; ++j) {
                    const double dxh = self.grad[base + j] * gn->val[j];
                    xn->grad[base + j] +=
                        is * (dxh - sum_dxhat / d - (*xhat)[base + j] * sum_dxhat_xhat / d);
                }
            }
        });
}

Tensor l2_normalize_rows(const Tensor& x, double eps) {
    const int n = x.rows(), d = x.cols();
    std::vector<double> out(x.values());
    auto norms = std::make_shared<std::vector<double>>(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += out[static_cast<size_t>(i) * d + j] * out[static_cast<size_t>(i) * d + j];
        const double r = std::sqrt(s);
        (*norms)[i] = r;
        for (int j = 0; j < d; ++j) out[static_cast<size_t>(i) * d + j] /= (r + eps);
    }
    auto xn = x.node();
    return Tensor::make(n, d, std::move(out), {x}, [xn, norms, n, d, eps](Tensor::Node& self) {
        xn->ensure_grad();
        for (int i = 0; i < n; ++i) {
            const size_t base = static_cast<size_t>(i) * d;
            const double r = (*norms)[i];
            const double denom = r + eps;
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += self.grad[base + j] * xn->val[base + j];
            for (int j = 0; j < d; ++j) {
                double g = self.grad[base + j] / denom;
                if (r > 0.0) g -= dot * xn->val[base + j] / (r * denom * denom);
                xn->grad[base + j] += g;
            }
        }
    });
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const int n = xs[0].rows();
    int d = 0;
    for (const auto& x : xs) {
        if (x.rows() != n) throw std::invalid_argument("concat_cols: row count mismatch");
        d += x.cols();
    }
    std::vector<double> out(static_cast<size_t>(n) * d);
    int off = 0;
    for (const auto& x : xs) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < x.cols(); ++j)
                out[static_cast<size_t>(i) * d + off + j] = x.value_at(i, j);
        off += x.cols();
    }
    std::vector<std::shared_ptr<Tensor::Node>> pn;
    for (const auto& x : xs) pn.push_back(x.node());
    return Tensor::make(n, d, std::move(out), xs, [pn, n, d](Tensor::Node& self) {
        int off = 0;
        for (const auto& p : pn) {
            if (p->requires_grad) {
                p->ensure_grad();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < p->cols; ++j)
                        p->grad[static_cast<size_t>(i) * p->cols + j] +=
                            self.grad[static_cast<size_t>(i) * d + off + j];
            }
            off += p->cols;
        }
    });
}

Tensor sum_all(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    auto xn = x.node();
    return Tensor::make(1, 1, {s}, {x}, [xn](Tensor::Node& self) {
        xn->ensure_grad();
        for (auto& g : xn->grad) g += self.grad[0];
    });
}

Tensor mean_all(const Tensor& x) { return scale(sum_all(x), 1.0 / static_cast<double>(x.values().size())); }

}  // namespace gpse
