#include "gpse/matrix.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gpse {

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("matmul: shape mismatch (" + std::to_string(a.rows) + "x" +
                                    std::to_string(a.cols) + " * " + std::to_string(b.rows) + "x" +
                                    std::to_string(b.cols) + ")");
    DenseMatrix c(a.rows, b.cols);
    if (a.rows == 0 || b.cols == 0 || a.cols == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, a.rows, b.cols, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

DenseMatrix matpow(const DenseMatrix& a, int k) {
    if (a.rows != a.cols) throw std::invalid_argument("matpow: matrix must be square");
    if (k < 0) throw std::invalid_argument("matpow: negative power");
    DenseMatrix r = DenseMatrix::identity(a.rows);
    for (int i = 0; i < k; ++i) r = matmul(a, r);
    return r;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

namespace {

double offdiag_frobenius(const DenseMatrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j)
            if (i != j) s += a.at(i, j) * a.at(i, j);
    return std::sqrt(s);
}

// Makes the largest-magnitude entry of each eigenvector positive; ties go
// to the lowest index. Removes the sign nondeterminism before LapPE's
// absolute value is ever applied downstream.
void fix_column_signs(DenseMatrix& v) {
    for (int j = 0; j < v.cols; ++j) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < v.rows; ++i) {
            double m = std::fabs(v.at(i, j));
            if (m > best + 1e-15) {
                best = m;
                arg = i;
            }
        }
        if (v.at(arg, j) < 0.0)
            for (int i = 0; i < v.rows; ++i) v.at(i, j) = -v.at(i, j);
    }
}

}  // namespace

EigenDecomposition sym_eig(const DenseMatrix& a) {
    if (a.rows != a.cols) throw std::invalid_argument("sym_eig: matrix must be square");
    const int n = a.rows;
    {
        double asym = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) asym = std::max(asym, std::fabs(a.at(i, j) - a.at(j, i)));
        if (asym > 1e-12)
            throw std::invalid_argument("sym_eig: input not symmetric (|A - A^T|_inf = " +
                                        std::to_string(asym) + ")");
    }

    DenseMatrix b = a;
    DenseMatrix v = DenseMatrix::identity(n);

    constexpr int kMaxSweeps = 100;
    constexpr double kOffTol = 1e-12;
    bool converged = (n <= 1);
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = b.at(p, q);
                if (apq == 0.0) continue;
                const double theta = (b.at(q, q) - b.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // Rotate rows/columns p and q of B and columns of V.
                for (int k = 0; k < n; ++k) {
                    const double bkp = b.at(k, p), bkq = b.at(k, q);
                    b.at(k, p) = c * bkp - s * bkq;
                    b.at(k, q) = s * bkp + c * bkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double bpk = b.at(p, k), bqk = b.at(q, k);
                    b.at(p, k) = c * bpk - s * bqk;
                    b.at(q, k) = s * bpk + c * bqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
        if (offdiag_frobenius(b) <= kOffTol) converged = true;
    }
    if (!converged) {
        double res = offdiag_frobenius(b);
        if (res > kOffTol)
            throw std::runtime_error("sym_eig: Jacobi sweeps did not converge, off-diagonal residual " +
                                     std::to_string(res));
    }

    // Sort ascending; stable on ties so repeated eigenvalues keep sweep order.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return b.at(i, i) < b.at(j, j); });

    EigenDecomposition dec;
    dec.values.resize(n);
    dec.vectors = DenseMatrix(n, n);
    for (int j = 0; j < n; ++j) {
        dec.values[j] = b.at(order[j], order[j]);
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += v.at(i, order[j]) * v.at(i, order[j]);
        norm = std::sqrt(norm);
        for (int i = 0; i < n; ++i) dec.vectors.at(i, j) = v.at(i, order[j]) / norm;
    }
    fix_column_signs(dec.vectors);
    return dec;
}

DenseMatrix pinv_from_eig(const EigenDecomposition& dec, double tol) {
    const int n = dec.vectors.rows;
    DenseMatrix p(n, n);
    for (int e = 0; e < static_cast<int>(dec.values.size()); ++e) {
        if (dec.values[e] <= tol) continue;
        const double inv = 1.0 / dec.values[e];
        for (int i = 0; i < n; ++i) {
            const double ui = dec.vectors.at(i, e);
            for (int j = 0; j < n; ++j) p.at(i, j) += inv * ui * dec.vectors.at(j, e);
        }
    }
    return p;
}

double r2_score(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) throw std::invalid_argument("r2_score: length mismatch");
    if (y_true.size() < 2) throw std::invalid_argument("r2_score: need at least 2 values");
    double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / y_true.size();
    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < y_true.size(); ++i) {
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    }
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    return 1.0 - ss_res / ss_tot;
}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

DenseMatrix gaussian_matrix(int rows, int cols, uint64_t seed) {
    GaussianStream g(seed);
    DenseMatrix m(rows, cols);
    for (auto& x : m.data) x = g.next();
    return m;
}

uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b) {
    uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

}  // namespace gpse
