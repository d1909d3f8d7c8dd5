#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gpse {

/// Dense row-major matrix of 64-bit floats. All numerics in this project
/// run at desk scale (n up to a few hundred), so dense storage is enough.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    static DenseMatrix identity(int n);
    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
/// eigenvector i stored as column i of `vectors`, each unit l2 norm with
/// the largest-magnitude entry made positive (ties broken by lowest index).
struct EigenDecomposition {
    std::vector<double> values;
    DenseMatrix vectors;
};

// Threshold below which an eigenvalue counts as trivial (zero).
inline constexpr double kEigZeroTol = 1e-8;

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matpow(const DenseMatrix& a, int k);
DenseMatrix transpose(const DenseMatrix& a);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// Cyclic Jacobi sweeps; off-diagonal Frobenius threshold 1e-12, at most
/// 100 sweeps. Throws if the input is not symmetric within 1e-12 or the
/// sweeps fail to converge (the error message carries the residual).
EigenDecomposition sym_eig(const DenseMatrix& a);

/// Moore-Penrose pseudoinverse assembled from an eigendecomposition of a
/// PSD matrix: sum of (1/lambda) u u^T over eigenpairs with lambda > tol.
DenseMatrix pinv_from_eig(const EigenDecomposition& dec, double tol = kEigZeroTol);

/// Coefficient of determination. Returns 1.0 for an exact match even when
/// the targets are constant (SS_tot = 0).
double r2_score(const std::vector<double>& y_true, const std::vector<double>& y_pred);

/// Seeded N(0,1) / U[0,1) stream: mt19937_64 plus Box-Muller, so the draws
/// are identical on every platform (std::normal_distribution is not).
class GaussianStream {
public:
    explicit GaussianStream(uint64_t seed) : rng_(seed) {}

    double next_uniform() { return (rng_() >> 11) * 0x1.0p-53; }

    double next();

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// i.i.d. N(0,1) entries, row-major fill; deterministic per seed.
DenseMatrix gaussian_matrix(int rows, int cols, uint64_t seed);

/// Mixes a base seed with stream indices, for derived per-epoch/per-graph
/// seeds (splitmix64 finalizer).
uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b = 0);

}  // namespace gpse
