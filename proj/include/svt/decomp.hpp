#pragma once

#include <random>
#include <stdexcept>

#include "svt/dense.hpp"

namespace svt {

using Rng = std::mt19937_64;

/// Raised when an iterative dense kernel does not converge within its cap.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QrResult {
    DenseMatrix q;  // m×k, orthonormal columns
    DenseMatrix r;  // k×k, upper triangular, nonnegative diagonal
};

/// Economy Householder QR of an m×k matrix (m ≥ k).
///
/// A column whose remaining norm falls below m·eps·(largest column norm) is
/// treated as dependent: its R diagonal is set to zero and the corresponding
/// column of Q is filled from `rng` so that Q stays orthonormal. QR = M then
/// holds up to that threshold.
QrResult qr_economy(const DenseMatrix& m, Rng& rng);
QrResult qr_economy(const DenseMatrix& m);

struct SmallSvd {
    DenseMatrix u;  // rows×p
    Vector s;       // p = min(rows, cols), descending, nonnegative
    DenseMatrix v;  // cols×p
};

/// Thin SVD by one-sided (Hestenes) Jacobi rotations. Singular vectors for
/// zero singular values are completed to orthonormal sets. Throws
/// NumericError if 30 sweeps do not reach convergence.
SmallSvd small_dense_svd(const DenseMatrix& m);

/// Random matrix with independent standard normal entries.
DenseMatrix random_normal(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace svt
