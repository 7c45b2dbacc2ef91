#pragma once

#include <cstddef>

#include "svt/decomp.hpp"
#include "svt/dense.hpp"
#include "svt/linear_operator.hpp"

namespace svt {

struct BlkPowerResult {
    DenseMatrix u;  // m×k
    Vector s;       // k, descending, zeros retained
    DenseMatrix v;  // n×k
};

/// Block SVD power method used to repair an accumulated partial SVD.
///
/// For m ≤ n the left block seeds the iteration and every step computes
/// V R = qr(Aᵀ U), U R = qr(A V); the full SVD of the final R then rotates
/// both bases so that A V = U diag(s) holds to rounding. For m > n the roles
/// of the two sides are mirrored and Aᵀ U = V diag(s) holds instead.
/// Dependent columns are refilled by qr_economy, so zero singular values
/// may appear in the output.
BlkPowerResult blk_svd_power(const LinearOperator& op, const DenseMatrix& v, const DenseMatrix& u,
                             std::size_t iter, Rng& rng);
BlkPowerResult blk_svd_power(const LinearOperator& op, const DenseMatrix& v, const DenseMatrix& u,
                             std::size_t iter);

}  // namespace svt
