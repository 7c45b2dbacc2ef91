#include "svt/blk_power.hpp"

#include <stdexcept>

namespace svt {

BlkPowerResult blk_svd_power(const LinearOperator& op, const DenseMatrix& v, const DenseMatrix& u,
                             std::size_t iter, Rng& rng) {
    const std::size_t m = op.rows();
    const std::size_t n = op.cols();
    if (iter < 1) throw std::invalid_argument("blk_svd_power: iter must be at least 1");
    if (u.cols() != v.cols()) throw std::invalid_argument("blk_svd_power: U and V column counts differ");
    if (u.rows() != m || v.rows() != n) throw std::invalid_argument("blk_svd_power: basis/operator mismatch");
    if (u.cols() > std::min(m, n)) throw std::invalid_argument("blk_svd_power: block wider than min(m, n)");

    BlkPowerResult out;
    if (u.cols() == 0) {
        out.u = DenseMatrix(m, 0);
        out.v = DenseMatrix(n, 0);
        return out;
    }

    if (m <= n) {
        QrResult left = qr_economy(u, rng);
        QrResult right;
        for (std::size_t it = 0; it < iter; ++it) {
            right = qr_economy(rmatmat(op, left.q), rng);
            left = qr_economy(matmat(op, right.q), rng);
        }
        // A V = U R,  R = u_r S v_rᵀ
        SmallSvd r = small_dense_svd(left.r);
        out.u = multiply(left.q, r.u);
        out.v = multiply(right.q, r.v);
        out.s = std::move(r.s);
    } else {
        QrResult right = qr_economy(v, rng);
        QrResult left;
        for (std::size_t it = 0; it < iter; ++it) {
            left = qr_economy(matmat(op, right.q), rng);
            right = qr_economy(rmatmat(op, left.q), rng);
        }
        // Aᵀ U = V R,  R = v_r S u_rᵀ
        SmallSvd r = small_dense_svd(right.r);
        out.v = multiply(right.q, r.u);
        out.u = multiply(left.q, r.v);
        out.s = std::move(r.s);
    }
    return out;
}

BlkPowerResult blk_svd_power(const LinearOperator& op, const DenseMatrix& v, const DenseMatrix& u,
                             std::size_t iter) {
    Rng rng(0x5eed);
    return blk_svd_power(op, v, u, iter, rng);
}

}  // namespace svt
