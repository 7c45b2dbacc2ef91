#include "svt/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace svt {

namespace {

double gram_defect_sq(const DenseMatrix& q) {
    if (q.cols() == 0) return 0.0;
    DenseMatrix g = multiply_tn(q, q);
    double s = 0.0;
    for (std::size_t j = 0; j < g.cols(); ++j)
        for (std::size_t i = 0; i < g.rows(); ++i) {
            double d = g(i, j) - (i == j ? 1.0 : 0.0);
            s += d * d;
        }
    return s;
}

}  // namespace

double orthogonality_error(const DenseMatrix& u, const DenseMatrix& v) {
    return std::sqrt(gram_defect_sq(v) + gram_defect_sq(u));
}

double left_residual(const LinearOperator& a, const DenseMatrix& u, std::span<const double> s,
                     const DenseMatrix& v) {
    if (s.empty()) return 0.0;
    return frobenius_norm(subtract(matmat(a, v), scale_columns(u, s)));
}

double right_residual(const LinearOperator& a, const DenseMatrix& u, std::span<const double> s,
                      const DenseMatrix& v) {
    if (s.empty()) return 0.0;
    return frobenius_norm(subtract(rmatmat(a, u), scale_columns(v, s)));
}

double total_residual(const LinearOperator& a, const DenseMatrix& u, std::span<const double> s,
                      const DenseMatrix& v) {
    return std::hypot(left_residual(a, u, s, v), right_residual(a, u, s, v));
}

double reconstruction_error(const DenseMatrix& a, const DenseMatrix& u, std::span<const double> s,
                            const DenseMatrix& v) {
    if (s.empty()) return frobenius_norm(a);
    return frobenius_norm(subtract(a, multiply_nt(scale_columns(u, s), v)));
}

}  // namespace svt
