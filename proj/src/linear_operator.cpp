#include "svt/linear_operator.hpp"

#include <algorithm>
#include <stdexcept>

namespace svt {

Vector matvec(const LinearOperator& op, std::span<const double> x) {
    Vector y(op.rows());
    op.apply(x, y);
    return y;
}

Vector rmatvec(const LinearOperator& op, std::span<const double> y) {
    Vector x(op.cols());
    op.apply_adjoint(y, x);
    return x;
}

DenseMatrix matmat(const LinearOperator& op, const DenseMatrix& x) {
    if (x.rows() != op.cols()) throw std::invalid_argument("matmat: dimension mismatch");
    DenseMatrix y(op.rows(), x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) op.apply(x.col(j), y.col(j));
    return y;
}

DenseMatrix rmatmat(const LinearOperator& op, const DenseMatrix& y) {
    if (y.rows() != op.rows()) throw std::invalid_argument("rmatmat: dimension mismatch");
    DenseMatrix x(op.cols(), y.cols());
    for (std::size_t j = 0; j < y.cols(); ++j) op.apply_adjoint(y.col(j), x.col(j));
    return x;
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != a_.cols() || y.size() != a_.rows())
        throw std::invalid_argument("DenseOperator::apply: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < a_.cols(); ++j)
        if (x[j] != 0.0) axpy(x[j], a_.col(j), y);
}

void DenseOperator::apply_adjoint(std::span<const double> y, std::span<double> x) const {
    if (y.size() != a_.rows() || x.size() != a_.cols())
        throw std::invalid_argument("DenseOperator::apply_adjoint: dimension mismatch");
    for (std::size_t j = 0; j < a_.cols(); ++j) x[j] = dot(a_.col(j), y);
}

std::optional<double> DenseOperator::fro_norm_sq() const { return svt::fro_norm_sq(a_); }

}  // namespace svt
