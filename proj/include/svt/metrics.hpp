#pragma once

#include <span>

#include "svt/dense.hpp"
#include "svt/linear_operator.hpp"

namespace svt {

/// sqrt(‖VᵀV − I‖_F² + ‖UᵀU − I‖_F²). Empty bases contribute zero.
double orthogonality_error(const DenseMatrix& u, const DenseMatrix& v);

/// ‖A V − U diag(s)‖_F
double left_residual(const LinearOperator& a, const DenseMatrix& u, std::span<const double> s,
                     const DenseMatrix& v);
/// ‖Aᵀ U − V diag(s)‖_F
double right_residual(const LinearOperator& a, const DenseMatrix& u, std::span<const double> s,
                      const DenseMatrix& v);
/// sqrt(left² + right²)
double total_residual(const LinearOperator& a, const DenseMatrix& u, std::span<const double> s,
                      const DenseMatrix& v);

/// ‖A − U diag(s) Vᵀ‖_F for a dense A.
double reconstruction_error(const DenseMatrix& a, const DenseMatrix& u, std::span<const double> s,
                            const DenseMatrix& v);

}  // namespace svt
