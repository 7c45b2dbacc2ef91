#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svt/dense.hpp"

namespace svt {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Assembly sums duplicate (row, col) pairs.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

    static SparseMatrix from_dense(const DenseMatrix& a);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const std::size_t> col_idx() const { return col_idx_; }
    std::span<const double> values() const { return values_; }
    /// Stored values in CSR order; the pattern itself is fixed.
    std::span<double> values() { return values_; }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// x = Aᵀ y
    void multiply_transpose(std::span<const double> y, std::span<double> x) const;

    std::vector<Triplet> triplets() const;
    DenseMatrix to_dense() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

double fro_norm_sq(const SparseMatrix& a);
double fro_norm_sq(const DenseMatrix& a);

}  // namespace svt
