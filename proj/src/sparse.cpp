#include "svt/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace svt {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
    for (const auto& t : entries)
        if (t.row >= rows || t.col >= cols)
            throw std::out_of_range("SparseMatrix: index out of bounds");

    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    row_ptr_.assign(rows + 1, 0);
    col_idx_.reserve(entries.size());
    values_.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& t = entries[i];
        if (i > 0 && entries[i - 1].row == t.row && entries[i - 1].col == t.col) {
            values_.back() += t.value;
            continue;
        }
        col_idx_.push_back(t.col);
        values_.push_back(t.value);
        ++row_ptr_[t.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a) {
    std::vector<Triplet> t;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i)
            if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
    return SparseMatrix(a.rows(), a.cols(), std::move(t));
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_)
        throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[col_idx_[p]];
        y[r] = s;
    }
}

void SparseMatrix::multiply_transpose(std::span<const double> y, std::span<double> x) const {
    if (y.size() != rows_ || x.size() != cols_)
        throw std::invalid_argument("SparseMatrix::multiply_transpose: dimension mismatch");
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double yr = y[r];
        if (yr == 0.0) continue;
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) x[col_idx_[p]] += values_[p] * yr;
    }
}

std::vector<Triplet> SparseMatrix::triplets() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) t.push_back({r, col_idx_[p], values_[p]});
    return t;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_idx_[p]) += values_[p];
    return d;
}

double fro_norm_sq(const SparseMatrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return s;
}

double fro_norm_sq(const DenseMatrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return s;
}

}  // namespace svt
