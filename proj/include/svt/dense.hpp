#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace svt {

using Vector = std::vector<double>;

/// Column-major dense real matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return values_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) { return {values_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const { return {values_.data() + j * rows_, rows_}; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Appends a column; an empty matrix adopts the column's length as its row count.
    void append_column(std::span<const double> c);

    /// Keeps the first `n` columns.
    void resize_cols(std::size_t n);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀ b
DenseMatrix multiply_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a bᵀ
DenseMatrix multiply_nt(const DenseMatrix& a, const DenseMatrix& b);
/// a x
Vector multiply(const DenseMatrix& a, std::span<const double> x);
/// aᵀ x
Vector multiply_tn(const DenseMatrix& a, std::span<const double> x);

/// [a b]; either side may be empty (0 columns).
DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix leading_columns(const DenseMatrix& a, std::size_t n);
DenseMatrix select_columns(const DenseMatrix& a, std::span<const std::size_t> idx);

/// a diag(d)
DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> d);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);

}  // namespace svt
