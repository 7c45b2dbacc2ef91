#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "svt/dense.hpp"
#include "svt/sparse.hpp"

namespace svt {

/// Real m×n operator known only through products with A and Aᵀ.
/// Implementations must tolerate concurrent const calls.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;

    /// y = A x; x has cols() entries, y has rows().
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    /// x = Aᵀ y
    virtual void apply_adjoint(std::span<const double> y, std::span<double> x) const = 0;

    /// ‖A‖_F² when cheaply known.
    virtual std::optional<double> fro_norm_sq() const { return std::nullopt; }
};

/// A x
Vector matvec(const LinearOperator& op, std::span<const double> x);
/// Aᵀ y
Vector rmatvec(const LinearOperator& op, std::span<const double> y);
/// A X, column by column.
DenseMatrix matmat(const LinearOperator& op, const DenseMatrix& x);
/// Aᵀ Y, column by column.
DenseMatrix rmatmat(const LinearOperator& op, const DenseMatrix& y);

/// Non-owning view of a dense matrix.
class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(const DenseMatrix& a) : a_(a) {}
    std::size_t rows() const override { return a_.rows(); }
    std::size_t cols() const override { return a_.cols(); }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override;
    std::optional<double> fro_norm_sq() const override;

private:
    const DenseMatrix& a_;
};

/// Non-owning view of a sparse matrix.
class SparseOperator final : public LinearOperator {
public:
    explicit SparseOperator(const SparseMatrix& a) : a_(a) {}
    std::size_t rows() const override { return a_.rows(); }
    std::size_t cols() const override { return a_.cols(); }
    void apply(std::span<const double> x, std::span<double> y) const override { a_.multiply(x, y); }
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
        a_.multiply_transpose(y, x);
    }
    std::optional<double> fro_norm_sq() const override { return svt::fro_norm_sq(a_); }

private:
    const SparseMatrix& a_;
};

/// Aᵀ as an operator.
class TransposedOperator final : public LinearOperator {
public:
    explicit TransposedOperator(const LinearOperator& a) : a_(a) {}
    std::size_t rows() const override { return a_.cols(); }
    std::size_t cols() const override { return a_.rows(); }
    void apply(std::span<const double> x, std::span<double> y) const override { a_.apply_adjoint(x, y); }
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override { a_.apply(y, x); }
    std::optional<double> fro_norm_sq() const override { return a_.fro_norm_sq(); }

private:
    const LinearOperator& a_;
};

/// Forwards to another operator and counts products with A and Aᵀ.
class CountingOperator final : public LinearOperator {
public:
    explicit CountingOperator(const LinearOperator& a) : a_(a) {}
    std::size_t rows() const override { return a_.rows(); }
    std::size_t cols() const override { return a_.cols(); }
    void apply(std::span<const double> x, std::span<double> y) const override {
        ++count_;
        a_.apply(x, y);
    }
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
        ++count_;
        a_.apply_adjoint(y, x);
    }
    std::optional<double> fro_norm_sq() const override { return a_.fro_norm_sq(); }

    std::uint64_t count() const { return count_.load(); }

private:
    const LinearOperator& a_;
    mutable std::atomic<std::uint64_t> count_{0};
};

}  // namespace svt
