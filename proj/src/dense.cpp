#include "svt/dense.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace svt {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void DenseMatrix::append_column(std::span<const double> c) {
    if (cols_ == 0) rows_ = c.size();
    if (c.size() != rows_) throw std::invalid_argument("append_column: length mismatch");
    values_.insert(values_.end(), c.begin(), c.end());
    ++cols_;
}

void DenseMatrix::resize_cols(std::size_t n) {
    n = std::min(n, cols_);
    values_.resize(rows_ * n);
    cols_ = n;
}

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) {
    // scaled accumulation guards against overflow in huge-norm inputs
    double scale_ = 0.0, ssq = 1.0;
    for (double v : x) {
        if (v == 0.0) continue;
        double a = std::abs(v);
        if (scale_ < a) {
            ssq = 1.0 + ssq * (scale_ / a) * (scale_ / a);
            scale_ = a;
        } else {
            ssq += (a / scale_) * (a / scale_);
        }
    }
    return scale_ * std::sqrt(ssq);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
    for (double& v : x) v *= a;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
    return t;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        auto cj = c.col(j);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            double blj = b(l, j);
            if (blj != 0.0) axpy(blj, a.col(l), cj);
        }
    }
    return c;
}

DenseMatrix multiply_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("multiply_tn: dimension mismatch");
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot(a.col(i), b.col(j));
    return c;
}

DenseMatrix multiply_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("multiply_nt: dimension mismatch");
    DenseMatrix c(a.rows(), b.rows());
    for (std::size_t l = 0; l < a.cols(); ++l) {
        auto al = a.col(l);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double bjl = b(j, l);
            if (bjl != 0.0) axpy(bjl, al, c.col(j));
        }
    }
    return c;
}

Vector multiply(const DenseMatrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("multiply: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j)
        if (x[j] != 0.0) axpy(x[j], a.col(j), y);
    return y;
}

Vector multiply_tn(const DenseMatrix& a, std::span<const double> x) {
    if (a.rows() != x.size()) throw std::invalid_argument("multiply_tn: dimension mismatch");
    Vector y(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
    return y;
}

DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() == 0) return b;
    if (b.cols() == 0) return a;
    if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row mismatch");
    DenseMatrix c(a.rows(), a.cols() + b.cols());
    std::copy(a.values().begin(), a.values().end(), c.values().begin());
    std::copy(b.values().begin(), b.values().end(), c.values().begin() + a.values().size());
    return c;
}

DenseMatrix leading_columns(const DenseMatrix& a, std::size_t n) {
    DenseMatrix c = a;
    c.resize_cols(n);
    return c;
}

DenseMatrix select_columns(const DenseMatrix& a, std::span<const std::size_t> idx) {
    DenseMatrix c(a.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        auto src = a.col(idx[j]);
        std::copy(src.begin(), src.end(), c.col(j).begin());
    }
    return c;
}

DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> d) {
    if (d.size() != a.cols()) throw std::invalid_argument("scale_columns: length mismatch");
    DenseMatrix c = a;
    for (std::size_t j = 0; j < a.cols(); ++j) scale(d[j], c.col(j));
    return c;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("subtract: dimension mismatch");
    DenseMatrix c = a;
    auto cv = c.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < cv.size(); ++i) cv[i] -= bv[i];
    return c;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.values()); }

double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace svt
