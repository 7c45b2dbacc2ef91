#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "svt/dense.hpp"
#include "svt/sparse.hpp"

namespace svt {

/// Parse failure carrying the 1-based line number of the offending input.
class MatrixMarketError : public std::runtime_error {
public:
    MatrixMarketError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads a real Matrix Market file (coordinate or array; general, symmetric or
/// skew-symmetric; real, integer or pattern). Symmetric storage is expanded.
/// Pattern entries are read as 1.0.
SparseMatrix mm_read(const std::filesystem::path& path);
SparseMatrix mm_read(std::istream& in);

/// Same as mm_read but returns a dense matrix.
DenseMatrix mm_read_dense(const std::filesystem::path& path);
DenseMatrix mm_read_dense(std::istream& in);

/// Coordinate, real, general.
void mm_write(const std::filesystem::path& path, const SparseMatrix& a);
void mm_write(std::ostream& out, const SparseMatrix& a);

/// Array, real, general (column-major).
void mm_write_dense(const std::filesystem::path& path, const DenseMatrix& a);
void mm_write_dense(std::ostream& out, const DenseMatrix& a);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace svt
