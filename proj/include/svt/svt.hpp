#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "svt/dense.hpp"
#include "svt/linear_operator.hpp"
#include "svt/sparse.hpp"

namespace svt {

/// Invalid combination of thresholds or options.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline const double kSqrtEps = std::sqrt(std::numeric_limits<double>::epsilon());

/// Exit condition: a singular value floor, an energy fraction, or neither
/// (plain top-k request).
struct ThresholdSpec {
    std::optional<double> sigma;
    std::optional<double> energy;
    /// ‖A‖_F² for energy mode when the operator cannot report it.
    std::optional<double> fro_norm_sq_override;

    static ThresholdSpec by_sigma(double sigma) { return {sigma, std::nullopt, std::nullopt}; }
    static ThresholdSpec by_energy(double energy, std::optional<double> fro_norm_sq = std::nullopt) {
        return {std::nullopt, energy, fro_norm_sq};
    }
    static ThresholdSpec top_k() { return {}; }

    /// Throws UsageError on a malformed threshold.
    void validate() const;
};

enum class SvtFlag : int {
    success = 0,           // threshold or energy satisfied
    psvd_failed = 1,       // psvd returned no converged triplets twice
    psvdmax_reached = 2,   // output size limit hit before the threshold
    none_above_sigma = 3,  // nothing at or above sigma; empty output
};

struct IterationRecord {
    std::size_t ell = 0;       // accumulated triplets before the call
    std::size_t k = 0;         // triplets requested
    std::size_t incre = 0;     // increment in effect
    std::size_t returned = 0;  // converged triplets returned by psvd
    bool c1 = false, c2 = false, c3 = false;
    bool merged = false;       // block power merge instead of append
    bool certify = false;      // k = 1 check that nothing at or above the cutoff remains
    double new_max = 0.0, new_min = 0.0;
};

/// Accumulated triplets A V ≈ U diag(s), plus the exit status.
struct PartialSvd {
    DenseMatrix u;
    Vector s;
    DenseMatrix v;
    SvtFlag flag = SvtFlag::success;

    std::uint64_t matvecs = 0;
    std::size_t psvd_calls = 0;
    std::vector<IterationRecord> trace;

    std::size_t size() const { return s.size(); }
};

struct SvtOptions {
    double tol = kSqrtEps;
    std::size_t k = 6;
    std::size_t incre = 5;
    /// Default: min(0.1·min(m, n), 100), at least k.
    std::optional<std::size_t> kmax;
    /// Default: max(min(100 + |S0|, min(m, n)), k).
    std::optional<std::size_t> psvdmax;
    std::size_t pwrsvd = 0;
    std::uint64_t seed = 20240501;
    bool display = false;
    std::ostream* log = nullptr;  // display target; std::cerr when null
    std::optional<PartialSvd> warm_start;
    /// Forwarded to psvd.
    std::size_t max_restarts = 1000;
};

/// A with one side projected out. For m ≤ n, A_d = (I − U Uᵀ) A; otherwise
/// A_d = A (I − V Vᵀ). The projection is applied inside every product.
class DeflatedOperator final : public LinearOperator {
public:
    /// `u_lock` is used when rows ≤ cols, `v_lock` otherwise; the unused one may be empty.
    DeflatedOperator(const LinearOperator& base, const DenseMatrix& u_lock, const DenseMatrix& v_lock);

    std::size_t rows() const override { return base_.rows(); }
    std::size_t cols() const override { return base_.cols(); }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

    bool deflates_left() const { return left_; }

private:
    const LinearOperator& base_;
    const DenseMatrix& lock_;
    bool left_;
};

/// Loss of orthogonality between new and accumulated bases:
/// max |V1ᵀV| or |U1ᵀU| above sqrt(eps)/(ell + k). False when ell = 0.
bool criterion_c1(const DenseMatrix& v1, const DenseMatrix& v, const DenseMatrix& u1, const DenseMatrix& u,
                  std::size_t ell, std::size_t k);

/// A mapped (numerically zero) value came back: min(s_new) < max(s_acc)·sqrt(eps).
bool criterion_c2(std::span<const double> s_new, std::span<const double> s_acc);

/// Σ s_i² / ‖A‖_F², clamped to [0, 1 + 1e-12].
double energy_fraction(std::span<const double> s, double fro_norm_sq);

/// Sigma mode keeps s_i ≥ sigma; energy mode keeps the shortest prefix that
/// reaches the energy level (everything if none does). Top-k specs return p unchanged.
PartialSvd truncate_threshold(const PartialSvd& p, const ThresholdSpec& spec, double fro_norm_sq = 0.0);

/// All singular triplets above a threshold by repeated psvd calls on a
/// deflated operator with block power repairs.
PartialSvd svt_run(const LinearOperator& a, const ThresholdSpec& spec, const SvtOptions& opts = {});
PartialSvd svt_run(const SparseMatrix& a, const ThresholdSpec& spec, const SvtOptions& opts = {});
PartialSvd svt_run(const DenseMatrix& a, const ThresholdSpec& spec, const SvtOptions& opts = {});

}  // namespace svt
