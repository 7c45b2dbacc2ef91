#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "svt/dense.hpp"
#include "svt/sparse.hpp"
#include "svt/svt.hpp"

namespace svt {

/// Entries of an m×n matrix known on the index set Ω.
struct ObservedMatrix {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<Triplet> omega;

    /// Throws std::invalid_argument on duplicate or out-of-range indices, or an empty Ω.
    void validate() const;
};

struct SvtMcParams {
    /// Shrinkage threshold; default 5·sqrt(m·n).
    std::optional<double> tau;
    /// Step size; default 1.2·m·n/|Ω|.
    std::optional<double> delta;
    /// Stop once ‖P_Ω(M − X)‖_F / ‖P_Ω(M)‖_F falls to this level.
    double tol_outer = 1e-3;
    std::size_t max_outer = 500;
    /// Requested triplets per inner call, and the increment between calls.
    std::size_t k0 = 6;
    std::size_t ell_incre = 5;
    double psvd_tol = 1e-8;
    /// Reuse the previous iteration's triplets, refreshed by `pwrsvd` block power steps.
    bool warm_start = true;
    std::size_t pwrsvd = 1;
    std::uint64_t seed = 20240501;
    bool display = false;
    std::ostream* log = nullptr;

    void validate() const;
};

struct McIteration {
    std::size_t rank = 0;       // values above tau
    double residual = 0.0;      // relative, on Ω
    std::uint64_t matvecs = 0;  // products with Y in this iteration's svt_run
    SvtFlag flag = SvtFlag::success;
};

/// X = U diag(s) Vᵀ, with s already shrunk by tau.
struct CompletionResult {
    DenseMatrix u;
    Vector s;
    DenseMatrix v;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    double tau = 0.0;
    double delta = 0.0;
    std::uint64_t matvecs = 0;
    std::vector<McIteration> history;

    std::size_t rank() const { return s.size(); }
};

/// The iterate residual stayed far above its best value for too long.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Singular value thresholding for matrix completion:
///
///     X ← shrink_tau(Y),   Y ← Y + delta·P_Ω(M − X)
///
/// Y is held as a sparse matrix on Ω. shrink_tau calls svt_run with
/// sigma = tau and soft-thresholds the returned values.
CompletionResult svt_mc_complete(const ObservedMatrix& obs, const SvtMcParams& params = {});

/// Σ (s_i − tau)_+ u_i v_iᵀ through svt_run in sigma mode. The returned
/// values are already shrunk; flag and telemetry come from svt_run.
PartialSvd shrink(const LinearOperator& y, double tau, const SvtOptions& opts);

/// U diag(s) Vᵀ
DenseMatrix low_rank(const DenseMatrix& u, std::span<const double> s, const DenseMatrix& v);

struct CompressionResult {
    PartialSvd psvd;
    double energy = 0.0;
    /// sqrt(max(0, 1 − energy))
    double nrmse = 0.0;
    /// ‖M − U diag(s) Vᵀ‖_F / ‖M‖_F, when M was given densely.
    std::optional<double> direct_nrmse;

    std::size_t k() const { return psvd.size(); }
};

/// Smallest rank-k truncation holding `energy` of ‖M‖_F².
CompressionResult compress_energy(const DenseMatrix& m, double energy, const SvtOptions& opts = {});
CompressionResult compress_energy(const SparseMatrix& m, double energy, const SvtOptions& opts = {});

}  // namespace svt
