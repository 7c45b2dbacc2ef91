#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "svt/decomp.hpp"
#include "svt/dense.hpp"
#include "svt/linear_operator.hpp"

namespace svt {

/// Golub–Kahan–Lanczos factorization of an m×n operator with m ≤ n:
///
///     A V = U B,    Aᵀ U = V Bᵀ + f e_jᵀ
///
/// U is m×j, V is n×j, both with orthonormal columns, and B is j×j upper
/// triangular. B is bidiagonal for a fresh factorization; after a thick
/// restart its first `keep` columns are diagonal and column keep+1 carries the
/// coupling to the retained Ritz vectors. `f` is the pending residual; on an
/// empty factorization it holds the starting vector.
struct GklbFactorization {
    DenseMatrix u;
    DenseMatrix b;
    DenseMatrix v;
    Vector f;
    double estimated_norm = 0.0;
    bool rank_exhausted = false;

    std::size_t dim() const { return v.cols(); }
};

/// Starts an empty factorization from `start` (length n).
GklbFactorization gklb_start(Vector start);

/// Grows `state` to `target_dim` columns with full reorthogonalization.
///
/// A breakdown (‖f‖ or the new α at most eps·max(norm_floor, estimated norm))
/// continues from a fresh random direction orthogonal to the current basis.
/// If three such directions cannot be produced, `rank_exhausted` is set and
/// the factorization stops short.
void gklb_extend(const LinearOperator& op, GklbFactorization& state, std::size_t target_dim, Rng& rng,
                 double norm_floor = 0.0);

/// Compresses `state` onto the Ritz vectors of its `keep` largest Ritz values.
/// The residual f is kept as the next right direction. Requires 1 ≤ keep < dim.
void thick_restart(GklbFactorization& state, std::size_t keep);
void thick_restart(GklbFactorization& state, std::size_t keep, const SmallSvd& ritz);

struct PsvdOptions {
    double tol = 1.4901161193847656e-08;  // sqrt(eps)
    std::size_t max_restarts = 1000;
    /// Subspace dimension; 0 selects min(k + 7, min(m, n)).
    std::size_t work_dim = 0;
    /// Start vector on the long side; empty selects a standard normal draw from `seed`.
    Vector p0;
    std::uint64_t seed = 20240501;
    /// Lower bound for the norm estimate used by the convergence and breakdown
    /// tests. Callers that work on a deflated operator pass the norm of the
    /// full operator here.
    double norm_floor = 0.0;
};

struct PsvdResult {
    DenseMatrix u;
    Vector s;
    DenseMatrix v;
    std::size_t converged = 0;
    double estimated_norm = 0.0;
    /// Largest Ritz value of the final factorization (a lower bound on ‖A‖₂).
    double largest_ritz = 0.0;
    std::size_t restarts = 0;
    /// Largest Ritz value after each factorization build.
    std::vector<double> ritz_history;
};

/// k largest singular triplets by thick-restarted GKLB.
///
/// Returns the longest prefix of the k leading Ritz triplets that satisfy
/// ‖Aᵀu_i − s_i v_i‖ ≤ tol·estimated_norm (the roles swap when m > n, the
/// product with A then being the exact side). May return fewer than k,
/// possibly none, when max_restarts is reached.
PsvdResult psvd(const LinearOperator& op, std::size_t k, const PsvdOptions& opts = {});

}  // namespace svt
