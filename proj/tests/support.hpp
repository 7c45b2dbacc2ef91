#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "svt/decomp.hpp"
#include "svt/dense.hpp"

namespace svt::testing {

/// Random matrix with orthonormal columns.
inline DenseMatrix random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
    return qr_economy(random_normal(rows, cols, rng), rng).q;
}

/// P · diag(spectrum) · Qᵀ with random orthonormal P (m×r) and Q (n×r).
inline DenseMatrix with_spectrum(std::size_t m, std::size_t n, const Vector& spectrum, Rng& rng) {
    const std::size_t r = spectrum.size();
    DenseMatrix p = random_orthonormal(m, r, rng);
    DenseMatrix q = random_orthonormal(n, r, rng);
    return multiply_nt(scale_columns(p, spectrum), q);
}

/// U diag(s) Vᵀ of a dense SVD.
inline DenseMatrix low_rank_of(const SmallSvd& r) { return multiply_nt(scale_columns(r.u, r.s), r.v); }

inline DenseMatrix diagonal(const Vector& d) {
    DenseMatrix a(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = d[i];
    return a;
}

/// Values of `oracle` that are at least `cut`, descending.
inline Vector at_least(const Vector& oracle, double cut) {
    Vector out;
    for (double x : oracle)
        if (x >= cut) out.push_back(x);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

/// Greedy one-to-one matching of sorted value sets: every found value pairs
/// with a distinct oracle value within rel·scale. Returns the unmatched count
/// on either side.
inline std::size_t unmatched(Vector found, Vector oracle, double tol_abs) {
    std::sort(found.begin(), found.end(), std::greater<>());
    std::sort(oracle.begin(), oracle.end(), std::greater<>());
    std::vector<bool> used(oracle.size(), false);
    std::size_t missing = 0;
    for (double f : found) {
        std::size_t best = oracle.size();
        double gap = tol_abs;
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            if (used[i]) continue;
            double d = std::abs(oracle[i] - f);
            if (d <= gap) {
                gap = d;
                best = i;
            }
        }
        if (best == oracle.size()) ++missing;
        else used[best] = true;
    }
    for (bool u : used)
        if (!u) ++missing;
    return missing;
}

}  // namespace svt::testing
