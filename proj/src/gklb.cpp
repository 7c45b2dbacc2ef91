#include "svt/gklb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svt {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Two passes of classical Gram–Schmidt against the columns of q. Returns the
// accumulated coefficients.
Vector orthogonalize(const DenseMatrix& q, std::span<double> w) {
    Vector coeff(q.cols(), 0.0);
    if (q.cols() == 0) return coeff;
    for (int pass = 0; pass < 2; ++pass) {
        Vector c = multiply_tn(q, w);
        for (std::size_t i = 0; i < c.size(); ++i) {
            axpy(-c[i], q.col(i), w);
            coeff[i] += c[i];
        }
    }
    return coeff;
}

// Unit vector orthogonal to the columns of q, or nullopt after three failed draws.
std::optional<Vector> random_direction(const DenseMatrix& q, std::size_t dim, Rng& rng) {
    if (q.cols() >= dim) return std::nullopt;
    std::normal_distribution<double> normal;
    const double min_ratio = std::sqrt(kEps);
    for (int attempt = 0; attempt < 3; ++attempt) {
        Vector r(dim);
        for (double& x : r) x = normal(rng);
        double before = norm2(r);
        orthogonalize(q, r);
        double after = norm2(r);
        if (before > 0.0 && after > min_ratio * before) {
            scale(1.0 / after, r);
            return r;
        }
    }
    return std::nullopt;
}

void fix_signs(DenseMatrix& u, DenseMatrix& v) {
    for (std::size_t j = 0; j < u.cols(); ++j) {
        auto uj = u.col(j);
        std::size_t imax = 0;
        for (std::size_t i = 1; i < uj.size(); ++i)
            if (std::abs(uj[i]) > std::abs(uj[imax])) imax = i;
        if (!uj.empty() && uj[imax] < 0.0) {
            scale(-1.0, uj);
            scale(-1.0, v.col(j));
        }
    }
}

PsvdResult psvd_short_side(const LinearOperator& op, std::size_t k, const PsvdOptions& opts) {
    const std::size_t m = op.rows();
    const std::size_t n = op.cols();
    const std::size_t mn = m;
    if (k < 1 || k > mn) throw std::invalid_argument("psvd: requires 1 <= k <= min(m, n)");
    if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw std::invalid_argument("psvd: tol must lie in (0, 1)");
    if (opts.max_restarts < 1) throw std::invalid_argument("psvd: max_restarts must be positive");

    std::size_t work = opts.work_dim ? opts.work_dim : k + 7;
    work = std::clamp(work, k, mn);

    Rng rng(opts.seed);
    Vector start = opts.p0;
    if (start.empty()) {
        std::normal_distribution<double> normal;
        start.resize(n);
        for (double& x : start) x = normal(rng);
    } else if (start.size() != n) {
        throw std::invalid_argument("psvd: p0 has the wrong length");
    }

    GklbFactorization state = gklb_start(std::move(start));
    PsvdResult out;
    double est = opts.norm_floor;

    for (std::size_t cycle = 0;; ++cycle) {
        gklb_extend(op, state, work, rng, opts.norm_floor);
        const std::size_t j = state.dim();
        if (j == 0) {
            out.u = DenseMatrix(m, 0);
            out.v = DenseMatrix(n, 0);
            out.estimated_norm = est;
            out.restarts = cycle;
            return out;
        }

        SmallSvd ritz = small_dense_svd(state.b);
        est = std::max({est, ritz.s[0], state.estimated_norm});
        out.largest_ritz = ritz.s[0];
        out.ritz_history.push_back(ritz.s[0]);

        const double beta = norm2(state.f);
        const std::size_t want = std::min(k, j);
        std::size_t conv = 0;
        while (conv < want && beta * std::abs(ritz.u(j - 1, conv)) <= opts.tol * est) ++conv;

        const bool done = conv == k || cycle + 1 >= opts.max_restarts || state.rank_exhausted;
        if (done) {
            out.converged = conv;
            out.s.assign(ritz.s.begin(), ritz.s.begin() + conv);
            out.u = multiply(state.u, leading_columns(ritz.u, conv));
            out.v = multiply(state.v, leading_columns(ritz.v, conv));
            fix_signs(out.u, out.v);
            out.estimated_norm = est;
            out.restarts = cycle;
            return out;
        }

        std::size_t keep = std::min(k + 3, work >= 3 ? work - 3 : 0);
        if (keep < k) keep = std::min(k, j - 1);
        if (keep >= 1) {
            thick_restart(state, keep, ritz);
        } else {
            // one-dimensional workspace: start over from the best right Ritz vector
            Vector best = multiply(state.v, ritz.v.col(0));
            double keep_norm = state.estimated_norm;
            state = gklb_start(std::move(best));
            state.estimated_norm = keep_norm;
        }
    }
}

}  // namespace

GklbFactorization gklb_start(Vector start) {
    GklbFactorization s;
    s.f = std::move(start);
    return s;
}

void gklb_extend(const LinearOperator& op, GklbFactorization& state, std::size_t target_dim, Rng& rng,
                 double norm_floor) {
    const std::size_t m = op.rows();
    const std::size_t n = op.cols();
    if (target_dim > std::min(m, n)) throw std::invalid_argument("gklb_extend: target_dim exceeds min(m, n)");
    if (state.f.size() != n) throw std::invalid_argument("gklb_extend: residual has the wrong length");
    if (state.dim() > 0 && (state.u.rows() != m || state.v.rows() != n))
        throw std::invalid_argument("gklb_extend: factorization does not match operator");

    while (state.dim() < target_dim && !state.rank_exhausted) {
        const std::size_t j = state.dim();
        const double norm_est = std::max(norm_floor, state.estimated_norm);

        Vector v = state.f;
        orthogonalize(state.v, v);
        double beta = norm2(v);
        if (beta == 0.0 || (j > 0 && beta <= kEps * norm_est)) {
            auto r = random_direction(state.v, n, rng);
            if (!r) {
                state.rank_exhausted = true;
                return;
            }
            v = std::move(*r);
        } else {
            scale(1.0 / beta, v);
        }

        Vector w = matvec(op, v);
        Vector column = orthogonalize(state.u, w);
        double alpha = norm2(w);
        const double column_norm = norm2(column);
        if (alpha == 0.0 || alpha <= kEps * std::max(norm_est, column_norm)) {
            auto r = random_direction(state.u, m, rng);
            if (!r) {
                state.rank_exhausted = true;
                return;
            }
            w = std::move(*r);
            alpha = 0.0;
        } else {
            scale(1.0 / alpha, w);
        }
        column.push_back(alpha);

        DenseMatrix b(j + 1, j + 1);
        for (std::size_t c = 0; c < j; ++c)
            for (std::size_t r = 0; r <= c; ++r) b(r, c) = state.b(r, c);
        for (std::size_t r = 0; r <= j; ++r) b(r, j) = column[r];
        state.b = std::move(b);
        state.u.append_column(w);
        state.v.append_column(v);
        state.estimated_norm = std::max(state.estimated_norm, norm2(column));

        Vector f = rmatvec(op, w);
        orthogonalize(state.v, f);
        state.f = std::move(f);
    }
}

void thick_restart(GklbFactorization& state, std::size_t keep, const SmallSvd& ritz) {
    if (keep < 1 || keep >= state.dim())
        throw std::invalid_argument("thick_restart: requires 1 <= keep < dim");
    state.u = multiply(state.u, leading_columns(ritz.u, keep));
    state.v = multiply(state.v, leading_columns(ritz.v, keep));
    state.b = DenseMatrix(keep, keep);
    for (std::size_t i = 0; i < keep; ++i) state.b(i, i) = ritz.s[i];
    state.rank_exhausted = false;
}

void thick_restart(GklbFactorization& state, std::size_t keep) {
    if (keep < 1 || keep >= state.dim())
        throw std::invalid_argument("thick_restart: requires 1 <= keep < dim");
    thick_restart(state, keep, small_dense_svd(state.b));
}

PsvdResult psvd(const LinearOperator& op, std::size_t k, const PsvdOptions& opts) {
    if (op.rows() <= op.cols()) return psvd_short_side(op, k, opts);
    TransposedOperator t(op);
    PsvdResult r = psvd_short_side(t, k, opts);
    std::swap(r.u, r.v);
    fix_signs(r.u, r.v);
    return r;
}

}  // namespace svt
