#include "svt/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace svt {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Apply H = I - 2 v vᵀ / (vᵀ v) to rows [offset, offset + v.size()) of each column of a.
void apply_reflector(std::span<const double> v, double vtv, DenseMatrix& a, std::size_t offset,
                     std::size_t first_col) {
    for (std::size_t j = first_col; j < a.cols(); ++j) {
        auto c = a.col(j).subspan(offset, v.size());
        double f = 2.0 * dot(v, c) / vtv;
        if (f != 0.0) axpy(-f, v, c);
    }
}

// Orthonormal completion: fills column `j` of `u` with a unit vector orthogonal
// to every column flagged in `filled`.
void complete_column(DenseMatrix& u, std::size_t j, const std::vector<bool>& filled) {
    const std::size_t m = u.rows();
    Vector best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < m; ++e) {
        Vector w(m, 0.0);
        w[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t p = 0; p < u.cols(); ++p)
                if (filled[p]) axpy(-dot(u.col(p), w), u.col(p), w);
        double nw = norm2(w);
        if (nw > best_norm) {
            best_norm = nw;
            best = std::move(w);
        }
        if (best_norm > 0.5) break;
    }
    scale(1.0 / best_norm, best);
    std::copy(best.begin(), best.end(), u.col(j).begin());
}

// One-sided Jacobi on a tall (rows ≥ cols) matrix.
SmallSvd jacobi_tall(const DenseMatrix& m) {
    const std::size_t n = m.cols();
    DenseMatrix w = m;
    DenseMatrix v = DenseMatrix::identity(n);

    double biggest = 0.0;
    for (std::size_t j = 0; j < n; ++j) biggest = std::max(biggest, norm2(w.col(j)));
    // columns this small are already zero to working precision
    const double negligible = kEps * kEps * biggest * biggest;

    constexpr int kMaxSweeps = 30;
    bool converged = n < 2;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        double worst = 0.0;
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                auto wp = w.col(p);
                auto wq = w.col(q);
                double a = dot(wp, wp);
                double b = dot(wq, wq);
                double c = dot(wp, wq);
                if (c == 0.0 || std::min(a, b) <= negligible) continue;
                double scale_ = std::sqrt(a) * std::sqrt(b);
                double rel = std::abs(c) / scale_;
                if (rel <= kEps) continue;
                worst = std::max(worst, rel);
                rotated = true;

                double zeta = (b - a) / (2.0 * c);
                double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                double cs = 1.0 / std::hypot(1.0, t);
                double sn = cs * t;
                for (std::size_t i = 0; i < wp.size(); ++i) {
                    double x = wp[i], y = wq[i];
                    wp[i] = cs * x - sn * y;
                    wq[i] = sn * x + cs * y;
                }
                auto vp = v.col(p);
                auto vq = v.col(q);
                for (std::size_t i = 0; i < n; ++i) {
                    double x = vp[i], y = vq[i];
                    vp[i] = cs * x - sn * y;
                    vq[i] = sn * x + cs * y;
                }
            }
        }
        // a last sweep that only touches eps-level pairs is accepted
        converged = !rotated || worst <= 10.0 * kEps;
    }
    if (!converged) throw NumericError("small_dense_svd: Jacobi sweeps did not converge");

    Vector s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = norm2(w.col(j));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

    SmallSvd out;
    out.u = DenseMatrix(m.rows(), n);
    out.v = DenseMatrix(n, n);
    out.s.resize(n);
    std::vector<bool> filled(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t src = order[j];
        out.s[j] = s[src];
        std::copy(v.col(src).begin(), v.col(src).end(), out.v.col(j).begin());
        if (s[src] > 0.0 && s[src] * s[src] > negligible) {
            auto uj = out.u.col(j);
            std::copy(w.col(src).begin(), w.col(src).end(), uj.begin());
            scale(1.0 / s[src], uj);
            filled[j] = true;
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        if (!filled[j]) {
            complete_column(out.u, j, filled);
            filled[j] = true;
        }
    return out;
}

}  // namespace

QrResult qr_economy(const DenseMatrix& m, Rng& rng) {
    const std::size_t rows = m.rows();
    const std::size_t k = m.cols();
    if (rows < k) throw std::invalid_argument("qr_economy: requires rows >= cols");

    DenseMatrix a = m;
    double max_norm = 0.0;
    for (std::size_t j = 0; j < k; ++j) max_norm = std::max(max_norm, norm2(a.col(j)));
    const double threshold = static_cast<double>(rows) * kEps * max_norm;

    std::normal_distribution<double> normal;
    std::vector<Vector> reflectors(k);
    std::vector<double> vtv(k, 0.0);
    Vector diag(k, 0.0);

    for (std::size_t j = 0; j < k; ++j) {
        auto x = a.col(j).subspan(j);
        Vector v(x.begin(), x.end());
        double nx = norm2(v);
        bool deficient = nx <= threshold;
        if (deficient) {
            do {
                for (double& e : v) e = normal(rng);
                nx = norm2(v);
            } while (nx == 0.0);
        }
        double alpha = -std::copysign(nx, v[0]);
        v[0] -= alpha;
        vtv[j] = dot(v, v);
        diag[j] = deficient ? 0.0 : alpha;
        reflectors[j] = std::move(v);
        apply_reflector(reflectors[j], vtv[j], a, j, j + 1);
    }

    QrResult out;
    out.r = DenseMatrix(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) out.r(i, j) = a(i, j);
        out.r(j, j) = diag[j];
    }

    out.q = DenseMatrix(rows, k);
    for (std::size_t j = 0; j < k; ++j) out.q(j, j) = 1.0;
    for (std::size_t j = k; j-- > 0;) apply_reflector(reflectors[j], vtv[j], out.q, j, 0);

    for (std::size_t j = 0; j < k; ++j) {
        if (out.r(j, j) < 0.0) {
            for (std::size_t c = j; c < k; ++c) out.r(j, c) = -out.r(j, c);
            scale(-1.0, out.q.col(j));
        }
    }
    return out;
}

QrResult qr_economy(const DenseMatrix& m) {
    Rng rng(0x5eed);
    return qr_economy(m, rng);
}

SmallSvd small_dense_svd(const DenseMatrix& m) {
    for (double x : m.values())
        if (!std::isfinite(x)) throw std::invalid_argument("small_dense_svd: non-finite entry");
    if (m.rows() >= m.cols()) return jacobi_tall(m);
    SmallSvd t = jacobi_tall(transpose(m));
    return SmallSvd{std::move(t.v), std::move(t.s), std::move(t.u)};
}

DenseMatrix random_normal(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> normal;
    DenseMatrix a(rows, cols);
    for (double& x : a.values()) x = normal(rng);
    return a;
}

}  // namespace svt
