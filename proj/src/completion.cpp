#include "svt/completion.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <utility>

#include "svt/gklb.hpp"
#include "svt/metrics.hpp"

namespace svt {

void ObservedMatrix::validate() const {
    if (omega.empty()) throw std::invalid_argument("ObservedMatrix: no observed entries");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& t : omega) {
        if (t.row >= m || t.col >= n) throw std::invalid_argument("ObservedMatrix: index out of bounds");
        if (!std::isfinite(t.value)) throw std::invalid_argument("ObservedMatrix: non-finite value");
        if (!seen.emplace(t.row, t.col).second) throw std::invalid_argument("ObservedMatrix: duplicate index");
    }
}

void SvtMcParams::validate() const {
    if (tau && !(*tau > 0.0)) throw std::invalid_argument("SvtMcParams: tau must be positive");
    if (delta && !(*delta > 0.0)) throw std::invalid_argument("SvtMcParams: delta must be positive");
    if (!(tol_outer > 0.0)) throw std::invalid_argument("SvtMcParams: tol_outer must be positive");
    if (max_outer < 1) throw std::invalid_argument("SvtMcParams: max_outer must be positive");
    if (k0 < 1 || ell_incre < 1) throw std::invalid_argument("SvtMcParams: k0 and ell_incre must be positive");
    if (!(psvd_tol > 0.0 && psvd_tol < 1.0)) throw std::invalid_argument("SvtMcParams: psvd_tol must lie in (0, 1)");
}

DenseMatrix low_rank(const DenseMatrix& u, std::span<const double> s, const DenseMatrix& v) {
    return multiply_nt(scale_columns(u, s), v);
}

PartialSvd shrink(const LinearOperator& y, double tau, const SvtOptions& opts) {
    PartialSvd p = svt_run(y, ThresholdSpec::by_sigma(tau), opts);
    for (double& s : p.s) s = std::max(0.0, s - tau);
    return p;
}

namespace {

// X on the sparsity pattern of `pattern`, in CSR order.
Vector sample(const SparseMatrix& pattern, const DenseMatrix& u, std::span<const double> s,
              const DenseMatrix& v) {
    Vector out(pattern.nnz(), 0.0);
    if (s.empty()) return out;
    auto rp = pattern.row_ptr();
    auto ci = pattern.col_idx();
    Vector us(s.size());
    for (std::size_t i = 0; i + 1 < rp.size(); ++i) {
        for (std::size_t r = 0; r < s.size(); ++r) us[r] = u(i, r) * s[r];
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
            double x = 0.0;
            for (std::size_t r = 0; r < s.size(); ++r) x += us[r] * v(ci[p], r);
            out[p] = x;
        }
    }
    return out;
}

}  // namespace

CompletionResult svt_mc_complete(const ObservedMatrix& obs, const SvtMcParams& params) {
    obs.validate();
    params.validate();

    const double mn = static_cast<double>(obs.m) * static_cast<double>(obs.n);
    CompletionResult out;
    out.tau = params.tau.value_or(5.0 * std::sqrt(mn));
    out.delta = params.delta.value_or(1.2 * mn / static_cast<double>(obs.omega.size()));
    out.u = DenseMatrix(obs.m, 0);
    out.v = DenseMatrix(obs.n, 0);

    const SparseMatrix m_omega(obs.m, obs.n, obs.omega);
    const Vector observed(m_omega.values().begin(), m_omega.values().end());
    const double observed_norm = norm2(observed);

    if (observed_norm == 0.0) {
        out.iterations = 1;
        out.converged = true;
        out.history.push_back({});
        return out;
    }

    Rng rng(params.seed);
    std::ostream& log = params.log ? *params.log : std::cerr;

    // kicking: skip the iterations during which shrink_tau(Y) would vanish
    SparseMatrix y = m_omega;
    {
        PsvdOptions po;
        po.seed = rng();
        const double top = psvd(SparseOperator(m_omega), 1, po).s.at(0);
        const double kick = std::max(1.0, std::ceil(out.tau / (out.delta * top)));
        for (double& x : y.values()) x *= kick * out.delta;
    }

    std::optional<PartialSvd> previous;
    std::size_t last_rank = 0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t above_best = 0;

    for (std::size_t it = 1; it <= params.max_outer; ++it) {
        SvtOptions so;
        so.tol = params.psvd_tol;
        so.incre = params.ell_incre;
        so.seed = rng();
        if (params.warm_start && previous && previous->size() > 0) {
            so.k = params.k0;
            so.pwrsvd = params.pwrsvd;
            so.warm_start = std::move(previous);
        } else {
            so.k = std::max(params.k0, last_rank + 1);
        }
        so.k = std::min(so.k, std::min(obs.m, obs.n));
        previous.reset();

        PartialSvd x = shrink(SparseOperator(y), out.tau, so);
        out.matvecs += x.matvecs;

        Vector xs = sample(m_omega, x.u, x.s, x.v);
        Vector diff = observed;
        axpy(-1.0, xs, diff);
        const double residual = norm2(diff) / observed_norm;

        McIteration rec;
        rec.rank = x.size();
        rec.residual = residual;
        rec.matvecs = x.matvecs;
        rec.flag = x.flag;
        out.history.push_back(rec);
        if (params.display)
            log << "svt-mc: iter=" << it << " rank=" << rec.rank << " residual=" << residual
                << " matvecs=" << rec.matvecs << " flag=" << static_cast<int>(rec.flag) << '\n';

        out.iterations = it;
        out.residual = residual;
        last_rank = x.size();

        // the warm start holds the unshrunk values of Y
        PartialSvd unshrunk = x;
        for (double& s : unshrunk.s) s += out.tau;
        out.u = std::move(x.u);
        out.s = std::move(x.s);
        out.v = std::move(x.v);
        previous = std::move(unshrunk);

        if (residual <= params.tol_outer) {
            out.converged = true;
            return out;
        }

        best = std::min(best, residual);
        above_best = residual > 10.0 * best ? above_best + 1 : 0;
        if (above_best >= 20)
            throw DivergenceError("svt-mc: residual stayed 10x above its minimum for 20 iterations");

        auto yv = y.values();
        for (std::size_t p = 0; p < yv.size(); ++p) yv[p] += out.delta * diff[p];
    }
    return out;
}

namespace {

CompressionResult compress(const LinearOperator& op, double fro_sq, double energy, const SvtOptions& opts) {
    if (!(energy > 0.0 && energy <= 1.0)) throw UsageError("energy must lie in (0, 1]");
    CompressionResult out;
    out.psvd = svt_run(op, ThresholdSpec::by_energy(energy, fro_sq), opts);
    out.energy = out.psvd.size() > 0 ? energy_fraction(out.psvd.s, fro_sq) : 0.0;
    out.nrmse = std::sqrt(std::max(0.0, 1.0 - out.energy));
    return out;
}

}  // namespace

CompressionResult compress_energy(const DenseMatrix& m, double energy, const SvtOptions& opts) {
    const double fro_sq = fro_norm_sq(m);
    if (!(fro_sq > 0.0)) throw UsageError("cannot compress a zero matrix");
    CompressionResult out = compress(DenseOperator(m), fro_sq, energy, opts);
    out.direct_nrmse = reconstruction_error(m, out.psvd.u, out.psvd.s, out.psvd.v) / std::sqrt(fro_sq);
    return out;
}

CompressionResult compress_energy(const SparseMatrix& m, double energy, const SvtOptions& opts) {
    const double fro_sq = fro_norm_sq(m);
    if (!(fro_sq > 0.0)) throw UsageError("cannot compress a zero matrix");
    return compress(SparseOperator(m), fro_sq, energy, opts);
}

}  // namespace svt
