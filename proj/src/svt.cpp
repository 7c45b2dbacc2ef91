#include "svt/svt.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <numeric>

#include "svt/blk_power.hpp"
#include "svt/gklb.hpp"
#include "svt/metrics.hpp"

namespace svt {

void ThresholdSpec::validate() const {
    if (sigma && energy) throw UsageError("sigma and energy thresholds cannot be combined");
    if (sigma && !(*sigma >= 0.0)) throw UsageError("sigma must be nonnegative");
    if (energy && !(*energy > 0.0 && *energy <= 1.0)) throw UsageError("energy must lie in (0, 1]");
    if (fro_norm_sq_override && !(*fro_norm_sq_override > 0.0))
        throw UsageError("Frobenius norm override must be positive");
}

DeflatedOperator::DeflatedOperator(const LinearOperator& base, const DenseMatrix& u_lock,
                                   const DenseMatrix& v_lock)
    : base_(base), lock_(base.rows() <= base.cols() ? u_lock : v_lock), left_(base.rows() <= base.cols()) {
    const std::size_t len = left_ ? base.rows() : base.cols();
    if (lock_.cols() > 0 && lock_.rows() != len)
        throw std::invalid_argument("DeflatedOperator: locked basis has the wrong length");
}

namespace {

// w -= Q (Qᵀ w)
void project_out(const DenseMatrix& q, std::span<double> w) {
    if (q.cols() == 0) return;
    Vector c = multiply_tn(q, w);
    for (std::size_t i = 0; i < c.size(); ++i) axpy(-c[i], q.col(i), w);
}

}  // namespace

void DeflatedOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (left_) {
        base_.apply(x, y);
        project_out(lock_, y);
    } else {
        Vector z(x.begin(), x.end());
        project_out(lock_, z);
        base_.apply(z, y);
    }
}

void DeflatedOperator::apply_adjoint(std::span<const double> y, std::span<double> x) const {
    if (left_) {
        Vector z(y.begin(), y.end());
        project_out(lock_, z);
        base_.apply_adjoint(z, x);
    } else {
        base_.apply_adjoint(y, x);
        project_out(lock_, x);
    }
}

bool criterion_c1(const DenseMatrix& v1, const DenseMatrix& v, const DenseMatrix& u1, const DenseMatrix& u,
                  std::size_t ell, std::size_t k) {
    if (ell == 0) return false;
    double worst = 0.0;
    if (v1.cols() > 0 && v.cols() > 0) worst = std::max(worst, max_abs(multiply_tn(v1, v)));
    if (u1.cols() > 0 && u.cols() > 0) worst = std::max(worst, max_abs(multiply_tn(u1, u)));
    return worst > kSqrtEps / static_cast<double>(ell + k);
}

bool criterion_c2(std::span<const double> s_new, std::span<const double> s_acc) {
    if (s_new.empty() || s_acc.empty()) return false;
    double lo = *std::min_element(s_new.begin(), s_new.end());
    double hi = *std::max_element(s_acc.begin(), s_acc.end());
    return lo < hi * kSqrtEps;
}

double energy_fraction(std::span<const double> s, double fro_norm_sq) {
    if (!(fro_norm_sq > 0.0)) throw std::invalid_argument("energy_fraction: norm must be positive");
    double sum = 0.0;
    for (double x : s) sum += x * x;
    return std::clamp(sum / fro_norm_sq, 0.0, 1.0 + 1e-12);
}

namespace {

PartialSvd take(const PartialSvd& p, std::size_t count) {
    PartialSvd out = p;
    count = std::min(count, p.size());
    out.s.resize(count);
    out.u.resize_cols(count);
    out.v.resize_cols(count);
    return out;
}

std::size_t energy_prefix(std::span<const double> s, double energy, double fro_norm_sq) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        sum += s[i] * s[i];
        if (std::min(sum / fro_norm_sq, 1.0 + 1e-12) >= energy) return i + 1;
    }
    return s.size();
}

}  // namespace

PartialSvd truncate_threshold(const PartialSvd& p, const ThresholdSpec& spec, double fro_norm_sq) {
    if (spec.sigma) {
        std::size_t count = 0;
        while (count < p.size() && p.s[count] >= *spec.sigma) ++count;
        return take(p, count);
    }
    if (spec.energy) {
        double fro = spec.fro_norm_sq_override.value_or(fro_norm_sq);
        if (!(fro > 0.0)) throw UsageError("energy truncation needs a positive Frobenius norm");
        return take(p, energy_prefix(p.s, *spec.energy, fro));
    }
    return p;
}

namespace {

struct Triplets {
    DenseMatrix u;
    Vector s;
    DenseMatrix v;

    std::size_t size() const { return s.size(); }
    double max() const { return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end()); }

    Triplets select(std::span<const std::size_t> idx) const {
        Triplets t;
        t.u = select_columns(u, idx);
        t.v = select_columns(v, idx);
        for (std::size_t i : idx) t.s.push_back(s[i]);
        return t;
    }

    void sort_descending() {
        std::vector<std::size_t> order(size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
        *this = select(order);
    }
};

constexpr double kEps = std::numeric_limits<double>::epsilon();

class Driver {
public:
    Driver(const LinearOperator& a, const ThresholdSpec& spec, const SvtOptions& opts)
        : a_(a), spec_(spec), opts_(opts), rng_(opts.seed) {
        spec_.validate();
        if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw UsageError("tol must lie in (0, 1)");
        if (opts.k < 1) throw UsageError("k must be positive");
        if (opts.max_restarts < 1) throw UsageError("max_restarts must be positive");

        m_ = a.rows();
        n_ = a.cols();
        mn_ = std::min(m_, n_);
        if (mn_ == 0) throw UsageError("operator has an empty dimension");

        if (spec_.energy) {
            auto fro = spec_.fro_norm_sq_override ? spec_.fro_norm_sq_override : a.fro_norm_sq();
            if (!fro) throw UsageError("energy mode needs the Frobenius norm of the operator");
            fro_ = *fro;
            if (!(fro_ > 0.0)) throw UsageError("energy mode needs a nonzero operator");
        }

        std::size_t warm = opts.warm_start ? opts.warm_start->size() : 0;
        target_k_ = opts.k;
        kmax_ = opts.kmax ? *opts.kmax
                          : std::max<std::size_t>(std::min<std::size_t>(mn_ / 10, 100), std::max<std::size_t>(opts.k, 1));
        psvdmax_ = opts.psvdmax ? *opts.psvdmax : std::max(std::min(100 + warm, mn_), opts.k);
        if (kmax_ < 1) throw UsageError("kmax must be positive");
        if (psvdmax_ < 1) throw UsageError("psvdmax must be positive");
        k_ = std::min({opts.k, kmax_, mn_});
        incre_ = opts.incre;

        acc_.u = DenseMatrix(m_, 0);
        acc_.v = DenseMatrix(n_, 0);
        if (opts.warm_start) load_warm(*opts.warm_start);
    }

    PartialSvd run() {
        std::size_t stalled = 0;
        bool certifying = false;
        // A refreshed warm start (pwrsvd > 0) comes from a nearby operator and is
        // presumed complete; probes of size 1, 2, 4, ... test that before the
        // regular schedule takes over. An unrefreshed one is extended directly.
        std::size_t probe = acc_.size() > 0 && opts_.pwrsvd > 0 ? 1 : 0;
        while (acc_.size() < mn_) {
            const std::size_t ell = acc_.size();
            const std::size_t room = psvdmax_ > ell ? psvdmax_ - ell : 0;
            const std::size_t want = certifying ? 1 : probe > 0 ? probe : k_;
            std::size_t kreq = std::min({want, mn_ - ell, room});
            if (kreq == 0) return finish(SvtFlag::psvdmax_reached);

            IterationRecord rec;
            rec.ell = ell;
            rec.k = kreq;
            rec.incre = incre_;
            rec.certify = certifying || probe > 0;

            DeflatedOperator ad(a_, acc_.u, acc_.v);
            PsvdOptions po;
            po.tol = opts_.tol;
            po.max_restarts = opts_.max_restarts;
            po.seed = rng_();
            po.norm_floor = acc_.max();
            PsvdResult res = call_psvd(ad, kreq, po);
            if (res.converged == 0) {
                po.max_restarts *= 2;
                po.work_dim = std::min(kreq + 7 + incre_, mn_);
                res = call_psvd(ad, kreq, po);
            }
            rec.returned = res.converged;
            if (res.converged > 0) {
                rec.new_max = res.s.front();
                rec.new_min = res.s.back();
            }

            const double scale_ = std::max(acc_.max(), res.largest_ritz);
            const double top = res.converged > 0 ? res.s.front() : res.largest_ritz;
            const bool exhausted = top <= kSqrtEps * scale_;

            if (rec.certify && (exhausted || !reaches_cutoff(top))) {
                log(rec);
                return finish(SvtFlag::success);
            }
            if (exhausted) {
                log(rec);
                return finish(SvtFlag::success);
            }
            if (res.converged == 0) {
                log(rec);
                return finish(SvtFlag::psvd_failed);
            }

            rec.c1 = criterion_c1(res.v, acc_.v, res.u, acc_.u, ell, kreq);
            rec.c2 = criterion_c2(res.s, acc_.s);
            rec.c3 = res.converged < kreq;
            if (rec.c1 || rec.c2 || rec.c3 || opts_.pwrsvd > 0) {
                rec.merged = true;
                merge(res);
            } else {
                append(res);
            }
            log(rec);

            stalled = acc_.size() > ell ? 0 : stalled + 1;
            if (stalled >= kMaxStall) return finish(SvtFlag::psvd_failed);

            if (threshold_met()) {
                // a batch that stayed below the cutoff is itself the certificate
                if (!reaches_cutoff(res.s.front())) return finish(SvtFlag::success);
                certifying = true;
                continue;
            }
            certifying = false;
            if (acc_.size() >= psvdmax_) return finish(SvtFlag::psvdmax_reached);
            if (probe > 0) {
                probe *= 2;
                if (probe >= k_) probe = 0;
                continue;
            }
            k_ = std::min(k_ + incre_, kmax_);
            incre_ *= 2;
        }
        return finish(SvtFlag::success);
    }

private:
    static constexpr std::size_t kMaxStall = 5;

    PsvdResult call_psvd(const LinearOperator& op, std::size_t k, const PsvdOptions& po) {
        ++psvd_calls_;
        return psvd(op, k, po);
    }

    void load_warm(const PartialSvd& w) {
        if (w.u.cols() != w.size() || w.v.cols() != w.size())
            throw UsageError("warm start: U, S, V sizes disagree");
        if (w.size() > 0 && (w.u.rows() != m_ || w.v.rows() != n_))
            throw UsageError("warm start: bases do not match the operator dimensions");
        if (w.size() > mn_) throw UsageError("warm start: more triplets than min(m, n)");
        if (w.size() == 0) return;
        acc_.u = w.u;
        acc_.v = w.v;
        acc_.s = w.s;
        if (opts_.pwrsvd > 0) {
            BlkPowerResult r = blk_svd_power(a_, acc_.v, acc_.u, opts_.pwrsvd, rng_);
            acc_ = Triplets{std::move(r.u), std::move(r.s), std::move(r.v)};
            drop_negligible();
            polished_ = true;
        }
        acc_.sort_descending();
    }

    void append(const PsvdResult& res) {
        acc_.u = hcat(acc_.u, res.u);
        acc_.v = hcat(acc_.v, res.v);
        acc_.s.insert(acc_.s.end(), res.s.begin(), res.s.end());
        acc_.sort_descending();
        polished_ = false;
    }

    void merge(const PsvdResult& res) {
        DenseMatrix v = hcat(acc_.v, res.v);
        DenseMatrix u = hcat(acc_.u, res.u);
        // only a nearly dependent seed block can produce spurious directions
        const bool suspect = orthogonality_error(m_ <= n_ ? u : v, DenseMatrix(0, 0)) > 0.5;
        BlkPowerResult r = blk_svd_power(a_, v, u, std::max<std::size_t>(1, opts_.pwrsvd), rng_);
        acc_ = Triplets{std::move(r.u), std::move(r.s), std::move(r.v)};
        drop_negligible();
        if (suspect) drop_unconverged();
        acc_.sort_descending();
        polished_ = true;
    }

    // C2 post-filter: values below max(s)·sqrt(eps) are mapped zeros.
    void drop_negligible() {
        const double floor = acc_.max() * kSqrtEps;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < acc_.size(); ++i)
            if (acc_.s[i] > floor) keep.push_back(i);
        if (keep.size() != acc_.size()) acc_ = acc_.select(keep);
    }

    // After a merge one side holds exactly; the other side's residual decides
    // whether a triplet is reliable (columns refilled by QR are not).
    void drop_unconverged() {
        if (acc_.size() == 0) return;
        const double bound = 2.0 * opts_.tol * acc_.max();
        std::vector<std::size_t> keep;
        Vector w;
        for (std::size_t i = 0; i < acc_.size(); ++i) {
            if (m_ <= n_) {
                w = rmatvec(a_, acc_.u.col(i));
                axpy(-acc_.s[i], acc_.v.col(i), w);
            } else {
                w = matvec(a_, acc_.v.col(i));
                axpy(-acc_.s[i], acc_.u.col(i), w);
            }
            if (norm2(w) <= bound) keep.push_back(i);
        }
        if (keep.size() != acc_.size()) acc_ = acc_.select(keep);
    }

    bool threshold_met() const {
        if (acc_.size() == 0) return false;
        if (spec_.sigma) return acc_.s.back() < sigma_floor();
        if (spec_.energy) return energy_fraction(acc_.s, fro_) >= *spec_.energy;
        return acc_.size() >= target_k_;
    }

    // Whether the deflated operator's largest value `top` could still belong
    // in the output, so that copies of it may have been missed.
    bool reaches_cutoff(double top) const {
        if (spec_.sigma) return top >= sigma_floor();
        return top > cutoff() + opts_.tol * acc_.max();
    }

    // sigma less a few ulps of the largest value, so that a computed copy of
    // a singular value equal to sigma still counts as >= sigma.
    double sigma_floor() const { return *spec_.sigma - 16.0 * kEps * acc_.max(); }

    // Smallest value that the final output may contain.
    double cutoff() const {
        if (spec_.sigma) return *spec_.sigma;
        if (spec_.energy) return acc_.s[energy_prefix(acc_.s, *spec_.energy, fro_) - 1];
        return acc_.s[std::min(target_k_, acc_.size()) - 1];
    }

    PartialSvd finish(SvtFlag flag) {
        // numerically zero values never reach the output
        const double floor = acc_.max() * kSqrtEps;
        std::size_t positive = 0;
        while (positive < acc_.size() && acc_.s[positive] > floor) ++positive;
        const double sigma_cut = spec_.sigma ? sigma_floor() : 0.0;
        const bool met = threshold_met();

        PartialSvd out;
        out.u = std::move(acc_.u);
        out.s = std::move(acc_.s);
        out.v = std::move(acc_.v);
        out = take(out, positive);

        // a failed certification still returns a thresholded output
        if (flag == SvtFlag::success || (flag == SvtFlag::psvd_failed && met)) {
            if (spec_.sigma) out = truncate_threshold(out, ThresholdSpec::by_sigma(sigma_cut));
            else if (spec_.energy) out = truncate_threshold(out, spec_, fro_);
            else out = take(out, target_k_);
            if (flag == SvtFlag::success && spec_.sigma && out.size() == 0) flag = SvtFlag::none_above_sigma;
        } else if (flag == SvtFlag::psvdmax_reached) {
            out = take(out, psvdmax_);
        }
        if (flag != SvtFlag::none_above_sigma && !polished_ && out.size() > 0) polish(out);
        if (flag == SvtFlag::none_above_sigma) {
            out.u = DenseMatrix(m_, 0);
            out.v = DenseMatrix(n_, 0);
            out.s.clear();
        }
        out.flag = flag;
        out.psvd_calls = psvd_calls_;
        out.trace = std::move(trace_);
        return out;
    }

    // Appended triplets are exact only against the deflated operator; one
    // block power pass makes the output one-sided again.
    void polish(PartialSvd& out) {
        BlkPowerResult r = blk_svd_power(a_, out.v, out.u, 1, rng_);
        Triplets t{std::move(r.u), std::move(r.s), std::move(r.v)};
        const double floor = t.max() * kSqrtEps;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t.s[i] > floor) keep.push_back(i);
        t = t.select(keep);
        t.sort_descending();
        out.u = std::move(t.u);
        out.s = std::move(t.s);
        out.v = std::move(t.v);
    }

    void log(const IterationRecord& rec) {
        trace_.push_back(rec);
        if (!opts_.display) return;
        std::ostream& os = opts_.log ? *opts_.log : std::cerr;
        os << "svt: ell=" << rec.ell << " k=" << rec.k << " incre=" << rec.incre << " returned=" << rec.returned;
        if (rec.returned > 0) os << " new=[" << rec.new_min << ", " << rec.new_max << "]";
        if (rec.c1) os << " C1";
        if (rec.c2) os << " C2";
        if (rec.c3) os << " C3";
        if (rec.merged) os << " merged";
        if (rec.certify) os << " certify";
        os << " total=" << acc_.size() << '\n';
    }

    const LinearOperator& a_;
    ThresholdSpec spec_;
    const SvtOptions& opts_;
    Rng rng_;

    std::size_t m_ = 0, n_ = 0, mn_ = 0;
    double fro_ = 0.0;
    std::size_t target_k_ = 0, kmax_ = 0, psvdmax_ = 0, k_ = 0, incre_ = 0;
    std::size_t psvd_calls_ = 0;
    bool polished_ = false;
    Triplets acc_;
    std::vector<IterationRecord> trace_;
};

}  // namespace

PartialSvd svt_run(const LinearOperator& a, const ThresholdSpec& spec, const SvtOptions& opts) {
    CountingOperator counted(a);
    PartialSvd out = Driver(counted, spec, opts).run();
    out.matvecs = counted.count();
    return out;
}

PartialSvd svt_run(const SparseMatrix& a, const ThresholdSpec& spec, const SvtOptions& opts) {
    return svt_run(SparseOperator(a), spec, opts);
}

PartialSvd svt_run(const DenseMatrix& a, const ThresholdSpec& spec, const SvtOptions& opts) {
    return svt_run(DenseOperator(a), spec, opts);
}

}  // namespace svt
