#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "svt/metrics.hpp"
#include "svt/svt.hpp"

using namespace svt;
using namespace svt::testing;

namespace {

DenseMatrix materialize(const LinearOperator& op) { return matmat(op, DenseMatrix::identity(op.cols())); }

PartialSvd make_partial(Vector s) {
    PartialSvd p;
    const std::size_t n = s.size();
    p.u = DenseMatrix::identity(n);
    p.v = DenseMatrix::identity(n);
    p.s = std::move(s);
    return p;
}

void check_values(const PartialSvd& p, const Vector& want, double rel) {
    REQUIRE(p.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(p.s[i] - want[i]) <= rel * want[i]);
}

}  // namespace

TEST_SUITE("svt") {

TEST_CASE("deflated operator with an empty lock is the operator") {
    Rng rng(1);
    DenseMatrix a = random_normal(5, 7, rng);
    DenseMatrix none(5, 0), nonev(7, 0);
    DenseOperator op(a);
    DeflatedOperator d(op, none, nonev);
    CHECK(frobenius_norm(subtract(materialize(d), a)) == 0.0);
}

TEST_CASE("deflated operator removes the locked direction") {
    DenseMatrix a = diagonal({5, 4, 3});
    DenseOperator op(a);
    DenseMatrix e1(3, 1);
    e1(0, 0) = 1.0;
    DeflatedOperator d(op, e1, DenseMatrix(3, 0));
    CHECK(d.deflates_left());
    Vector s = small_dense_svd(materialize(d)).s;
    CHECK(s[0] == doctest::Approx(4.0));
    CHECK(s[1] == doctest::Approx(3.0));
    CHECK(s[2] <= 1e-15);
}

TEST_CASE("deflated operator is adjoint consistent on both sides") {
    Rng rng(2);
    for (auto [m, n] : std::initializer_list<std::pair<std::size_t, std::size_t>>{{8, 12}, {12, 8}}) {
        DenseMatrix a = random_normal(m, n, rng);
        DenseOperator op(a);
        DenseMatrix ul = random_orthonormal(m, 3, rng);
        DenseMatrix vl = random_orthonormal(n, 3, rng);
        DeflatedOperator d(op, ul, vl);
        CHECK(d.deflates_left() == (m <= n));
        DenseMatrix fwd = materialize(d);
        DenseMatrix adj = transpose(rmatmat(d, DenseMatrix::identity(m)));
        CHECK(frobenius_norm(subtract(fwd, adj)) <= 1e-13);
        DenseMatrix want = m <= n ? subtract(a, multiply(ul, multiply_tn(ul, a)))
                                  : subtract(a, multiply_nt(multiply(a, vl), vl));
        CHECK(frobenius_norm(subtract(fwd, want)) <= 1e-13);
    }
}

TEST_CASE("criterion C1") {
    DenseMatrix v1(4, 1), v(4, 1), u1(3, 1), u(3, 1);
    v1(0, 0) = 1.0;
    v(1, 0) = 1.0;
    u1(0, 0) = 1.0;
    u(1, 0) = 1.0;
    CHECK_FALSE(criterion_c1(v1, v, u1, u, 10, 6));

    v1(1, 0) = 1e-9;
    CHECK(criterion_c1(v1, v, u1, u, 10, 6));
    CHECK_FALSE(criterion_c1(v1, v, u1, u, 0, 6));
    v1(1, 0) = 9e-10;
    CHECK_FALSE(criterion_c1(v1, v, u1, u, 10, 6));
    u1(1, 0) = -1e-9;
    CHECK(criterion_c1(v1, v, u1, u, 10, 6));
}

TEST_CASE("criterion C2") {
    CHECK_FALSE(criterion_c2(Vector{4, 3}, Vector{5}));
    CHECK(criterion_c2(Vector{4, 1e-10}, Vector{5}));
    CHECK_FALSE(criterion_c2(Vector{1e-10}, Vector{}));
}

TEST_CASE("energy_fraction") {
    CHECK(energy_fraction(Vector{4, 3}, 25.0) == 1.0);
    CHECK(energy_fraction(Vector{4}, 25.0) == doctest::Approx(0.64));
    CHECK(energy_fraction(Vector{}, 25.0) == 0.0);
    CHECK_THROWS_AS(energy_fraction(Vector{1}, 0.0), std::invalid_argument);
}

TEST_CASE("truncate_threshold") {
    PartialSvd p = truncate_threshold(make_partial({5, 4, 3, 2}), ThresholdSpec::by_sigma(3.0));
    CHECK(p.s == Vector{5, 4, 3});
    CHECK(p.u.cols() == 3);
    CHECK(p.v.cols() == 3);

    CHECK(truncate_threshold(make_partial({5, 4, 3}), ThresholdSpec::by_sigma(3.0)).s == Vector{5, 4, 3});
    CHECK(truncate_threshold(make_partial({4, 3}), ThresholdSpec::by_energy(0.6), 25.0).s == Vector{4});
    CHECK(truncate_threshold(make_partial({4, 3}), ThresholdSpec::by_energy(0.7), 25.0).s == Vector{4, 3});
    CHECK(truncate_threshold(make_partial({4, 3}), ThresholdSpec::by_energy(0.99), 100.0).s == Vector{4, 3});
    CHECK(truncate_threshold(make_partial({4, 3}), ThresholdSpec::top_k()).s == Vector{4, 3});
}

TEST_CASE("threshold validation") {
    ThresholdSpec both{1.0, 0.9, std::nullopt};
    CHECK_THROWS_AS(both.validate(), UsageError);
    CHECK_THROWS_AS(ThresholdSpec::by_sigma(-1.0).validate(), UsageError);
    CHECK_THROWS_AS(ThresholdSpec::by_energy(0.0).validate(), UsageError);
    CHECK_THROWS_AS(ThresholdSpec::by_energy(1.5).validate(), UsageError);
    CHECK_NOTHROW(ThresholdSpec::by_energy(1.0).validate());
    CHECK_NOTHROW(ThresholdSpec::by_sigma(0.0).validate());
}

TEST_CASE("svt_run usage errors") {
    DenseMatrix a = diagonal({5, 4, 3, 2, 1});
    DenseOperator op(a);
    CHECK_THROWS_AS(svt_run(a, ThresholdSpec{1.0, 0.9, std::nullopt}), UsageError);

    // a bare operator with no known norm cannot run in energy mode
    struct Opaque final : LinearOperator {
        const LinearOperator& base;
        explicit Opaque(const LinearOperator& b) : base(b) {}
        std::size_t rows() const override { return base.rows(); }
        std::size_t cols() const override { return base.cols(); }
        void apply(std::span<const double> x, std::span<double> y) const override { base.apply(x, y); }
        void apply_adjoint(std::span<const double> y, std::span<double> x) const override { base.apply_adjoint(y, x); }
    } opaque(op);
    CHECK_THROWS_AS(svt_run(opaque, ThresholdSpec::by_energy(0.9)), UsageError);
    PartialSvd p = svt_run(opaque, ThresholdSpec::by_energy(0.9, 55.0));
    CHECK(p.s.size() == 3);  // 25+16+9 = 50 ≥ 0.9·55

    SvtOptions bad;
    bad.tol = 1.0;
    CHECK_THROWS_AS(svt_run(a, ThresholdSpec::by_sigma(3.0), bad), UsageError);
    bad = {};
    bad.k = 0;
    CHECK_THROWS_AS(svt_run(a, ThresholdSpec::by_sigma(3.0), bad), UsageError);

    SvtOptions warm;
    PartialSvd w = make_partial({5, 4});
    warm.warm_start = w;  // 2×2 bases against a 5×5 operator
    CHECK_THROWS_AS(svt_run(a, ThresholdSpec::by_sigma(3.0), warm), UsageError);
}

TEST_CASE("diagonal examples") {
    DenseMatrix a = diagonal({5, 4, 3, 2, 1});
    PartialSvd p = svt_run(a, ThresholdSpec::by_sigma(3.0));
    CHECK(p.flag == SvtFlag::success);
    check_values(p, {5, 4, 3}, 1e-12);

    PartialSvd none = svt_run(a, ThresholdSpec::by_sigma(10.0));
    CHECK(none.flag == SvtFlag::none_above_sigma);
    CHECK(none.size() == 0);
    CHECK(none.u.cols() == 0);
    CHECK(none.v.cols() == 0);
    CHECK(none.u.rows() == 5);
}

TEST_CASE("sparse input and top-k mode") {
    SparseMatrix a(6, 8, {{0, 0, 6.0}, {1, 3, 5.0}, {2, 7, 4.0}, {3, 1, 3.0}, {4, 2, 2.0}, {5, 5, 1.0}});
    SvtOptions o;
    o.k = 2;
    PartialSvd p = svt_run(a, ThresholdSpec::top_k(), o);
    CHECK(p.flag == SvtFlag::success);
    check_values(p, {6, 5}, 1e-12);

    PartialSvd e = svt_run(a, ThresholdSpec::by_energy(0.6));
    // 36+25 = 61 ≥ 0.6·91
    check_values(e, {6, 5}, 1e-12);
}

TEST_CASE("values above a median threshold of a known spectrum") {
    Rng rng(3);
    Vector spectrum;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 80; ++i) spectrum.push_back(std::pow(10.0, 2.0 * u(rng) - 1.0));
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    const double sigma = 0.5 * (spectrum[39] + spectrum[40]);
    DenseMatrix a = with_spectrum(120, 100, spectrum, rng);
    SvtOptions o;
    o.tol = 1e-10;
    PartialSvd p = svt_run(a, ThresholdSpec::by_sigma(sigma), o);
    CHECK(p.flag == SvtFlag::success);
    check_values(p, at_least(spectrum, sigma), 1e-8);
}

TEST_CASE("oracle set equivalence with one-sided structure") {
    for (int t = 0; t < 12; ++t) {
        Rng rng(200 + t);
        std::uniform_int_distribution<std::size_t> dim(15, 120);
        const std::size_t m = dim(rng), n = dim(rng);
        DenseMatrix a = random_normal(m, n, rng);
        Vector oracle = small_dense_svd(a).s;
        const double sigma = oracle[std::min(m, n) / 4];
        SvtOptions o;
        o.tol = 1e-10;
        o.seed = 7 + static_cast<std::uint64_t>(t);
        PartialSvd p = svt_run(a, ThresholdSpec::by_sigma(sigma), o);
        CHECK(p.flag == SvtFlag::success);
        Vector want = at_least(oracle, sigma);
        CHECK(p.size() == want.size());
        CHECK(unmatched(p.s, oracle, 1e-10 * oracle[0]) == oracle.size() - p.size());
        DenseOperator op(a);
        const double ell = static_cast<double>(p.size());
        const double exact = m <= n ? left_residual(op, p.u, p.s, p.v) : right_residual(op, p.u, p.s, p.v);
        CHECK(exact <= 10.0 * o.tol * oracle[0] * std::sqrt(ell));
        CHECK(total_residual(op, p.u, p.s, p.v) <= 20.0 * o.tol * oracle[0] * std::sqrt(ell));
        CHECK(orthogonality_error(p.u, p.v) <= 1e-10);
    }
}

TEST_CASE("multiplicity fifty") {
    Rng rng(4);
    Vector spectrum(50, 2.0);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int i = 0; i < 50; ++i) spectrum.push_back(u(rng));
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    DenseMatrix a = with_spectrum(140, 120, spectrum, rng);
    PartialSvd p = svt_run(a, ThresholdSpec::by_sigma(1.5));
    CHECK(p.flag == SvtFlag::success);
    REQUIRE(p.size() == 50);
    for (double s : p.s) CHECK(std::abs(s - 2.0) <= 1e-8 * 2.0);
    CHECK(orthogonality_error(p.u, p.v) <= 1e-10);
}

TEST_CASE("warm start reproduces the cold value set") {
    Rng rng(5);
    Vector spectrum;
    for (int i = 0; i < 60; ++i) spectrum.push_back(10.0 * std::pow(0.93, i));
    DenseMatrix a = with_spectrum(90, 110, spectrum, rng);
    PartialSvd cold = svt_run(a, ThresholdSpec::by_sigma(3.0));
    PartialSvd first = svt_run(a, ThresholdSpec::by_sigma(4.0));
    SvtOptions o;
    o.warm_start = first;
    PartialSvd warm = svt_run(a, ThresholdSpec::by_sigma(3.0), o);
    REQUIRE(warm.size() == cold.size());
    for (std::size_t i = 0; i < cold.size(); ++i) CHECK(std::abs(warm.s[i] - cold.s[i]) <= 1e-8 * cold.s[i]);
    CHECK(warm.matvecs < cold.matvecs);

    // warm start with pwrsvd refinement behaves the same
    o.pwrsvd = 2;
    PartialSvd refined = svt_run(a, ThresholdSpec::by_sigma(3.0), o);
    REQUIRE(refined.size() == cold.size());
    for (std::size_t i = 0; i < cold.size(); ++i) CHECK(std::abs(refined.s[i] - cold.s[i]) <= 1e-8 * cold.s[i]);
}

TEST_CASE("increment schedule from the trace") {
    Rng rng(6);
    Vector spectrum;
    for (int i = 0; i < 100; ++i) spectrum.push_back(10.0 * std::pow(0.97, i));
    DenseMatrix a = with_spectrum(150, 130, spectrum, rng);
    SvtOptions o;
    o.k = 4;
    o.incre = 3;
    o.kmax = 20;
    o.psvdmax = 60;
    PartialSvd p = svt_run(a, ThresholdSpec::by_sigma(0.0), o);
    CHECK(p.flag == SvtFlag::psvdmax_reached);
    CHECK(p.size() == 60);

    std::size_t t = 0;
    for (const IterationRecord& r : p.trace) {
        CHECK(r.k <= 20);
        CHECK(r.ell + r.k <= 60);
        if (r.certify) continue;
        CHECK(r.incre == 3u << t);
        ++t;
    }
    CHECK(t >= 3);
}

TEST_CASE("display writes one line per iteration") {
    DenseMatrix a = diagonal({5, 4, 3, 2, 1});
    std::ostringstream log;
    SvtOptions o;
    o.display = true;
    o.log = &log;
    o.k = 1;
    PartialSvd p = svt_run(a, ThresholdSpec::by_sigma(2.5), o);
    std::size_t lines = 0;
    for (char c : log.str()) lines += c == '\n';
    CHECK(lines >= p.trace.size());
    CHECK(log.str().find("ell=") != std::string::npos);
}

TEST_CASE("sigma zero on a rank-deficient matrix") {
    Rng rng(7);
    Vector spectrum;
    for (int i = 0; i < 12; ++i) spectrum.push_back(1.0 + i);
    DenseMatrix a = with_spectrum(40, 30, spectrum, rng);
    PartialSvd p = svt_run(a, ThresholdSpec::by_sigma(0.0));
    CHECK(p.flag == SvtFlag::success);
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    check_values(p, spectrum, 1e-8);
}

TEST_CASE("flags are reproducible") {
    Rng rng(8);
    Vector spectrum;
    for (int i = 0; i < 40; ++i) spectrum.push_back(10.0 * std::pow(0.9, i));
    DenseMatrix a = with_spectrum(150, 120, spectrum, rng);

    SvtOptions o;
    o.psvdmax = 5;
    PartialSvd two = svt_run(a, ThresholdSpec::by_sigma(0.0), o);
    CHECK(two.flag == SvtFlag::psvdmax_reached);
    CHECK(two.size() == 5);

    PartialSvd three = svt_run(a, ThresholdSpec::by_sigma(11.0));
    CHECK(three.flag == SvtFlag::none_above_sigma);
    CHECK(three.size() == 0);

    Rng hard(7);
    DenseMatrix g = random_normal(200, 160, hard);
    const double sigma = small_dense_svd(g).s[79];
    SvtOptions h;
    h.max_restarts = 1;
    PartialSvd one = svt_run(g, ThresholdSpec::by_sigma(sigma), h);
    CHECK(one.flag == SvtFlag::psvd_failed);
    for (double s : one.s) CHECK(s >= sigma);
}

TEST_CASE("determinism") {
    Rng rng(9);
    DenseMatrix a = random_normal(60, 70, rng);
    PartialSvd x = svt_run(a, ThresholdSpec::by_sigma(8.0));
    PartialSvd y = svt_run(a, ThresholdSpec::by_sigma(8.0));
    CHECK(x.s == y.s);
    CHECK(x.matvecs == y.matvecs);
}

}  // TEST_SUITE
