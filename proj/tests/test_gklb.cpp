#include <doctest.h>

#include <cmath>
#include <cstring>

#include "support.hpp"
#include "svt/gklb.hpp"
#include "svt/metrics.hpp"

using namespace svt;
using namespace svt::testing;

namespace {

Vector start_vector(std::size_t n, Rng& rng) {
    DenseMatrix g = random_normal(n, 1, rng);
    return Vector(g.values().begin(), g.values().end());
}

double factorization_defect(const LinearOperator& op, const GklbFactorization& st) {
    return frobenius_norm(subtract(matmat(op, st.v), multiply(st.u, st.b)));
}

DenseMatrix rank_one(std::size_t m, std::size_t n, double sigma, Rng& rng, DenseMatrix& u, DenseMatrix& v) {
    u = random_orthonormal(m, 1, rng);
    v = random_orthonormal(n, 1, rng);
    return multiply_nt(scale_columns(u, Vector{sigma}), v);
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("gklb") {

TEST_CASE("extend on a diagonal reproduces its values") {
    Rng rng(1);
    DenseMatrix d = diagonal({5, 4, 3, 2, 1});
    DenseOperator op(d);
    GklbFactorization st = gklb_start(start_vector(5, rng));
    gklb_extend(op, st, 5, rng);
    REQUIRE(st.dim() == 5);
    Vector s = small_dense_svd(st.b).s;
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(s[i] - (5.0 - static_cast<double>(i))) <= 1e-12);
    CHECK(factorization_defect(op, st) <= 1e-12 * 5.0);
}

TEST_CASE("extend breaks down on a rank-one operator") {
    Rng rng(2);
    DenseMatrix u, v;
    DenseMatrix a = rank_one(12, 15, 7.0, rng, u, v);
    DenseOperator op(a);
    GklbFactorization st = gklb_start(start_vector(15, rng));
    gklb_extend(op, st, 2, rng);
    REQUIRE(st.dim() == 2);
    // the second step breaks down and continues from a fresh direction
    Vector s = small_dense_svd(st.b).s;
    CHECK(s[0] == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(s[1] <= 1e-12 * 7.0);
    CHECK(norm2(st.f) <= 1e-12 * 7.0);
    CHECK(factorization_defect(op, st) <= 1e-12 * 7.0);
    CHECK(orthogonality_error(st.u, st.v) <= 1e-12);
}

TEST_CASE("extend keeps the invariants on a random operator") {
    Rng rng(3);
    DenseMatrix a = random_normal(40, 30, rng);
    DenseOperator dop(a);
    // 40×30 is tall, so run on Aᵀ (30×40)
    TransposedOperator t(dop);
    GklbFactorization st = gklb_start(start_vector(40, rng));
    gklb_extend(t, st, 10, rng);
    const double norm = small_dense_svd(a).s[0];
    CHECK(st.dim() == 10);
    CHECK(factorization_defect(t, st) <= 1e-12 * norm);
    CHECK(orthogonality_error(st.u, st.v) <= 1e-12);
    for (std::size_t j = 0; j < 10; ++j)
        for (std::size_t i = j + 2; i < 10; ++i) CHECK(st.b(i, j) == 0.0);
}

TEST_CASE("extend rejects a target beyond min(m, n)") {
    Rng rng(4);
    DenseMatrix d = diagonal({1, 2, 3});
    DenseOperator op(d);
    GklbFactorization st = gklb_start(start_vector(3, rng));
    CHECK_THROWS_AS(gklb_extend(op, st, 4, rng), std::invalid_argument);
}

TEST_CASE("thick_restart keeps the leading Ritz values") {
    Rng rng(5);
    DenseMatrix d = diagonal({5, 4, 3, 2, 1});
    DenseOperator op(d);
    GklbFactorization st = gklb_start(start_vector(5, rng));
    gklb_extend(op, st, 5, rng);
    thick_restart(st, 2);
    REQUIRE(st.dim() == 2);
    Vector s = small_dense_svd(st.b).s;
    CHECK(std::abs(s[0] - 5.0) <= 1e-12);
    CHECK(std::abs(s[1] - 4.0) <= 1e-12);
    CHECK(factorization_defect(op, st) <= 1e-12 * 5.0);
}

TEST_CASE("thick_restart with keep = dim - 1 projects onto the top Ritz values") {
    Rng rng(6);
    DenseMatrix a = random_normal(25, 35, rng);
    DenseOperator op(a);
    GklbFactorization st = gklb_start(start_vector(35, rng));
    gklb_extend(op, st, 8, rng);
    Vector before = small_dense_svd(st.b).s;
    thick_restart(st, 7);
    Vector after = small_dense_svd(st.b).s;
    REQUIRE(after.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(after[i] - before[i]) <= 1e-12 * before[0]);
    CHECK(factorization_defect(op, st) <= 1e-12 * before[0]);
    CHECK(orthogonality_error(st.u, st.v) <= 1e-12);

    // the restarted state extends again without losing structure
    gklb_extend(op, st, 12, rng);
    CHECK(factorization_defect(op, st) <= 1e-12 * before[0]);
    CHECK(orthogonality_error(st.u, st.v) <= 1e-12);
}

TEST_CASE("thick_restart rejects keep = 0 and keep >= dim") {
    Rng rng(7);
    DenseMatrix d = diagonal({5, 4, 3, 2, 1});
    DenseOperator op(d);
    GklbFactorization st = gklb_start(start_vector(5, rng));
    gklb_extend(op, st, 3, rng);
    CHECK_THROWS_AS(thick_restart(st, 0), std::invalid_argument);
    CHECK_THROWS_AS(thick_restart(st, 3), std::invalid_argument);
}

TEST_CASE("psvd on a diagonal") {
    DenseMatrix d = diagonal({5, 4, 3, 2, 1});
    DenseOperator op(d);
    PsvdOptions po;
    po.tol = 1e-10;
    PsvdResult r = psvd(op, 2, po);
    REQUIRE(r.converged == 2);
    CHECK(std::abs(r.s[0] - 5.0) <= 1e-10 * 5.0);
    CHECK(std::abs(r.s[1] - 4.0) <= 1e-10 * 5.0);
    CHECK(right_residual(op, r.u, r.s, r.v) <= std::sqrt(2.0) * 1e-10 * 5.0);
    CHECK(left_residual(op, r.u, r.s, r.v) <= 1e-13);
}

TEST_CASE("psvd recovers a rank-one operator up to sign") {
    Rng rng(8);
    DenseMatrix u, v;
    DenseMatrix a = rank_one(20, 30, 7.0, rng, u, v);
    DenseOperator op(a);
    PsvdResult r = psvd(op, 1);
    REQUIRE(r.converged == 1);
    CHECK(r.s[0] == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(std::abs(std::abs(dot(r.u.col(0), u.col(0))) - 1.0) <= 1e-12);
    CHECK(std::abs(std::abs(dot(r.v.col(0), v.col(0))) - 1.0) <= 1e-12);
    CHECK(dot(r.u.col(0), u.col(0)) * dot(r.v.col(0), v.col(0)) > 0.0);
}

TEST_CASE("psvd finds the top of a prescribed spectrum") {
    Rng rng(9);
    Vector spectrum;
    for (int i = 10; i >= 1; --i) spectrum.push_back(i);
    for (int i = 1; i <= 20; ++i) spectrum.push_back(std::pow(0.5, i));
    DenseMatrix a = with_spectrum(60, 45, spectrum, rng);
    PsvdResult r = psvd(DenseOperator(a), 6);
    REQUIRE(r.converged == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(r.s[i] - spectrum[i]) <= 1e-8 * spectrum[i]);
}

TEST_CASE("psvd structure on random operators of both shapes") {
    Rng rng(10);
    for (auto [m, n] : std::initializer_list<std::pair<std::size_t, std::size_t>>{{50, 80}, {80, 50}, {64, 64}}) {
        DenseMatrix a = random_normal(m, n, rng);
        DenseOperator op(a);
        PsvdOptions po;
        po.tol = 1e-10;
        PsvdResult r = psvd(op, 5, po);
        REQUIRE(r.converged == 5);
        const double c = static_cast<double>(r.converged);
        const double eps = std::numeric_limits<double>::epsilon();
        const double exact = m <= n ? left_residual(op, r.u, r.s, r.v) : right_residual(op, r.u, r.s, r.v);
        CHECK(exact <= 50.0 * eps * r.estimated_norm * std::sqrt(c));
        CHECK(orthogonality_error(r.u, r.v) <= 1e-12);

        DenseMatrix other = m <= n ? subtract(rmatmat(op, r.u), scale_columns(r.v, r.s))
                                   : subtract(matmat(op, r.v), scale_columns(r.u, r.s));
        for (std::size_t j = 0; j < 5; ++j) CHECK(norm2(other.col(j)) <= 1e-10 * r.estimated_norm);

        Vector oracle = small_dense_svd(a).s;
        for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(r.s[j] - oracle[j]) <= 1e-10 * oracle[0]);
    }
}

TEST_CASE("psvd matches the oracle across random sizes") {
    Rng rng(11);
    std::uniform_int_distribution<std::size_t> dim(10, 200);
    for (int t = 0; t < 10; ++t) {
        const std::size_t m = dim(rng), n = dim(rng);
        DenseMatrix a = random_normal(m, n, rng);
        const std::size_t k = std::min<std::size_t>(4, std::min(m, n) - 1);
        PsvdOptions po;
        po.tol = 1e-9;
        po.seed = 100 + static_cast<std::uint64_t>(t);
        PsvdResult r = psvd(DenseOperator(a), k, po);
        Vector oracle = small_dense_svd(a).s;
        for (std::size_t j = 0; j < r.converged; ++j) CHECK(std::abs(r.s[j] - oracle[j]) <= 1e-9 * oracle[0]);
        CHECK(r.converged == k);
    }
}

TEST_CASE("largest Ritz value never decreases across restarts") {
    Rng rng(12);
    Vector spectrum;
    for (int i = 0; i < 60; ++i) spectrum.push_back(1.0 + 0.01 * i);
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    DenseMatrix a = with_spectrum(80, 90, spectrum, rng);
    PsvdOptions po;
    po.tol = 1e-12;
    po.work_dim = 12;
    PsvdResult r = psvd(DenseOperator(a), 4, po);
    REQUIRE(r.ritz_history.size() > 2);
    for (std::size_t i = 1; i < r.ritz_history.size(); ++i)
        CHECK(r.ritz_history[i] >= r.ritz_history[i - 1] - 1e-14);
}

TEST_CASE("psvd is deterministic for a fixed seed") {
    Rng rng(13);
    DenseMatrix a = random_normal(70, 55, rng);
    PsvdOptions po;
    po.seed = 99;
    PsvdResult r1 = psvd(DenseOperator(a), 5, po);
    PsvdResult r2 = psvd(DenseOperator(a), 5, po);
    CHECK(bitwise_equal(r1.s, r2.s));
    CHECK(bitwise_equal(r1.u.values(), r2.u.values()));
    CHECK(bitwise_equal(r1.v.values(), r2.v.values()));
    CHECK(r1.restarts == r2.restarts);
}

TEST_CASE("psvd sign convention") {
    Rng rng(14);
    DenseMatrix a = random_normal(30, 40, rng);
    PsvdResult r = psvd(DenseOperator(a), 3);
    for (std::size_t j = 0; j < r.converged; ++j) {
        auto c = r.u.col(j);
        auto big = std::max_element(c.begin(), c.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
        CHECK(*big >= 0.0);
    }
}

TEST_CASE("psvd validates its arguments") {
    DenseMatrix d = diagonal({3, 2, 1});
    DenseOperator op(d);
    CHECK_THROWS_AS(psvd(op, 0), std::invalid_argument);
    CHECK_THROWS_AS(psvd(op, 4), std::invalid_argument);
    PsvdOptions po;
    po.tol = 0.0;
    CHECK_THROWS_AS(psvd(op, 1, po), std::invalid_argument);
    po.tol = 1e-8;
    po.p0 = Vector(2, 1.0);
    CHECK_THROWS_AS(psvd(op, 1, po), std::invalid_argument);
}

TEST_CASE("psvd may return nothing when restarts run out") {
    Rng rng(15);
    Vector spectrum;
    for (int i = 0; i < 100; ++i) spectrum.push_back(1.0 + 1e-4 * i);
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    DenseMatrix a = with_spectrum(120, 110, spectrum, rng);
    PsvdOptions po;
    po.tol = 1e-12;
    po.max_restarts = 1;
    PsvdResult r = psvd(DenseOperator(a), 6, po);
    CHECK(r.converged < 6);
    CHECK(r.s.size() == r.converged);
    CHECK(r.u.cols() == r.converged);
}

}  // TEST_SUITE
