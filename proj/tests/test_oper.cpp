#include "doctest.h"

#include "operforge/error.hpp"
#include "operforge/oper.hpp"
#include "support/bridge.hpp"
#include "support/random.hpp"

#include <map>
#include <random>

using namespace operforge;

namespace {

ContextPtr sl2() { return shared_context(2, AlgebraKind::sl); }
ContextPtr sl3() { return shared_context(3, AlgebraKind::sl); }

Matrix h2() { return Matrix::diagonal({1, -1}); }

// Ga_g(A) on [r, window] computed by the reference arithmetic from the certificate's factors.
oracle::Poly replay(const NormalizationCertificate& cert, const Connection& a) {
    const std::size_t n = a.context().n;
    const long cut = cert.window_hi - cert.window_lo;
    oracle::Poly g = oracle::make(n, cut, {{0, cert.conjugator()}});
    for (const auto& f : cert.factors())
        g = oracle::mul(oracle::exp_monomial(f.x, f.k, cut), g, cut);
    return oracle::gauge(g, oracle::to_poly(a.series(), cert.window_hi), cert.window_hi);
}

void check_certificate(const NormalizationCertificate& cert, const Connection& a) {
    const Connection out = expand(cert.result);
    CHECK(is_oper_form(out));
    CHECK(out.precision() == cert.window_hi);
    for (const auto& f : cert.factors())
        CHECK(f.k >= 1);

    const Connection replayed = gauge_transform(cert.gauge, a);
    CHECK(replayed.series().agrees_on(out.series(), cert.window_lo, cert.window_hi));

    const oracle::Poly expected = replay(cert, a);
    for (long k = cert.window_lo; k <= cert.window_hi; ++k)
        CHECK(out.coefficient(k) == expected.at(k));

    const Matrix& e = a.context().e;
    for (long k = cert.window_lo + 1; k <= cert.window_hi; ++k)
        CHECK(bracket(out.coefficient(k), e).is_zero());
}

} // namespace

TEST_CASE("is_oper_form examples") {
    auto ctx = sl2();
    CHECK(is_oper_form(make_connection(ctx, {{-2, ctx->f}})));
    CHECK_FALSE(is_oper_form(make_connection(ctx, {{-1, ctx->e}})));
    CHECK(is_oper_form(make_connection(ctx, {{-2, ctx->f}, {0, ctx->e * Rational(2)}})));
    CHECK_FALSE(is_oper_form(make_connection(ctx, {{-2, ctx->e}}, 5)));
    CHECK_THROWS_AS(is_oper_form(Connection(ctx, MatrixSeries::from_constant(Matrix::zero(2), 0, 3))), Error);

    auto c3 = sl3();
    CHECK(is_oper_form(make_connection(c3, {{-3, c3->f}, {-1, Matrix::unit(3, 0, 2)}})));
    CHECK_FALSE(is_oper_form(make_connection(c3, {{-3, c3->f}, {1, Matrix::unit(3, 2, 0)}})));
    CHECK_FALSE(is_oper_form(make_connection(c3, {{-3, Matrix::unit(3, 1, 0)}})));
    CHECK(is_oper_form(make_connection(shared_context(1, AlgebraKind::gl), {{-1, Matrix::identity(1)}})));
}

TEST_CASE("expand examples") {
    auto ctx = sl2();
    OperForm zero{ctx, -2, ctx->f, {Series()}};
    CHECK(expand(zero) == make_connection(ctx, {{-2, ctx->f}}));
    OperForm two{ctx, -2, ctx->f, {Series::constant(2)}};
    CHECK(expand(two) == make_connection(ctx, {{-2, ctx->f}, {0, ctx->e * Rational(2)}}));
    CHECK(is_oper_form(expand(two)));
}

TEST_CASE("already normalized input gives the identity certificate") {
    auto ctx = sl2();
    const Connection a = make_connection(ctx, {{-2, ctx->f}});
    const auto cert = normalize_regular_nilpotent(a);
    CHECK(cert.steps == 0);
    CHECK(cert.factors().empty());
    CHECK(cert.conjugator() == Matrix::identity(2));
    CHECK(expand(cert.result).series().agrees_with(a.series()));
    CHECK(cert.window_lo == -2);
    CHECK(cert.window_hi == -2 + kDefaultRelativePrecision);
}

TEST_CASE("worked sl2 example: f t^-2 + h t^-1") {
    auto ctx = sl2();
    const Connection a = make_connection(ctx, {{-2, ctx->f}, {-1, h2()}});
    const auto cert = normalize_regular_nilpotent(a, {.precision = 10});
    REQUIRE(cert.steps == 1);
    CHECK(cert.factors()[0].k == 1);
    CHECK(cert.factors()[0].x == -ctx->e);
    CHECK(cert.conjugator() == Matrix::identity(2));
    CHECK(cert.gauge.matrix() == MatrixSeries::identity(2) - MatrixSeries::from_constant(ctx->e, 1));

    const Connection expected = make_connection(ctx, {{-2, ctx->f}, {0, ctx->e * Rational(2)}});
    CHECK(expand(cert.result).series().agrees_with(expected.series()));
    CHECK(cert.result.ge_coefficients[0].valuation() == 0);
    CHECK(cert.result.ge_coefficients[0].coeff(0) == 2);
    check_certificate(cert, a);
}

TEST_CASE("sl3 example with a random tail of valuation -2") {
    std::mt19937_64 rng(41);
    auto ctx = sl3();
    std::vector<std::pair<std::int64_t, Matrix>> terms{{-3, ctx->f}};
    for (std::int64_t k = -2; k <= 2; ++k)
        terms.emplace_back(k, testgen::random_element(rng, *ctx));
    const Connection a = make_connection(ctx, terms, 12);
    const auto cert = normalize_regular_nilpotent(a);
    CHECK(cert.window_hi == 12);
    CHECK(cert.steps > 0);
    check_certificate(cert, a);
}

TEST_CASE("random regular nilpotent leading terms normalize with stable lower coefficients") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        auto ctx = shared_context(2 + trial % 2, AlgebraKind::sl);
        const std::int64_t r = -2 - (trial / 2) % 2;
        const Connection a =
            testgen::random_connection(rng, ctx, testgen::random_regular_nilpotent(rng, *ctx), r, r + 8);

        std::map<std::int64_t, Matrix> frozen;
        NormalizationOptions options;
        options.observer = [&](std::int64_t k, const Connection& current) {
            for (const auto& [d, m] : frozen)
                CHECK(current.coefficient(d) == m);
            for (std::int64_t d = r; d <= r + k; ++d)
                frozen.emplace(d, current.coefficient(d));
        };
        const auto cert = normalize_regular_nilpotent(a, options);
        check_certificate(cert, a);
        CHECK(cert.conjugator() * a.leading() * *inverse(cert.conjugator()) == ctx->f);
    }
}

TEST_CASE("normalization is idempotent") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        auto ctx = shared_context(2 + trial % 2, AlgebraKind::sl);
        const Connection a =
            testgen::random_connection(rng, ctx, testgen::random_regular_nilpotent(rng, *ctx), -2, 6);
        const auto first = normalize_regular_nilpotent(a);
        const Connection b = expand(first.result);
        const auto second = normalize_regular_nilpotent(b);
        CHECK(second.steps == 0);
        CHECK(second.conjugator() == Matrix::identity(ctx->n));
        CHECK(expand(second.result).series().agrees_with(b.series()));
    }
}

TEST_CASE("normalization preconditions") {
    auto ctx = sl2();
    auto c3 = sl3();
    CHECK_THROWS_WITH_AS(normalize_regular_nilpotent(make_connection(ctx, {{-1, ctx->f}})),
                         doctest::Contains("OrderTooLarge"), Error);
    CHECK_THROWS_WITH_AS(normalize_regular_nilpotent(make_connection(ctx, {})), doctest::Contains("OrderTooLarge"),
                         Error);
    CHECK_THROWS_WITH_AS(normalize_regular_nilpotent(make_connection(c3, {{-2, Matrix::unit(3, 0, 2)}})),
                         doctest::Contains("NotRegularNilpotent"), Error);
    CHECK_THROWS_WITH_AS(normalize_regular_nilpotent(make_connection(ctx, {{-2, h2()}})),
                         doctest::Contains("NotRegularNilpotent"), Error);
    CHECK_THROWS_WITH_AS(normalize_regular(make_connection(c3, {{-2, Matrix::unit(3, 0, 2)}})),
                         doctest::Contains("NotRegular"), Error);
    CHECK_THROWS_WITH_AS(normalize_regular(make_connection(c3, {{-2, Matrix::diagonal({1, 1, -2})}})),
                         doctest::Contains("NotRegular"), Error);
}

TEST_CASE("normalize_regular onto the Kostant slice") {
    auto ctx = sl2();
    const Matrix fe = ctx->f + ctx->e;

    SUBCASE("slice point without tail") {
        const Connection a = make_connection(ctx, {{-2, ctx->f + ctx->e * Rational(3)}});
        const auto cert = normalize_regular(a);
        CHECK(cert.steps == 0);
        CHECK(cert.conjugator() == Matrix::identity(2));
    }
    SUBCASE("regular semisimple leading term f + e") {
        std::mt19937_64 rng(44);
        const Connection a = testgen::random_connection(rng, ctx, fe, -2, 8);
        const auto cert = normalize_regular(a);
        CHECK(cert.result.slice_point == fe);
        check_certificate(cert, a);
    }
    SUBCASE("h t^-2 + e t^-1 is first conjugated to f + e") {
        const Connection a = make_connection(ctx, {{-2, h2()}, {-1, ctx->e}}, 9);
        const auto cert = normalize_regular(a);
        CHECK(cert.result.slice_point == fe);
        check_certificate(cert, a);
    }
    SUBCASE("regular nilpotent leading term lands on f") {
        std::mt19937_64 rng(45);
        auto c3 = sl3();
        const Connection a = testgen::random_connection(rng, c3, testgen::random_regular_nilpotent(rng, *c3), -3, 5);
        const auto cert = normalize_regular(a);
        CHECK(cert.result.slice_point == c3->f);
        check_certificate(cert, a);
    }
}

TEST_CASE("normalize_regular on random regular leading terms") {
    std::mt19937_64 rng(46);
    int done = 0;
    for (int trial = 0; done < 20 && trial < 200; ++trial) {
        const auto kind = trial % 2 ? AlgebraKind::sl : AlgebraKind::gl;
        auto ctx = shared_context(2 + trial % 2, kind);
        const Matrix lead = testgen::random_element(rng, *ctx, 2);
        if (!is_regular(lead))
            continue;
        const std::int64_t r = -2 - trial % 3 / 2;
        const Connection a = testgen::random_connection(rng, ctx, lead, r, r + 7);
        const auto cert = normalize_regular(a);
        CHECK(cert.result.slice_point == kostant_normal_form(*ctx, lead));
        check_certificate(cert, a);
        ++done;
    }
    CHECK(done == 20);
}
