#include "doctest.h"

#include "operforge/error.hpp"
#include "operforge/springer.hpp"
#include "support/bridge.hpp"
#include "support/random.hpp"

#include <random>

using namespace operforge;

namespace {

ContextPtr sl2() { return shared_context(2, AlgebraKind::sl); }
ContextPtr sl3() { return shared_context(3, AlgebraKind::sl); }

Matrix h2() { return Matrix::diagonal({1, -1}); }

// Ga_{g^{-1}}(A) = g^{-1} A g + g^{-1} g' for g = t^c diagonal, by the reference arithmetic.
oracle::Poly coweight_reference(const Connection& a, const std::vector<long>& c, long cut) {
    const std::size_t n = c.size();
    oracle::Poly g{n, {}, cut + 40}, gi{n, {}, cut + 40};
    for (std::size_t i = 0; i < n; ++i) {
        g.add(c[i], Matrix::unit(n, i, i));
        gi.add(-c[i], Matrix::unit(n, i, i));
    }
    oracle::Poly out = oracle::mul(oracle::mul(gi, oracle::to_poly(a.series(), cut + 20), cut + 20), g, cut);
    for (const auto& [k, m] : oracle::mul(gi, oracle::derivative(g), cut).terms)
        out.add(k, m);
    return out;
}

// Random element of M_A near a coweight: g = u t^c k with u, k in G(O).
GaugeElement random_candidate(std::mt19937_64& rng, const ContextPtr& ctx) {
    const std::size_t n = ctx->n;
    std::uniform_int_distribution<int> coin(-1, 1);
    std::vector<std::int64_t> c(n);
    std::int64_t sum = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        c[i] = coin(rng);
        sum += c[i];
    }
    c[n - 1] = -sum;
    const GaugeElement u = GaugeElement::from_factorization(
        ctx, Factorization{{ExpFactor{1, testgen::random_nilpotent(rng, n, 1)}}, testgen::random_unimodular(rng, n, 1)},
        kExact);
    return compose(u, GaugeElement::coweight(ctx, c));
}

} // namespace

TEST_CASE("in_M_A examples") {
    auto ctx = sl2();
    const Connection a = make_connection(ctx, {{-2, ctx->f}});
    CHECK(in_M_A(a, GaugeElement::identity(ctx)));

    const oracle::Poly b = coweight_reference(a, {1, -1}, 4);
    // Ga_{g^{-1}}(f t^-2) = f + h t^-1 for g = t^{(1,-1)}.
    CHECK(b.at(-1) == h2());
    CHECK(b.at(0) == ctx->f);
    CHECK(b.lowest() == -1);
    CHECK(in_M_A(a, GaugeElement::coweight(ctx, {1, -1})));
    // g = t^{(-1,1)}: the f entry moves to t^-4.
    CHECK(coweight_reference(a, {-1, 1}, 4).lowest() == -4);
    CHECK_FALSE(in_M_A(a, GaugeElement::coweight(ctx, {-1, 1})));

    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        auto c = shared_context(2 + trial % 2, AlgebraKind::sl);
        const Connection x = testgen::random_connection(rng, c, testgen::random_nilpotent(rng, c->n), -2, 6);
        CHECK(in_M_A(x, testgen::random_gauge_O(rng, c, 10)));
    }

    CHECK_THROWS_AS(in_M_A(make_connection(ctx, {}), GaugeElement::identity(ctx)), Error);
    CHECK(in_M_A(make_connection(ctx, {}), GaugeElement(ctx, MatrixSeries::identity(2) + MatrixSeries::from_constant(ctx->f, -1)), -2));
}

TEST_CASE("in_deformed_fiber examples") {
    auto ctx = sl2();
    const DeformedFiberQuery q0(make_connection(ctx, {{0, ctx->f}}), -2, 0);
    CHECK(in_deformed_fiber(q0, GaugeElement::identity(ctx)));
    CHECK(deformed_transform(q0, GaugeElement::coweight(ctx, {1, -1})) ==
          MatrixSeries::from_constant(ctx->f, 2));
    CHECK(in_deformed_fiber(q0, GaugeElement::coweight(ctx, {1, -1})));
    CHECK_FALSE(in_deformed_fiber(q0, GaugeElement::coweight(ctx, {-1, 1})));

    CHECK_THROWS_AS(DeformedFiberQuery(make_connection(ctx, {{-1, ctx->f}}), -2), Error);
    CHECK_THROWS_AS(DeformedFiberQuery(make_connection(ctx, {{0, ctx->f}}), 0), Error);
    const auto q = DeformedFiberQuery::from_connection(make_connection(ctx, {{-3, ctx->e}, {-1, h2()}}));
    CHECK(q.r == -3);
    CHECK(q.a_tilde.coefficient(0) == ctx->e);
    CHECK(q.a_tilde.coefficient(2) == h2());
}

TEST_CASE("lambda = 1 agrees with in_M_A and constant gauges carry no dlog term") {
    std::mt19937_64 rng(62);
    int members = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto ctx = shared_context(2 + trial % 2, AlgebraKind::sl);
        const Connection a = testgen::random_connection(rng, ctx, testgen::random_nilpotent(rng, ctx->n), -2, 8);
        const GaugeElement g = random_candidate(rng, ctx);
        const bool m = in_M_A(a, g);
        members += m;
        CHECK(in_deformed_fiber(DeformedFiberQuery::from_connection(a), g) == m);
    }
    CHECK(members > 0);
    CHECK(members < 100);

    for (int trial = 0; trial < 20; ++trial) {
        auto ctx = shared_context(2 + trial % 2, AlgebraKind::sl);
        const Connection a = testgen::random_connection(rng, ctx, testgen::random_element(rng, *ctx), -2, 8);
        const Matrix h = testgen::random_unimodular(rng, ctx->n);
        const MatrixSeries expected =
            MatrixSeries::from_constant(*inverse(h)) * a.series().shifted(2) * MatrixSeries::from_constant(h);
        for (const Rational lambda : {Rational(0), Rational(1), Rational(1, 3)}) {
            const DeformedFiberQuery q = DeformedFiberQuery::from_connection(a, lambda);
            CHECK(deformed_transform(q, GaugeElement::constant(ctx, h)).agrees_with(expected));
            CHECK(in_deformed_fiber(q, GaugeElement::constant(ctx, h)));
        }
    }
}

TEST_CASE("leading_term and regular points") {
    auto ctx = sl2();
    auto c3 = sl3();
    const auto qe = DeformedFiberQuery::from_connection(make_connection(ctx, {{-2, ctx->e}, {0, h2()}}));
    CHECK(leading_term(qe, GaugeElement::identity(ctx)) == ctx->e);
    CHECK(is_regular_point(qe, GaugeElement::identity(ctx)));

    const auto q13 = DeformedFiberQuery::from_connection(make_connection(c3, {{-2, Matrix::unit(3, 0, 2)}}));
    CHECK(leading_term(q13, GaugeElement::identity(c3)) == Matrix::unit(3, 0, 2));
    CHECK_FALSE(is_regular_point(q13, GaugeElement::identity(c3)));

    CHECK_THROWS_WITH_AS(leading_term(qe, GaugeElement::coweight(ctx, {1, -1})), doctest::Contains("NotMember"), Error);
    const auto qh = DeformedFiberQuery::from_connection(make_connection(ctx, {{-2, h2()}}));
    CHECK_THROWS_AS(leading_term(qh, GaugeElement::identity(ctx)), Error);
}

TEST_CASE("leading terms of random points are nilpotent") {
    std::mt19937_64 rng(63);
    auto c3 = sl3();
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::int64_t, Matrix>> terms{{-2, Matrix::unit(3, 0, 2)}};
        for (std::int64_t k = -1; k <= 2; ++k)
            terms.emplace_back(k, testgen::random_element(rng, *c3, 2));
        const Connection a = make_connection(c3, terms, 6);
        const auto q = DeformedFiberQuery::from_connection(a);
        const GaugeElement g = trial % 2 ? testgen::random_gauge_O(rng, c3, 10) : random_candidate(rng, c3);
        if (!in_deformed_fiber(q, g))
            continue;
        CHECK(is_nilpotent(leading_term(q, g)));
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("Iwahori membership") {
    auto ctx = sl2();
    const auto q = DeformedFiberQuery::from_connection(make_connection(ctx, {{-2, ctx->e}}));
    CHECK(in_iwahori_fiber(q, GaugeElement::identity(ctx)));
    const Matrix w = Matrix::unit(2, 0, 1) - Matrix::unit(2, 1, 0);
    // Conjugating by the Weyl element turns e into -f, which is not upper triangular.
    CHECK(in_deformed_fiber(q, GaugeElement::constant(ctx, w)));
    CHECK_FALSE(in_iwahori_fiber(q, GaugeElement::constant(ctx, w)));
}

TEST_CASE("regularization search on the zero connection") {
    for (std::size_t n : {2, 3}) {
        auto ctx = shared_context(n, AlgebraKind::sl);
        const Connection zero = make_connection(ctx, {});
        const auto cert = regularization_search(zero);
        CHECK(cert.shortcut);
        CHECK(cert.r == -2);
        CHECK(cert.transformed.series().agrees_with(MatrixSeries::from_constant(ctx->f, -2)));
        CHECK(cert.leading == ctx->f);
        CHECK(verify_search_certificate(zero, cert));
        if (n == 2)
            CHECK(cert.g.matrix() == MatrixSeries::identity(2) + MatrixSeries::from_constant(ctx->f, -1));
    }
}

TEST_CASE("regularization search examples") {
    auto ctx = sl2();
    auto c3 = sl3();

    const Connection e = make_connection(ctx, {{-2, ctx->e}});
    const auto ce = regularization_search(e);
    CHECK(ce.stats.candidates_tried == 1);
    CHECK(ce.g.matrix() == MatrixSeries::identity(2));
    CHECK(ce.exponents.empty());
    CHECK(ce.leading == ctx->e);

    for (const Matrix& lead : {Matrix::unit(3, 0, 2), Matrix(Matrix::unit(3, 0, 2) + Matrix::unit(3, 1, 2))}) {
        const Connection a = make_connection(c3, {{-2, lead}});
        const auto cert = regularization_search(a, 2, 2);
        CHECK(verify_search_certificate(a, cert));
        CHECK(is_regular_nilpotent(cert.leading));
        CHECK(cert.transformed.order() == -2);
        // The point of Y_A is g^{-1} G(O).
        const GaugeElement point = inverse(cert.g, 40);
        CHECK(in_M_A(a, point));
        CHECK(is_regular_point(DeformedFiberQuery::from_connection(a), point));
        CHECK(cert.stats.candidates_tried > 1);
    }

    CHECK_THROWS_WITH_AS(regularization_search(make_connection(c3, {{-2, Matrix::unit(3, 0, 2)}}), 0, 0),
                         doctest::Contains("SearchExhausted"), Error);
    CHECK_THROWS_WITH_AS(regularization_search(make_connection(ctx, {{-1, ctx->e}})), doctest::Contains("InvalidOrder"),
                         Error);
    CHECK_THROWS_AS(regularization_search(make_connection(ctx, {{-2, h2()}})), Error);
}

TEST_CASE("tangent space of f t^-2 at the identity") {
    auto ctx = sl2();
    const Connection a = make_connection(ctx, {{-2, ctx->f}});
    const GaugeElement id = GaugeElement::identity(ctx);
    // Reference values from an independent symbolic solve: 1, 2, 3, 3, 3, 3 for depths 1..6.
    const std::int64_t expected[] = {1, 2, 3, 3, 3, 3};
    for (std::int64_t d = 1; d <= 6; ++d)
        CHECK(tangent_space_dim_at_depth(a, id, d) == expected[d - 1]);
    CHECK(tangent_space_dim(a, id) == 3);
    // Depths 1 and 3 disagree, so the comparison moves on to 3 and 5.
    CHECK(tangent_space_dim(a, id, 1) == 3);
    CHECK(tangent_resonance_depth(a, id) == 0);
    CHECK_THROWS_WITH_AS(tangent_space_dim(a, GaugeElement::coweight(ctx, {-1, 1})), doctest::Contains("NotMember"),
                         Error);
}

TEST_CASE("tangent dimension past a resonance") {
    auto ctx = sl2();
    const Connection a = make_connection(ctx, {{-2, ctx->e}, {-1, Matrix::diagonal({3, -3})}});
    // Reference values from an independent symbolic solve, depths 1..8.
    const GaugeElement c = GaugeElement::coweight(ctx, {-1, 1});
    const std::int64_t at_c[] = {3, 3, 3, 4, 4, 4, 4, 4};
    for (std::int64_t d = 1; d <= 8; ++d)
        CHECK(tangent_space_dim_at_depth(a, c, d) == at_c[d - 1]);
    // B = Ga_{c^{-1}}(A) has order -1 and residue 2h, so ad has eigenvalue 4.
    CHECK(tangent_resonance_depth(a, c) == 4);
    CHECK(tangent_space_dim(a, c, 1) == 4);

    // At the identity B = A is irregular; the jump comes at depth 6.
    const GaugeElement id = GaugeElement::identity(ctx);
    const std::int64_t at_id[] = {1, 2, 3, 3, 3, 4, 4, 4, 4};
    for (std::int64_t d = 1; d <= 9; ++d)
        CHECK(tangent_space_dim_at_depth(a, id, d) == at_id[d - 1]);
    CHECK(tangent_space_dim(a, id) == 4);

    const Connection f = make_connection(ctx, {{-2, ctx->f}});
    const GaugeElement cf = GaugeElement::coweight(ctx, {1, -1});
    CHECK(tangent_resonance_depth(f, cf) == 2);
    CHECK(tangent_space_dim(f, cf) == 4);

    const Connection known = make_connection(ctx, {{-2, ctx->e}, {-1, Matrix::diagonal({3, -3})}}, 3);
    CHECK_THROWS_WITH_AS(tangent_space_dim(known, id), doctest::Contains("PrecisionExhausted"), Error);
}

TEST_CASE("tangent dimension bound and gauge covariance") {
    std::mt19937_64 rng(64);
    auto ctx = sl2();
    int members = 0;
    for (int trial = 0; members < 12 && trial < 200; ++trial) {
        const Connection a = testgen::random_connection(rng, ctx, testgen::random_nilpotent(rng, 2), -2, 10);
        const GaugeElement g = random_candidate(rng, ctx);
        if (!in_M_A(a, g))
            continue;
        ++members;
        const std::int64_t d = tangent_space_dim(a, g);
        CHECK(d >= 0);
        CHECK(d <= 6);
        const GaugeElement g1 = testgen::random_gauge_O(rng, ctx, 14);
        CHECK(tangent_space_dim(a, compose(g, g1)) == d);
    }
    CHECK(members == 12);
}
