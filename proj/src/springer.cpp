#include "operforge/springer.hpp"

#include "operforge/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <stdexcept>

namespace operforge {

namespace {

// g^{-1} (a g + lambda t^shift g'), known at least up to `need` when the inputs allow.
// With lambda = 1, shift = 0 this is Ga_{g^{-1}}(a); with a = A~ and shift = -r it is
// Ad_{g^{-1}}(A~) - lambda t^{-r} dlog(g^{-1}).
MatrixSeries twisted(const GaugeElement& g, const MatrixSeries& a, const Rational& lambda, std::int64_t shift,
                     std::int64_t need) {
    const MatrixSeries& m = g.matrix();
    MatrixSeries body = a.is_zero() ? MatrixSeries(m.size()) : a * m;
    if (sgn(lambda) != 0)
        body += (m.derivative() * lambda).shifted(shift);
    if (body.is_zero())
        return body;
    const std::int64_t vb = body.valuation().value_or(body.precision() + 1);
    const std::int64_t cap = need - vb + 4;
    MatrixSeries out = invert(m, cap) * body;
    if (m.is_exact() && !out.is_exact() && out.precision() < need)
        out = invert(m, cap + need - out.precision()) * body;
    return out;
}

std::int64_t height(const std::vector<std::int64_t>& c) {
    std::int64_t h = 0;
    for (auto x : c)
        h = std::max(h, std::abs(x));
    return h;
}

// Integer vectors with max |c_i| = h (summing to 0 for sl), in lexicographic order.
std::vector<std::vector<std::int64_t>> coweights_of_height(std::size_t n, AlgebraKind kind, std::int64_t h) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> c(n, -h);
    while (true) {
        if (height(c) == h && (kind == AlgebraKind::gl || std::accumulate(c.begin(), c.end(), std::int64_t{0}) == 0))
            out.push_back(c);
        std::size_t i = n;
        while (i > 0 && c[i - 1] == h)
            c[--i] = -h;
        if (i == 0)
            break;
        ++c[i - 1];
    }
    return out;
}

// Id, the other permutation matrices, then the elementary matrices Id + E_ij.
std::vector<Matrix> constant_family(std::size_t n) {
    std::vector<Matrix> out{Matrix::identity(n)};
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
        Matrix p(n, n);
        for (std::size_t i = 0; i < n; ++i)
            p(i, perm[i]) = 1;
        out.push_back(p);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                out.push_back(Matrix::identity(n) + Matrix::unit(n, i, j));
    return out;
}

// 0, then +-E_ij (i != j), then +-H_i with H_i = E_ii - E_{i+1,i+1}.
std::vector<Matrix> exponent_alphabet(std::size_t n) {
    std::vector<Matrix> out{Matrix::zero(n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) {
                out.push_back(Matrix::unit(n, i, j));
                out.push_back(-Matrix::unit(n, i, j));
            }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Matrix h = Matrix::unit(n, i, i) - Matrix::unit(n, i + 1, i + 1);
        out.push_back(h);
        out.push_back(-h);
    }
    return out;
}

// Ga_{t^{-c}}(b): entry (i, j) times t^{c_j - c_i}, plus c_i t^{-1} on the diagonal.
MatrixSeries coweight_inverse_transform(const MatrixSeries& b, const std::vector<std::int64_t>& c) {
    const std::size_t n = b.size();
    std::vector<Series> e(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Series s = b(i, j).shifted(c[j] - c[i]);
            if (i == j && c[i] != 0)
                s += Series::monomial(c[i], -1);
            e[i * n + j] = std::move(s);
        }
    return MatrixSeries(n, std::move(e));
}

// Coefficients below r vanish and the t^r coefficient is regular nilpotent.
bool is_regular_at(const MatrixSeries& b, std::int64_t r) {
    if (b.precision() < r)
        return false;
    if (auto v = b.valuation(); !v || *v != r)
        return false;
    return is_regular_nilpotent(b.coefficient(r));
}

} // namespace

// ---------------------------------------------------------------------------
// Membership

DeformedFiberQuery::DeformedFiberQuery(Connection a, std::int64_t order, Rational l)
    : a_tilde(std::move(a)), r(order), lambda(std::move(l)) {
    if (r >= 0)
        throw Error(ErrorKind::InvalidOrder, "the order r must be negative");
    if (auto v = a_tilde.series().valuation(); v && *v < 0)
        throw Error(ErrorKind::NotInAlgebra, "A~ must lie in g(O)");
}

DeformedFiberQuery DeformedFiberQuery::from_connection(const Connection& a, Rational lambda) {
    if (a.series().is_zero())
        throw Error(ErrorKind::InvalidOrder, "the zero connection has no finite order");
    const std::int64_t r = *a.order();
    if (r >= 0)
        throw Error(ErrorKind::InvalidOrder, "the order of A must be negative");
    return DeformedFiberQuery(Connection(a.context_ptr(), a.series().shifted(-r)), r, std::move(lambda));
}

bool in_M_A(const Connection& a, const GaugeElement& g, std::optional<std::int64_t> order) {
    if (!(a.context() == g.context()))
        throw Error(ErrorKind::ContextMismatch, "gauge element and connection live in different algebras");
    if (!order) {
        if (a.series().is_zero())
            throw Error(ErrorKind::InvalidOrder, "membership for the zero connection needs an explicit order");
        order = a.order();
    }
    const std::int64_t r = *order;
    const MatrixSeries b = twisted(g, a.series(), 1, 0, r);
    if (b.is_zero())
        return true;
    if (auto v = b.valuation())
        return *v >= r;
    if (b.precision() >= r - 1)
        return true;
    throw Error(ErrorKind::OrderUndetermined, "Ga_{g^-1}(A) vanishes on its window, which ends at t^" +
                                                  std::to_string(b.precision()) + " below the order " +
                                                  std::to_string(r));
}

MatrixSeries deformed_transform(const DeformedFiberQuery& q, const GaugeElement& g) {
    if (!(q.a_tilde.context() == g.context()))
        throw Error(ErrorKind::ContextMismatch, "gauge element and connection live in different algebras");
    return twisted(g, q.a_tilde.series(), q.lambda, -q.r, 0);
}

bool in_deformed_fiber(const DeformedFiberQuery& q, const GaugeElement& g) {
    const MatrixSeries c = deformed_transform(q, g);
    if (c.is_zero())
        return true;
    if (auto v = c.valuation())
        return *v >= 0;
    if (c.precision() >= -1)
        return true;
    throw Error(ErrorKind::PrecisionExhausted,
                "deformed transform is known only up to t^" + std::to_string(c.precision()));
}

bool in_iwahori_fiber(const DeformedFiberQuery& q, const GaugeElement& g) {
    if (!in_deformed_fiber(q, g))
        return false;
    const Matrix c0 = deformed_transform(q, g).coefficient(0);
    for (std::size_t i = 0; i < c0.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (sgn(c0(i, j)) != 0)
                return false;
    return true;
}

Matrix leading_term(const DeformedFiberQuery& q, const GaugeElement& g) {
    if (!is_nilpotent(q.a_tilde.coefficient(0)))
        throw Error(ErrorKind::InvalidInput, "A~ mod t must be nilpotent");
    const DeformedFiberQuery one(q.a_tilde, q.r, 1);
    if (!in_deformed_fiber(one, g))
        throw Error(ErrorKind::NotMember, "g G(O) is not a point of Y_A");
    Matrix d = deformed_transform(one, g).coefficient(0);
    if (!is_nilpotent(d))
        throw Error(ErrorKind::LemmaViolation, "leading term of a point of Y_A is not nilpotent");
    return d;
}

bool is_regular_point(const DeformedFiberQuery& q, const GaugeElement& g) {
    return is_regular_nilpotent(leading_term(q, g));
}

// ---------------------------------------------------------------------------
// Regularization search

SearchCertificate regularization_search(const Connection& a, std::int64_t coweight_bound, std::int64_t depth_bound) {
    if (coweight_bound < 0 || depth_bound < 0)
        throw Error(ErrorKind::InvalidInput, "search bounds must be nonnegative");
    const ContextPtr& ctx = a.context_ptr();
    const std::size_t n = ctx->n;
    SearchStats stats{coweight_bound, depth_bound, 0};

    if (a.series().is_zero()) {
        // Ga_g(0) = -dlog(g) = f t^{-2} for g = exp(f t^{-1}).
        const std::int64_t r = -2;
        ++stats.candidates_tried;
        Matrix x = ctx->f * Rational(1, static_cast<unsigned long>(-r - 1));
        MatrixSeries m = exp_positive(MatrixSeries::from_constant(x, r + 1), kExact);
        GaugeElement g(ctx, std::move(m));
        Connection transformed = gauge_transform(g, a);
        SearchCertificate cert{g, transformed, transformed.coefficient(r), stats, r, true, Matrix::identity(n), {}, {}};
        if (!verify_search_certificate(a, cert))
            throw std::logic_error("closed-form regularization failed verification");
        return cert;
    }

    const std::int64_t r = *a.order();
    if (r > -2)
        throw Error(ErrorKind::InvalidOrder, "regularization needs ord(A) <= -2");
    if (!is_nilpotent(a.coefficient(r)))
        throw Error(ErrorKind::InvalidInput, "leading coefficient must be nilpotent");

    const std::vector<Matrix> constants = constant_family(n);
    std::vector<Matrix> alphabet = exponent_alphabet(n);
    if (ctx->kind == AlgebraKind::gl)
        alphabet.push_back(Matrix::identity(n));

    // Known window for the intermediate Ga_{E^{-1} g0^{-1}}(A), enough for any coweight shift.
    const std::int64_t reach = r + 2 * coweight_bound + 1;
    const MatrixSeries base = a.series().truncated(reach);
    const std::int64_t exp_precision = reach - r + 2;

    std::map<std::pair<std::size_t, std::vector<std::size_t>>, MatrixSeries> cache;
    auto intermediate = [&](std::size_t gi, const std::vector<std::size_t>& word) -> const MatrixSeries& {
        auto key = std::pair{gi, word};
        auto it = cache.find(key);
        if (it != cache.end())
            return it->second;
        const Matrix& g0 = constants[gi];
        const Matrix g0_inv = *inverse(g0);
        MatrixSeries b = MatrixSeries::from_constant(g0_inv) * base * MatrixSeries::from_constant(g0);
        // E = exp(t X_1) ... exp(t^d X_d); Ga_{E^{-1}}(b) = E^{-1} (b E + E').
        MatrixSeries e = MatrixSeries::identity(n);
        for (std::size_t k = 0; k < word.size(); ++k)
            e = e * exp_positive(MatrixSeries::from_constant(alphabet[word[k]], static_cast<std::int64_t>(k) + 1),
                                 exp_precision);
        if (!word.empty())
            b = invert_unit(e, exp_precision) * (b * e + e.derivative());
        return cache.emplace(key, std::move(b)).first->second;
    };

    for (std::int64_t h = 0; h <= coweight_bound; ++h)
        for (const auto& c : coweights_of_height(n, ctx->kind, h))
            for (std::int64_t d = 0; d <= depth_bound; ++d) {
                std::vector<std::size_t> word(static_cast<std::size_t>(d), 0);
                for (std::size_t gi = 0; gi < constants.size(); ++gi) {
                    std::fill(word.begin(), word.end(), 0);
                    while (true) {
                        if (d == 0 || word.back() != 0) {
                            ++stats.candidates_tried;
                            const MatrixSeries shifted = coweight_inverse_transform(intermediate(gi, word), c);
                            if (is_regular_at(shifted, r)) {
                                std::vector<Matrix> xs;
                                for (auto w : word)
                                    xs.push_back(alphabet[w]);
                                // g = t^{-c} exp(-t^d X_d) ... exp(-t X_1) g0^{-1}
                                const std::int64_t p = kDefaultRelativePrecision + 2 * h;
                                MatrixSeries gm = MatrixSeries::from_constant(*inverse(constants[gi]));
                                for (std::size_t k = 0; k < xs.size(); ++k)
                                    gm = exp_positive(MatrixSeries::from_constant(-xs[k], static_cast<std::int64_t>(k) + 1), p) * gm;
                                std::vector<Series> diag(n * n);
                                for (std::size_t i = 0; i < n; ++i)
                                    diag[i * n + i] = Series::monomial(1, -c[i]);
                                gm = MatrixSeries(n, std::move(diag)) * gm;
                                GaugeElement g(ctx, std::move(gm));
                                Connection transformed(ctx, shifted);
                                SearchCertificate cert{g,     transformed, shifted.coefficient(r), stats, r, false,
                                                       constants[gi], c,  xs};
                                if (!verify_search_certificate(a, cert))
                                    throw std::logic_error("search certificate failed verification");
                                return cert;
                            }
                        }
                        std::size_t i = word.size();
                        while (i > 0 && word[i - 1] + 1 == alphabet.size())
                            word[--i] = 0;
                        if (i == 0)
                            break;
                        ++word[i - 1];
                    }
                }
            }
    throw Error(ErrorKind::SearchExhausted, "no regular point with coweight height <= " +
                                                std::to_string(coweight_bound) + " and depth <= " +
                                                std::to_string(depth_bound) + " (" +
                                                std::to_string(stats.candidates_tried) + " candidates)");
}

bool verify_search_certificate(const Connection& a, const SearchCertificate& cert) {
    const Connection replay = gauge_transform(cert.g, a);
    const std::int64_t hi = std::min(replay.precision(), cert.transformed.precision());
    if (hi < cert.r)
        return false;
    if (!replay.series().agrees_with(cert.transformed.series()))
        return false;
    return is_regular_at(replay.series(), cert.r) && replay.coefficient(cert.r) == cert.leading;
}

// ---------------------------------------------------------------------------
// Tangent spaces

namespace {

// Principal parts deeper than this beyond window_depth are not searched for stabilization.
constexpr std::int64_t kMaxExtraDepth = 12;

std::int64_t checked_order(const Connection& a, const GaugeElement& g) {
    if (a.series().is_zero())
        throw Error(ErrorKind::InvalidOrder, "the zero connection has no finite order");
    const std::int64_t r = *a.order();
    if (!in_M_A(a, g))
        throw Error(ErrorKind::NotMember, "g is not in M_A");
    return r;
}

// B = Ga_{g^{-1}}(A) known at least up to t^top.
MatrixSeries member_connection(const Connection& a, const GaugeElement& g, std::int64_t top) {
    const MatrixSeries b = twisted(g, a.series(), 1, 0, top);
    if (!b.is_exact() && b.precision() < top)
        throw Error(ErrorKind::PrecisionExhausted, "B = Ga_{g^-1}(A) is known only up to t^" +
                                                       std::to_string(b.precision()) + ", need t^" +
                                                       std::to_string(top));
    return b;
}

std::vector<Matrix> coordinate_basis(const AlgebraContext& ctx) {
    const std::size_t n = ctx.n;
    std::vector<Matrix> basis;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                basis.push_back(Matrix::unit(n, i, j));
    for (std::size_t i = 0; i + 1 < n; ++i)
        basis.push_back(Matrix::unit(n, i, i) - Matrix::unit(n, i + 1, i + 1));
    if (ctx.kind == AlgebraKind::gl)
        basis.push_back(Matrix::identity(n));
    return basis;
}

std::int64_t dim_at_depth(const AlgebraContext& ctx, const MatrixSeries& b, std::int64_t r, std::int64_t depth) {
    const std::size_t n = ctx.n;
    const std::vector<Matrix> basis = coordinate_basis(ctx);

    // Unknowns: coordinates of X_m, m = -depth..-1. Equations: the t^j coefficient of
    // X' + [B, X] vanishes for j < r.
    const std::size_t dim = basis.size();
    const std::size_t unknowns = dim * static_cast<std::size_t>(depth);
    auto column = [&](std::int64_t m, std::size_t k) { return static_cast<std::size_t>(m + depth) * dim + k; };
    std::vector<std::vector<Rational>> rows;
    std::map<std::int64_t, Matrix> bcoef;
    for (std::int64_t j = r - depth; j < r; ++j) {
        std::vector<Matrix> contributions(unknowns, Matrix::zero(n));
        if (j + 1 >= -depth && j + 1 <= -1)
            for (std::size_t k = 0; k < dim; ++k)
                contributions[column(j + 1, k)] += basis[k] * Rational(static_cast<long>(j + 1));
        for (std::int64_t m = -depth; m <= -1; ++m) {
            const std::int64_t s = j - m;
            if (s < r)
                continue;
            auto it = bcoef.find(s);
            if (it == bcoef.end())
                it = bcoef.emplace(s, b.coefficient(s)).first;
            if (it->second.is_zero())
                continue;
            for (std::size_t k = 0; k < dim; ++k)
                contributions[column(m, k)] += bracket(it->second, basis[k]);
        }
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q) {
                std::vector<Rational> row(unknowns);
                bool nonzero = false;
                for (std::size_t u = 0; u < unknowns; ++u) {
                    row[u] = contributions[u](p, q);
                    nonzero = nonzero || sgn(row[u]) != 0;
                }
                if (nonzero)
                    rows.push_back(std::move(row));
            }
    }
    Matrix system(rows.size(), unknowns);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t u = 0; u < unknowns; ++u)
            system(i, u) = rows[i][u];
    return static_cast<std::int64_t>(unknowns - (rows.empty() ? 0 : rank(system)));
}

// Largest positive integer eigenvalue of ad(m) on g, or 0.
std::int64_t largest_integer_ad_eigenvalue(const AlgebraContext& ctx, const Matrix& m) {
    const std::vector<Matrix> basis = coordinate_basis(ctx);
    const std::size_t dim = basis.size();
    Matrix coords(ctx.n * ctx.n, dim);
    for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t u = 0; u < ctx.n * ctx.n; ++u)
            coords(u, k) = basis[k].flatten()[u];
    Matrix ad(dim, dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const auto x = solve(coords, bracket(m, basis[k]).flatten());
        for (std::size_t i = 0; i < dim; ++i)
            ad(i, k) = (*x)[i];
    }
    const std::vector<Rational> chi = characteristic_polynomial(ad);
    // Cauchy bound on the roots of a monic polynomial.
    Rational bound = 0;
    for (std::size_t i = 0; i + 1 < chi.size(); ++i)
        bound = std::max(bound, Rational(abs(chi[i])));
    const mpz_class top = mpz_class(bound.get_num() / bound.get_den()) + 1;
    if (top > 1'000'000)
        throw Error(ErrorKind::Unstabilized, "residue eigenvalues too large to scan for resonances");
    std::int64_t best = 0;
    for (long k = 1; top >= k; ++k) {
        Rational v = 0;
        for (std::size_t i = chi.size(); i-- > 0;)
            v = v * k + chi[i];
        if (v == 0)
            best = k;
    }
    return best;
}

} // namespace

std::int64_t tangent_space_dim_at_depth(const Connection& a, const GaugeElement& g, std::int64_t depth) {
    if (depth < 1)
        throw Error(ErrorKind::InvalidInput, "window depth must be positive");
    const std::int64_t r = checked_order(a, g);
    return dim_at_depth(a.context(), member_connection(a, g, r + depth - 1), r, depth);
}

std::int64_t tangent_resonance_depth(const Connection& a, const GaugeElement& g) {
    const std::int64_t r = checked_order(a, g);
    const MatrixSeries b = member_connection(a, g, -1);
    for (std::int64_t k = r; k < -1; ++k)
        if (!b.coefficient(k).is_zero())
            return 0;
    return std::max(largest_integer_ad_eigenvalue(a.context(), b.coefficient(-1)), -r - 1);
}

std::int64_t tangent_space_dim(const Connection& a, const GaugeElement& g, std::int64_t window_depth) {
    if (window_depth < 1)
        throw Error(ErrorKind::InvalidInput, "window depth must be positive");
    const std::int64_t r = checked_order(a, g);
    const std::int64_t resonance = tangent_resonance_depth(a, g);
    std::int64_t depth = std::max(window_depth, resonance);
    const std::int64_t last = resonance > 0 ? depth : window_depth + kMaxExtraDepth;
    const MatrixSeries b = twisted(g, a.series(), 1, 0, r + last + 1);
    auto at = [&](std::int64_t d) {
        if (!b.is_exact() && b.precision() < r + d - 1)
            throw Error(ErrorKind::PrecisionExhausted, "B = Ga_{g^-1}(A) is known only up to t^" +
                                                           std::to_string(b.precision()) + ", need t^" +
                                                           std::to_string(r + d - 1));
        return dim_at_depth(a.context(), b, r, d);
    };
    std::int64_t d1 = at(depth);
    for (;;) {
        const std::int64_t d2 = at(depth + 2);
        if (d1 == d2)
            return d1;
        if (depth + 2 > last)
            throw Error(ErrorKind::Unstabilized, "tangent dimension " + std::to_string(d1) + " at depth " +
                                                     std::to_string(depth) + " but " + std::to_string(d2) +
                                                     " at depth " + std::to_string(depth + 2));
        depth += 2;
        d1 = d2;
    }
}

} // namespace operforge
