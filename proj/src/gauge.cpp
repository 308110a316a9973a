#include "operforge/gauge.hpp"

#include "operforge/error.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace operforge {

ContextPtr shared_context(std::size_t n, AlgebraKind kind) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, AlgebraKind>, ContextPtr> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{n, kind}];
    if (!slot)
        slot = std::make_shared<const AlgebraContext>(make_context(n, kind));
    return slot;
}

// ---------------------------------------------------------------------------
// Connection

Connection::Connection(ContextPtr ctx, MatrixSeries a) : ctx_(std::move(ctx)), a_(std::move(a)) {
    if (a_.size() != ctx_->n)
        throw Error(ErrorKind::ContextMismatch, "connection matrix size does not match the algebra");
    if (ctx_->kind == AlgebraKind::sl && !a_.trace().vanishes_on_window())
        throw Error(ErrorKind::NotInAlgebra, "sl connection has nonzero trace");
}

std::optional<std::int64_t> Connection::order() const {
    if (a_.is_zero())
        return std::nullopt;
    auto v = a_.valuation();
    if (!v)
        throw Error(ErrorKind::OrderUndetermined,
                    "connection vanishes up to t^" + std::to_string(a_.precision()) + "; its order lies beyond the window");
    return v;
}

Matrix Connection::leading() const {
    auto r = order();
    return r ? a_.coefficient(*r) : Matrix::zero(ctx_->n);
}

Connection make_connection(ContextPtr ctx, const std::vector<std::pair<std::int64_t, Matrix>>& terms,
                           std::int64_t precision) {
    const std::size_t n = ctx->n;
    return Connection(std::move(ctx), MatrixSeries::from_terms(n, terms, precision));
}

// ---------------------------------------------------------------------------
// GaugeElement

MatrixSeries expand(const Factorization& fact, std::int64_t precision) {
    const std::size_t n = fact.constant.rows();
    MatrixSeries g = MatrixSeries::identity(n);
    for (const auto& f : fact.factors)
        g = exp_positive(MatrixSeries::from_constant(f.x, f.k), precision) * g;
    return g * MatrixSeries::from_constant(fact.constant);
}

GaugeElement::GaugeElement(ContextPtr ctx, MatrixSeries g, std::optional<Factorization> factorization)
    : ctx_(std::move(ctx)), g_(std::move(g)), factorization_(std::move(factorization)) {
    if (g_.size() != ctx_->n)
        throw Error(ErrorKind::ContextMismatch, "gauge matrix size does not match the algebra");
    const Series det = determinant(g_);
    if (det.vanishes_on_window())
        throw Error(ErrorKind::SingularLeadingMatrix, "gauge element has no visible nonzero determinant");
    if (ctx_->kind == AlgebraKind::sl) {
        const bool constant = det.start() == 0 && (det - Series::constant(det.coeff(0))).vanishes_on_window();
        if (!constant)
            throw Error(ErrorKind::NotInAlgebra, "sl gauge element must have constant determinant");
    }
    if (factorization_) {
        const std::int64_t p = g_.is_exact() ? kDefaultRelativePrecision : g_.precision();
        if (!expand(*factorization_, p).agrees_with(g_))
            throw Error(ErrorKind::InvalidInput, "factorization does not reproduce the gauge matrix");
    }
}

GaugeElement GaugeElement::identity(ContextPtr ctx) {
    const std::size_t n = ctx->n;
    return GaugeElement(std::move(ctx), MatrixSeries::identity(n), Factorization{{}, Matrix::identity(n)});
}

GaugeElement GaugeElement::constant(ContextPtr ctx, const Matrix& m) {
    return GaugeElement(ctx, MatrixSeries::from_constant(m), Factorization{{}, m});
}

GaugeElement GaugeElement::exp_factor(ContextPtr ctx, std::int64_t k, const Matrix& x, std::int64_t precision) {
    const std::size_t n = ctx->n;
    return from_factorization(std::move(ctx), Factorization{{ExpFactor{k, x}}, Matrix::identity(n)}, precision);
}

GaugeElement GaugeElement::coweight(ContextPtr ctx, const std::vector<std::int64_t>& c) {
    const std::size_t n = ctx->n;
    if (c.size() != n)
        throw Error(ErrorKind::ContextMismatch, "coweight length does not match the algebra");
    std::vector<Series> e(n * n);
    for (std::size_t i = 0; i < n; ++i)
        e[i * n + i] = Series::monomial(1, c[i]);
    return GaugeElement(std::move(ctx), MatrixSeries(n, std::move(e)));
}

GaugeElement GaugeElement::from_factorization(ContextPtr ctx, Factorization fact, std::int64_t precision) {
    if (fact.constant.rows() != ctx->n)
        throw Error(ErrorKind::ContextMismatch, "factorization size does not match the algebra");
    for (const auto& f : fact.factors) {
        if (f.x.rows() != ctx->n || f.x.cols() != ctx->n)
            throw Error(ErrorKind::ContextMismatch, "exponential factor size does not match the algebra");
        if (f.k < 0 || !ctx->contains(f.x))
            throw Error(ErrorKind::NotInAlgebra, "exponential factor must be t^k X with k >= 0 and X in the algebra");
    }
    GaugeElement head(std::move(ctx), MatrixSeries::from_constant(fact.constant));
    MatrixSeries g = expand(fact, precision);
    return GaugeElement(Unchecked{}, head.ctx_, std::move(g), std::move(fact));
}

// ---------------------------------------------------------------------------
// Gauge action

MatrixSeries dlog(const GaugeElement& g, std::int64_t cap) {
    return g.matrix().derivative() * invert(g.matrix(), cap);
}

MatrixSeries adjoint(const GaugeElement& g, const MatrixSeries& a, std::int64_t cap) {
    return g.matrix() * a * invert(g.matrix(), cap);
}

Connection gauge_transform(const GaugeElement& g, const Connection& a) {
    if (!(g.context() == a.context()))
        throw Error(ErrorKind::ContextMismatch, "gauge element and connection live in different algebras");
    const MatrixSeries& am = a.series();
    const std::int64_t va = am.is_zero() ? 0 : am.valuation().value_or(am.precision() + 1);
    const std::int64_t vg = *g.matrix().valuation();
    const std::int64_t target = am.is_exact() ? va + kDefaultRelativePrecision : am.precision();
    // Cap for exact inverses: deep enough that neither Ad nor dlog is limited by it.
    const std::int64_t cap = target - vg - std::min<std::int64_t>(va, 0) + 2;

    const MatrixSeries g_inv = invert(g.matrix(), cap);
    MatrixSeries out = g.matrix() * am * g_inv - g.matrix().derivative() * g_inv;
    if (auto v = am.valuation(); v && out.precision() < *v)
        throw Error(ErrorKind::PrecisionExhausted, "gauge transform window ends at t^" +
                                                       std::to_string(out.precision()) + ", below the input order " +
                                                       std::to_string(*v));
    return Connection(a.context_ptr(), std::move(out));
}

GaugeElement compose(const GaugeElement& g, const GaugeElement& h) {
    if (!(g.context() == h.context()))
        throw Error(ErrorKind::ContextMismatch, "cannot compose gauge elements of different algebras");
    std::optional<Factorization> fact;
    const auto& fg = g.factorization();
    const auto& fh = h.factorization();
    if (fg && fh && fg->constant == Matrix::identity(g.context().n)) {
        fact = Factorization{fh->factors, fh->constant};
        fact->factors.insert(fact->factors.end(), fg->factors.begin(), fg->factors.end());
    }
    MatrixSeries product = g.matrix() * h.matrix();
    return GaugeElement(GaugeElement::Unchecked{}, g.context_ptr(), std::move(product), std::move(fact));
}

GaugeElement inverse(const GaugeElement& g, std::int64_t cap) {
    std::optional<Factorization> fact;
    if (const auto& fg = g.factorization(); fg && fg->constant == Matrix::identity(g.context().n)) {
        fact = Factorization{{}, fg->constant};
        for (auto it = fg->factors.rbegin(); it != fg->factors.rend(); ++it)
            fact->factors.push_back(ExpFactor{it->k, -it->x});
    }
    return GaugeElement(GaugeElement::Unchecked{}, g.context_ptr(), invert(g.matrix(), cap), std::move(fact));
}

} // namespace operforge
