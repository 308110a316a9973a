#pragma once

#include "operforge/laurent.hpp"
#include "operforge/liealg.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace operforge {

using ContextPtr = std::shared_ptr<const AlgebraContext>;

// Contexts are deterministic in (n, kind); this returns a shared cached instance.
ContextPtr shared_context(std::size_t n, AlgebraKind kind);

// Relative working precision used when an exact input meets an infinite expansion.
inline constexpr std::int64_t kDefaultRelativePrecision = 16;

// A connection d + A on the punctured disc, A in g(F).
class Connection {
public:
    // Throws NotInAlgebra if A is not g-valued on its window (nonzero trace for sl).
    Connection(ContextPtr ctx, MatrixSeries a);

    const AlgebraContext& context() const { return *ctx_; }
    const ContextPtr& context_ptr() const { return ctx_; }
    const MatrixSeries& series() const { return a_; }
    std::int64_t precision() const { return a_.precision(); }

    // ord(A); nullopt for the exact zero connection (order +infinity).
    // Throws OrderUndetermined if A vanishes on its window without being exactly zero.
    std::optional<std::int64_t> order() const;
    // A_r for r = ord(A).
    Matrix leading() const;
    Matrix coefficient(std::int64_t k) const { return a_.coefficient(k); }

    friend bool operator==(const Connection& a, const Connection& b) {
        return *a.ctx_ == *b.ctx_ && a.a_ == b.a_;
    }

private:
    ContextPtr ctx_;
    MatrixSeries a_;
};

// Convenience: sum of constant matrices times t^power, known up to `precision`.
Connection make_connection(ContextPtr ctx, const std::vector<std::pair<std::int64_t, Matrix>>& terms,
                           std::int64_t precision = kExact);

struct ExpFactor {
    std::int64_t k = 1;
    Matrix x;
    friend bool operator==(const ExpFactor&, const ExpFactor&) = default;
};

// g = exp(t^{k_m} X_m) ... exp(t^{k_1} X_1) * constant, factors stored first-applied first.
struct Factorization {
    std::vector<ExpFactor> factors;
    Matrix constant;
    friend bool operator==(const Factorization&, const Factorization&) = default;
};

// Expands a factorization with each exponential known up to absolute precision `precision`.
MatrixSeries expand(const Factorization& fact, std::int64_t precision);

// An element of G(F). For sl the determinant must be a nonzero constant:
// scalar matrices act trivially, so g stands for g / det(g)^{1/n} in SL_n.
class GaugeElement {
public:
    // Throws SingularLeadingMatrix if det(g) is not visibly nonzero and
    // NotInAlgebra for an sl element with non-constant determinant.
    GaugeElement(ContextPtr ctx, MatrixSeries g, std::optional<Factorization> factorization = std::nullopt);

    static GaugeElement identity(ContextPtr ctx);
    static GaugeElement constant(ContextPtr ctx, const Matrix& m);
    // exp(t^k X), exact when X is nilpotent, otherwise known up to `precision`.
    static GaugeElement exp_factor(ContextPtr ctx, std::int64_t k, const Matrix& x, std::int64_t precision);
    // t^{coweight} = diag(t^{c_1}, ..., t^{c_n}).
    static GaugeElement coweight(ContextPtr ctx, const std::vector<std::int64_t>& c);
    static GaugeElement from_factorization(ContextPtr ctx, Factorization fact, std::int64_t precision);

    const AlgebraContext& context() const { return *ctx_; }
    const ContextPtr& context_ptr() const { return ctx_; }
    const MatrixSeries& matrix() const { return g_; }
    const std::optional<Factorization>& factorization() const { return factorization_; }
    std::int64_t precision() const { return g_.precision(); }

private:
    struct Unchecked {};
    GaugeElement(Unchecked, ContextPtr ctx, MatrixSeries g, std::optional<Factorization> factorization)
        : ctx_(std::move(ctx)), g_(std::move(g)), factorization_(std::move(factorization)) {}

    friend GaugeElement compose(const GaugeElement& g, const GaugeElement& h);
    friend GaugeElement inverse(const GaugeElement& g, std::int64_t cap);

    ContextPtr ctx_;
    MatrixSeries g_;
    std::optional<Factorization> factorization_;
};

// (d/dt g) g^{-1}. Exact inputs whose inverse does not terminate are cut at `cap`.
MatrixSeries dlog(const GaugeElement& g, std::int64_t cap = kDefaultRelativePrecision);

// Ga_g(A) = g A g^{-1} - dlog(g). For g in G(O) known to N_g and A known on
// [r, N_A], the result is certified on at least [r, min(N_A, r + N_g)].
// Throws PrecisionExhausted if the window no longer reaches ord(A).
Connection gauge_transform(const GaugeElement& g, const Connection& a);

// Ad_g(A) = g A g^{-1} on a bare matrix series.
MatrixSeries adjoint(const GaugeElement& g, const MatrixSeries& a, std::int64_t cap);

GaugeElement compose(const GaugeElement& g, const GaugeElement& h);
GaugeElement inverse(const GaugeElement& g, std::int64_t cap = kDefaultRelativePrecision);

inline std::optional<std::int64_t> order(const Connection& a) { return a.order(); }

} // namespace operforge
