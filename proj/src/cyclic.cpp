#include "operforge/cyclic.hpp"

#include "operforge/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>

namespace operforge {

namespace {

void require_gl(const Connection& a) {
    if (a.context().kind != AlgebraKind::gl)
        throw Error(ErrorKind::ContextMismatch, "cyclic vectors are computed for gl connections");
}

std::vector<std::vector<std::int64_t>> sorted_exponents(std::size_t n, std::int64_t budget) {
    std::vector<std::vector<std::int64_t>> all;
    std::vector<std::int64_t> m(n, -budget);
    while (true) {
        all.push_back(m);
        std::size_t i = n;
        while (i > 0 && m[i - 1] == budget)
            m[--i] = -budget;
        if (i == 0)
            break;
        ++m[i - 1];
    }
    auto key = [](const std::vector<std::int64_t>& v) {
        std::int64_t pole = 0, height = 0;
        for (auto x : v) {
            pole = std::max(pole, -x);
            height += std::abs(x);
        }
        return std::pair{pole, height};
    };
    std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return all;
}

std::vector<std::vector<Rational>> patterns(std::size_t n) {
    std::vector<std::vector<Rational>> p(3, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) {
        p[0][i] = 1;
        p[1][i] = static_cast<long>(i + 1);
        p[2][i] = i % 2 ? -1 : 1;
    }
    return p;
}

} // namespace

std::vector<Series> apply_nabla(const Connection& a, const std::vector<Series>& v) {
    require_gl(a);
    const std::size_t n = a.context().n;
    if (v.size() != n)
        throw Error(ErrorKind::ContextMismatch, "vector length does not match the connection");
    std::vector<Series> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Series acc = v[i].derivative();
        for (std::size_t j = 0; j < n; ++j)
            if (!a.series()(i, j).is_zero() && !v[j].is_zero())
                acc += a.series()(i, j) * v[j];
        out[i] = std::move(acc);
    }
    return out;
}

MatrixSeries wronskian(const Connection& a, const std::vector<Series>& phi) {
    const std::size_t n = a.context().n;
    std::vector<Series> entries(n * n);
    std::vector<Series> column = phi;
    for (std::size_t j = 0; j < n; ++j) {
        if (j > 0)
            column = apply_nabla(a, column);
        for (std::size_t i = 0; i < n; ++i)
            entries[i * n + j] = column[i];
    }
    return MatrixSeries(n, std::move(entries));
}

std::vector<std::vector<Series>> cyclic_candidates(std::size_t n, std::int64_t pole_budget) {
    std::vector<std::vector<Series>> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Series> v(n);
        v[i] = Series::constant(1);
        out.push_back(std::move(v));
    }
    const auto exponents = sorted_exponents(n, pole_budget);
    for (const auto& c : patterns(n))
        for (const auto& m : exponents) {
            std::vector<Series> v(n);
            for (std::size_t i = 0; i < n; ++i)
                v[i] = Series::monomial(c[i], m[i]);
            out.push_back(std::move(v));
        }
    return out;
}

CyclicWitness find_cyclic_vector(const Connection& a, std::int64_t pole_budget) {
    require_gl(a);
    if (pole_budget < 0)
        throw Error(ErrorKind::InvalidInput, "pole budget must be nonnegative");
    const std::size_t n = a.context().n;
    bool undetermined = false;
    std::size_t index = 0;
    for (auto& phi : cyclic_candidates(n, pole_budget)) {
        MatrixSeries w = wronskian(a, phi);
        const Series det = determinant(w);
        if (auto v = det.valuation())
            return CyclicWitness{std::move(phi), std::move(w), *v, index};
        if (!det.is_zero())
            undetermined = true;
        ++index;
    }
    if (undetermined)
        throw Error(ErrorKind::PrecisionExhausted,
                    "every candidate Wronskian determinant vanished on its window; raise the precision");
    throw Error(ErrorKind::SearchExhausted,
                "no cyclic vector among candidates with pole budget " + std::to_string(pole_budget));
}

CyclicOper oper_from_cyclic(const Connection& a, const CyclicWitness& w) {
    require_gl(a);
    const std::size_t n = a.context().n;
    GaugeElement g(a.context_ptr(), w.wronskian);

    // Columns nabla^j phi are rebuilt so that each keeps its own precision, then rescaled to
    // valuation 0. Only the last column of B = W^{-1} (A W + W') is unknown.
    std::vector<std::vector<Series>> columns{w.phi};
    for (std::size_t j = 0; j < n; ++j)
        columns.push_back(apply_nabla(a, columns.back()));
    const std::vector<Series>& last = columns[n];

    std::vector<std::int64_t> shift(n, 0);
    std::vector<Series> scaled(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        std::optional<std::int64_t> v;
        for (const auto& s : columns[j])
            if (auto vi = s.valuation())
                v = v ? std::min(*v, *vi) : *vi;
        shift[j] = v.value_or(0);
        for (std::size_t i = 0; i < n; ++i)
            scaled[i * n + j] = columns[j][i].shifted(-shift[j]);
    }

    const auto va = a.series().valuation();
    const std::int64_t target = a.series().is_exact() ? va.value_or(0) + kDefaultRelativePrecision : a.precision();
    std::int64_t vlast = target;
    for (const auto& s : last)
        if (auto v = s.valuation())
            vlast = std::min(vlast, *v);
    const std::int64_t top = *std::max_element(shift.begin(), shift.end());
    const MatrixSeries winv = invert(MatrixSeries(n, std::move(scaled)), target - vlast + top + 2);

    std::vector<Series> entries(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j + 1 < n; ++j)
            entries[i * n + j] = i == j + 1 ? Series(0, {Rational(1)}, kExact) : Series();
        Series c;
        for (std::size_t k = 0; k < n; ++k)
            c = c + winv(i, k) * last[k];
        entries[i * n + n - 1] = c.shifted(-shift[i]);
    }
    MatrixSeries b(n, std::move(entries));
    if (!b.is_exact() && b.precision() > target)
        b = b.truncated(target);
    if (n > 1 && b.precision() < 0)
        throw Error(ErrorKind::PrecisionExhausted, "companion form is known only up to t^" +
                                                       std::to_string(b.precision()) +
                                                       ", below its unit subdiagonal");
    return CyclicOper{std::move(g), Connection(a.context_ptr(), std::move(b))};
}

} // namespace operforge
