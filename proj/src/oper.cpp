#include "operforge/oper.hpp"

#include "operforge/error.hpp"

#include <stdexcept>
#include <string>

namespace operforge {

Connection expand(const OperForm& form) {
    std::int64_t precision = kExact;
    for (const auto& c : form.ge_coefficients)
        precision = std::min(precision, c.precision());
    MatrixSeries b = MatrixSeries::from_constant(form.slice_point, form.r, precision);
    for (std::size_t j = 0; j < form.ge_coefficients.size(); ++j) {
        const Series& c = form.ge_coefficients[j];
        if (c.vanishes_on_window() && c.is_exact())
            continue;
        b += c * MatrixSeries::from_constant(form.ctx->ge_basis[j]);
    }
    return Connection(form.ctx, std::move(b));
}

bool is_oper_form(const Connection& a) {
    const MatrixSeries& m = a.series();
    const std::size_t n = m.size();
    if (m.vanishes_on_window() && !m.is_zero())
        throw Error(ErrorKind::OrderUndetermined, "connection vanishes on its whole window");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j)
            if (!m(i, j).vanishes_on_window())
                return false;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (m(i + 1, i).vanishes_on_window())
            return false;
    return true;
}

namespace {

struct Prepared {
    std::int64_t r = 0;
    std::int64_t window = 0;
    Matrix leading;
};

Prepared prepare(const Connection& a, const NormalizationOptions& options) {
    const auto r = a.order();
    if (!r || *r >= -1)
        throw Error(ErrorKind::OrderTooLarge, "normalization needs ord(A) < -1");
    Prepared p{*r, 0, a.coefficient(*r)};
    p.window = options.precision.value_or(a.series().is_exact() ? *r + kDefaultRelativePrecision : a.precision());
    p.window = std::min(p.window, a.precision());
    if (p.window < *r)
        throw Error(ErrorKind::PrecisionExhausted, "requested window ends below ord(A)");
    return p;
}

NormalizationCertificate run(const Connection& a, const Prepared& p, const Matrix& slice_point,
                             const Matrix& conjugator, const NormalizationOptions& options) {
    const ContextPtr& ctx = a.context_ptr();
    const std::int64_t r = p.r;
    const std::int64_t window = p.window;
    const SliceSolver solver(*ctx, slice_point);

    GaugeElement gauge = GaugeElement::constant(ctx, conjugator);
    Connection current = gauge_transform(gauge, Connection(ctx, a.series().truncated(window)));
    if (current.coefficient(r) != slice_point)
        throw std::logic_error("conjugator does not carry the leading term onto the slice");

    std::int64_t steps = 0;
    for (std::int64_t k = 1; r + k <= window; ++k) {
        const auto solution = solver.solve(current.coefficient(r + k));
        if (solution.x.is_zero())
            continue;
        const GaugeElement step = GaugeElement::exp_factor(ctx, k, solution.x, window - r);
        Connection next = gauge_transform(step, current);
        if (!next.series().agrees_on(current.series(), r, r + k - 1) || next.coefficient(r + k) != solution.p)
            throw std::logic_error("normalization step changed a coefficient it must preserve");
        current = std::move(next);
        gauge = compose(step, gauge);
        ++steps;
        if (options.observer)
            options.observer(k, current);
    }

    OperForm form{ctx, r, slice_point, {}};
    const std::size_t dim = ctx->ge_basis.size();
    std::vector<std::vector<Rational>> coords(dim);
    for (std::int64_t d = r + 1; d <= window; ++d) {
        const auto c = ge_coordinates(*ctx, current.coefficient(d));
        for (std::size_t j = 0; j < dim; ++j)
            coords[j].push_back(c[j]);
    }
    for (std::size_t j = 0; j < dim; ++j)
        form.ge_coefficients.emplace_back(r + 1, std::move(coords[j]), window);
    if (!expand(form).series().agrees_with(current.series()))
        throw std::logic_error("normalized connection is not of the expected form");
    return NormalizationCertificate{std::move(gauge), std::move(form), steps, r, window};
}

} // namespace

NormalizationCertificate normalize_regular_nilpotent(const Connection& a, const NormalizationOptions& options) {
    const Prepared p = prepare(a, options);
    if (!is_regular_nilpotent(p.leading))
        throw Error(ErrorKind::NotRegularNilpotent, "leading coefficient is not regular nilpotent");
    const Matrix h = conjugate_regular_nilpotent_to_f(a.context(), p.leading);
    return run(a, p, a.context().f, h, options);
}

NormalizationCertificate normalize_regular(const Connection& a, const NormalizationOptions& options) {
    const Prepared p = prepare(a, options);
    if (!is_regular(p.leading))
        throw Error(ErrorKind::NotRegular, "leading coefficient is not regular");
    const Matrix slice_point = kostant_normal_form(a.context(), p.leading);
    const Matrix h = conjugate_regular(a.context(), p.leading, slice_point);
    return run(a, p, slice_point, h, options);
}

} // namespace operforge
