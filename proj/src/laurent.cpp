#include "operforge/laurent.hpp"

#include "operforge/error.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>
#include <string>

namespace operforge {

std::int64_t precision_add(std::int64_t precision, std::int64_t offset) {
    return precision == kExact ? kExact : precision + offset;
}

// ---------------------------------------------------------------------------
// Series

Series::Series(std::int64_t start, std::vector<Rational> coeffs, std::int64_t precision)
    : start_(start), coeffs_(std::move(coeffs)), precision_(precision) {
    normalize();
}

void Series::normalize() {
    if (!is_exact()) {
        std::int64_t keep = precision_ - start_ + 1;
        if (keep <= 0)
            coeffs_.clear();
        else if (static_cast<std::int64_t>(coeffs_.size()) > keep)
            coeffs_.resize(static_cast<std::size_t>(keep));
    }
    std::size_t lead = 0;
    while (lead < coeffs_.size() && coeffs_[lead] == 0)
        ++lead;
    if (lead == coeffs_.size()) {
        coeffs_.clear();
        start_ = is_exact() ? 0 : precision_ + 1;
        return;
    }
    coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
    start_ += static_cast<std::int64_t>(lead);
    if (is_exact()) {
        while (!coeffs_.empty() && coeffs_.back() == 0)
            coeffs_.pop_back();
    } else {
        coeffs_.resize(static_cast<std::size_t>(precision_ - start_ + 1));
    }
}

Series Series::unknown_beyond(std::int64_t precision) { return Series(precision + 1, {}, precision); }

Series Series::monomial(const Rational& c, std::int64_t power, std::int64_t precision) {
    return Series(power, {c}, precision);
}

std::optional<std::int64_t> Series::valuation() const {
    if (coeffs_.empty())
        return std::nullopt;
    return start_;
}

Rational Series::coeff(std::int64_t k) const {
    if (k > precision_)
        throw Error(ErrorKind::PrecisionExhausted,
                    "coefficient of t^" + std::to_string(k) + " lies beyond precision " + std::to_string(precision_));
    if (k < start_ || k > end())
        return 0;
    return coeffs_[static_cast<std::size_t>(k - start_)];
}

Series Series::truncated(std::int64_t precision) const {
    if (precision >= precision_)
        return *this;
    return Series(start_, coeffs_, precision);
}

Series Series::shifted(std::int64_t k) const {
    if (is_zero())
        return *this;
    Series s = *this;
    s.start_ += k;
    s.precision_ = precision_add(precision_, k);
    return s;
}

Series Series::derivative() const {
    if (is_zero())
        return *this;
    std::vector<Rational> d(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        d[i] = coeffs_[i] * Rational(static_cast<long>(start_ + static_cast<std::int64_t>(i)));
    return Series(start_ - 1, std::move(d), precision_add(precision_, -1));
}

Series Series::reciprocal(std::int64_t cap) const {
    if (is_zero())
        throw Error(ErrorKind::SingularLeadingMatrix, "reciprocal of the zero series");
    if (coeffs_.empty())
        throw Error(ErrorKind::PrecisionExhausted, "reciprocal of a series vanishing on its window");
    const std::int64_t v = start_;
    if (is_exact() && coeffs_.size() == 1)
        return monomial(1 / coeffs_[0], -v);
    if (is_exact() && cap == kExact)
        throw std::invalid_argument("reciprocal: infinite expansion needs a finite cap");
    const std::int64_t result_precision = is_exact() ? cap : precision_ - 2 * v;
    const std::int64_t count = result_precision + v + 1;
    if (count <= 0)
        return unknown_beyond(result_precision);
    std::vector<Rational> d(static_cast<std::size_t>(count));
    const Rational inv0 = 1 / coeffs_[0];
    d[0] = inv0;
    for (std::size_t k = 1; k < d.size(); ++k) {
        Rational acc = 0;
        for (std::size_t i = 1; i <= k && i < coeffs_.size(); ++i)
            acc += coeffs_[i] * d[k - i];
        d[k] = -acc * inv0;
    }
    return Series(-v, std::move(d), result_precision);
}

Series& Series::operator+=(const Series& other) {
    if (other.is_zero())
        return *this;
    if (is_zero())
        return *this = other;
    const std::int64_t p = std::min(precision_, other.precision_);
    const std::int64_t lo = std::min(start_, other.start_);
    const std::int64_t hi = p == kExact ? std::max(end(), other.end()) : p;
    std::vector<Rational> c(hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        std::int64_t k = start_ + static_cast<std::int64_t>(i) - lo;
        if (k < static_cast<std::int64_t>(c.size()))
            c[static_cast<std::size_t>(k)] += coeffs_[i];
    }
    for (std::size_t i = 0; i < other.coeffs_.size(); ++i) {
        std::int64_t k = other.start_ + static_cast<std::int64_t>(i) - lo;
        if (k < static_cast<std::int64_t>(c.size()))
            c[static_cast<std::size_t>(k)] += other.coeffs_[i];
    }
    *this = Series(lo, std::move(c), p);
    return *this;
}

Series& Series::operator-=(const Series& other) { return *this += -other; }

Series& Series::operator*=(const Rational& s) {
    if (s == 0 && is_exact())
        return *this = Series();
    for (auto& c : coeffs_)
        c *= s;
    normalize();
    return *this;
}

namespace {

// c[i + j + offset] += a[i] * b[j] for every index that lands inside c.
void accumulate_product(std::vector<Rational>& c, std::int64_t offset, const std::vector<Rational>& a,
                        const std::vector<Rational>& b, Rational& scratch) {
    const auto size = static_cast<std::int64_t>(c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i]) == 0)
            continue;
        const std::int64_t base = offset + static_cast<std::int64_t>(i);
        if (base >= size)
            break;
        const std::size_t limit = static_cast<std::size_t>(std::min<std::int64_t>(
            static_cast<std::int64_t>(b.size()), size - base));
        for (std::size_t j = 0; j < limit; ++j) {
            if (sgn(b[j]) == 0)
                continue;
            mpq_mul(scratch.get_mpq_t(), a[i].get_mpq_t(), b[j].get_mpq_t());
            Rational& slot = c[static_cast<std::size_t>(base) + j];
            mpq_add(slot.get_mpq_t(), slot.get_mpq_t(), scratch.get_mpq_t());
        }
    }
}

} // namespace

Series operator*(const Series& a, const Series& b) {
    if (a.is_zero() || b.is_zero())
        return Series();
    const std::int64_t p =
        std::min(precision_add(a.precision_, b.start_), precision_add(b.precision_, a.start_));
    const std::int64_t lo = a.start_ + b.start_;
    const std::int64_t hi = p == kExact ? a.end() + b.end() : std::min(p, a.end() + b.end());
    std::vector<Rational> c(hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0);
    Rational scratch;
    accumulate_product(c, 0, a.coeffs_, b.coeffs_, scratch);
    return Series(lo, std::move(c), p);
}

bool Series::agrees_with(const Series& other) const { return (*this - other).vanishes_on_window(); }

// ---------------------------------------------------------------------------
// MatrixSeries

MatrixSeries::MatrixSeries(std::size_t n) : n_(n), entries_(n * n) {}

MatrixSeries::MatrixSeries(std::size_t n, std::vector<Series> entries) : n_(n), entries_(std::move(entries)) {
    assert(entries_.size() == n * n);
    precision_ = kExact;
    for (const auto& e : entries_)
        precision_ = std::min(precision_, e.precision());
    if (precision_ != kExact)
        for (auto& e : entries_)
            e = e.truncated(precision_);
}

MatrixSeries MatrixSeries::identity(std::size_t n) { return from_constant(Matrix::identity(n)); }

MatrixSeries MatrixSeries::from_constant(const Matrix& m, std::int64_t power, std::int64_t precision) {
    const std::size_t n = m.rows();
    std::vector<Series> e(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            e[i * n + j] = m(i, j) == 0 && precision == kExact ? Series() : Series::monomial(m(i, j), power, precision);
    return MatrixSeries(n, std::move(e));
}

MatrixSeries MatrixSeries::from_terms(std::size_t n, const std::vector<std::pair<std::int64_t, Matrix>>& terms,
                                      std::int64_t precision) {
    MatrixSeries acc = from_constant(Matrix::zero(n), 0, precision);
    for (const auto& [power, m] : terms)
        acc += from_constant(m, power, precision);
    return acc;
}

bool MatrixSeries::is_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Series& s) { return s.is_zero(); });
}

bool MatrixSeries::vanishes_on_window() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Series& s) { return s.vanishes_on_window(); });
}

std::optional<std::int64_t> MatrixSeries::valuation() const {
    std::optional<std::int64_t> v;
    for (const auto& e : entries_)
        if (auto ev = e.valuation(); ev && (!v || *ev < *v))
            v = ev;
    return v;
}

Matrix MatrixSeries::coefficient(std::int64_t k) const {
    if (k > precision_)
        throw Error(ErrorKind::PrecisionExhausted,
                    "coefficient of t^" + std::to_string(k) + " lies beyond precision " + std::to_string(precision_));
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            m(i, j) = (*this)(i, j).coeff(k);
    return m;
}

Series MatrixSeries::trace() const {
    Series t;
    for (std::size_t i = 0; i < n_; ++i)
        t += (*this)(i, i);
    return t;
}

MatrixSeries MatrixSeries::truncated(std::int64_t precision) const {
    if (precision >= precision_)
        return *this;
    std::vector<Series> e;
    e.reserve(entries_.size());
    for (const auto& s : entries_)
        e.push_back(s.truncated(precision));
    return MatrixSeries(n_, std::move(e));
}

MatrixSeries MatrixSeries::shifted(std::int64_t k) const {
    std::vector<Series> e;
    e.reserve(entries_.size());
    for (const auto& s : entries_)
        e.push_back(s.shifted(k));
    return MatrixSeries(n_, std::move(e));
}

MatrixSeries MatrixSeries::derivative() const {
    std::vector<Series> e;
    e.reserve(entries_.size());
    for (const auto& s : entries_)
        e.push_back(s.derivative());
    return MatrixSeries(n_, std::move(e));
}

MatrixSeries& MatrixSeries::operator+=(const MatrixSeries& other) {
    assert(n_ == other.n_);
    std::vector<Series> e = entries_;
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] += other.entries_[i];
    return *this = MatrixSeries(n_, std::move(e));
}

MatrixSeries& MatrixSeries::operator-=(const MatrixSeries& other) { return *this += -other; }

MatrixSeries& MatrixSeries::operator*=(const Rational& s) {
    for (auto& e : entries_)
        e *= s;
    return *this = MatrixSeries(n_, std::move(entries_));
}

MatrixSeries operator*(const MatrixSeries& a, const MatrixSeries& b) {
    assert(a.n_ == b.n_);
    const std::size_t n = a.n_;
    std::vector<Series> e(n * n);
    Rational scratch;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            // Entry (i, j) is sum_k a(i, k) b(k, j); its window is the smallest of the products' windows.
            std::int64_t p = kExact, lo = 0, hi = 0;
            bool any = false;
            for (std::size_t k = 0; k < n; ++k) {
                const Series& x = a(i, k);
                const Series& y = b(k, j);
                if (x.is_zero() || y.is_zero())
                    continue;
                p = std::min({p, precision_add(x.precision(), y.start()), precision_add(y.precision(), x.start())});
                const std::int64_t s = x.start() + y.start();
                const std::int64_t t = x.end() + y.end();
                lo = any ? std::min(lo, s) : s;
                hi = any ? std::max(hi, t) : t;
                any = true;
            }
            if (!any)
                continue;
            if (p != kExact)
                hi = std::min(hi, p);
            std::vector<Rational> c(hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0);
            for (std::size_t k = 0; k < n; ++k) {
                const Series& x = a(i, k);
                const Series& y = b(k, j);
                if (x.is_zero() || y.is_zero())
                    continue;
                accumulate_product(c, x.start() + y.start() - lo, x.coeffs(), y.coeffs(), scratch);
            }
            e[i * n + j] = Series(lo, std::move(c), p);
        }
    return MatrixSeries(n, std::move(e));
}

MatrixSeries operator*(const Series& s, const MatrixSeries& a) {
    std::vector<Series> e;
    e.reserve(a.entries_.size());
    for (const auto& x : a.entries_)
        e.push_back(s * x);
    return MatrixSeries(a.n_, std::move(e));
}

bool MatrixSeries::agrees_with(const MatrixSeries& other) const {
    if (n_ != other.n_)
        return false;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (!entries_[i].agrees_with(other.entries_[i]))
            return false;
    return true;
}

bool MatrixSeries::agrees_on(const MatrixSeries& other, std::int64_t lo, std::int64_t hi) const {
    for (std::int64_t k = lo; k <= hi; ++k)
        if (!(coefficient(k) == other.coefficient(k)))
            return false;
    return true;
}

Series determinant(const MatrixSeries& m) {
    // Expansion along rows over column subsets: det[mask] uses the first popcount(mask) rows.
    const std::size_t n = m.size();
    if (n == 0)
        return Series::constant(1);
    std::vector<Series> det(std::size_t{1} << n);
    det[0] = Series::constant(1);
    for (std::size_t mask = 1; mask < det.size(); ++mask) {
        const std::size_t row = static_cast<std::size_t>(std::popcount(mask)) - 1;
        Series acc;
        for (std::size_t j = 0; j < n; ++j) {
            if (!(mask & (std::size_t{1} << j)))
                continue;
            const Series& entry = m(row, j);
            const Series& minor = det[mask & ~(std::size_t{1} << j)];
            if (entry.is_zero() || minor.is_zero())
                continue;
            const auto above = static_cast<unsigned>(std::popcount(mask >> (j + 1)));
            Series term = entry * minor;
            if (above % 2)
                acc -= term;
            else
                acc += term;
        }
        det[mask] = std::move(acc);
    }
    return det.back();
}

MatrixSeries bracket(const MatrixSeries& a, const MatrixSeries& b) { return a * b - b * a; }

namespace {

bool is_exactly_nilpotent(const MatrixSeries& x) {
    if (!x.is_exact())
        return false;
    MatrixSeries p = MatrixSeries::identity(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        p = p * x;
    return p.is_zero();
}

// sum_{k>=0} q^k, exact when q is exactly nilpotent, else cut at `target`.
MatrixSeries geometric_sum(const MatrixSeries& q, std::int64_t target) {
    const std::size_t n = q.size();
    if (is_exactly_nilpotent(q)) {
        MatrixSeries sum = MatrixSeries::identity(n);
        MatrixSeries term = sum;
        for (std::size_t k = 1; k < n; ++k) {
            term = term * q;
            sum += term;
        }
        return sum;
    }
    if (target == kExact)
        throw std::invalid_argument("invert_unit: infinite expansion needs a finite cap");
    const MatrixSeries qt = q.truncated(target);
    MatrixSeries sum = MatrixSeries::identity(n).truncated(target);
    MatrixSeries term = sum;
    while (true) {
        term = (term * qt).truncated(target);
        if (term.vanishes_on_window())
            break;
        sum += term;
    }
    return sum.truncated(target);
}

} // namespace

MatrixSeries invert_unit(const MatrixSeries& m, std::int64_t cap) {
    const std::size_t n = m.size();
    auto v = m.valuation();
    if (!v)
        throw Error(ErrorKind::SingularLeadingMatrix, "matrix series vanishes on its window");
    auto inv0 = inverse(m.coefficient(*v));
    if (!inv0)
        throw Error(ErrorKind::SingularLeadingMatrix, "leading coefficient matrix is singular");
    // m = t^v (M0 + E), m^{-1} = t^{-v} sum_k (-M0^{-1} E)^k M0^{-1}
    const MatrixSeries regular = m.shifted(-*v);
    const MatrixSeries inv_lead = MatrixSeries::from_constant(*inv0);
    if (m.is_exact()) {
        const MatrixSeries q = -(inv_lead * (regular - MatrixSeries::from_constant(m.coefficient(*v))));
        if (is_exactly_nilpotent(q))
            return (geometric_sum(q, kExact) * inv_lead).shifted(-*v);
        if (cap == kExact)
            throw std::invalid_argument("invert_unit: infinite expansion needs a finite cap");
    }
    // The Neumann series collected by degree: H_0 = M0^{-1},
    // H_j = -M0^{-1} sum_{i=1..j} U_i H_{j-i}, where U_i are the coefficients of the regular part.
    const std::int64_t target = m.is_exact() ? cap + *v : regular.precision();
    if (target < 0)
        return MatrixSeries::from_constant(Matrix::zero(n), 0, target).shifted(-*v);
    const std::int64_t top = m.is_exact() ? std::min<std::int64_t>(target, [&] {
        std::int64_t e = 0;
        for (const auto& s : regular.entries())
            if (!s.vanishes_on_window())
                e = std::max(e, s.end());
        return e;
    }()) : target;
    std::vector<Matrix> u;
    for (std::int64_t i = 0; i <= top; ++i)
        u.push_back(regular.coefficient(i));
    std::vector<std::pair<std::int64_t, Matrix>> terms;
    std::vector<Matrix> h;
    h.reserve(static_cast<std::size_t>(target + 1));
    for (std::int64_t j = 0; j <= target; ++j) {
        if (j == 0) {
            h.push_back(*inv0);
        } else {
            Matrix acc = Matrix::zero(n);
            for (std::int64_t i = 1; i <= std::min(j, top); ++i)
                if (!u[static_cast<std::size_t>(i)].is_zero())
                    acc += u[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(j - i)];
            h.push_back(-(*inv0 * acc));
        }
        terms.emplace_back(j, h.back());
    }
    return MatrixSeries::from_terms(n, terms, target).shifted(-*v);
}

MatrixSeries invert(const MatrixSeries& m, std::int64_t cap) {
    const std::size_t n = m.size();
    if (auto v = m.valuation(); v && inverse(m.coefficient(*v)))
        return invert_unit(m, cap);
    const Series det = determinant(m);
    if (det.vanishes_on_window())
        throw Error(ErrorKind::SingularLeadingMatrix, "determinant vanishes on the window");
    const Series inv_det = det.reciprocal(cap);
    std::vector<Series> adj(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            // adj(i, j) = (-1)^{i+j} det(minor deleting row j, column i)
            std::vector<Series> minor;
            minor.reserve((n - 1) * (n - 1));
            for (std::size_t r = 0; r < n; ++r) {
                if (r == j)
                    continue;
                for (std::size_t c = 0; c < n; ++c)
                    if (c != i)
                        minor.push_back(m(r, c));
            }
            Series d = n == 1 ? Series::constant(1) : determinant(MatrixSeries(n - 1, std::move(minor)));
            adj[i * n + j] = (i + j) % 2 ? -d : d;
        }
    return inv_det * MatrixSeries(n, std::move(adj));
}

MatrixSeries exp_positive(const MatrixSeries& x, std::int64_t cap) {
    const std::size_t n = x.size();
    if (x.is_zero())
        return MatrixSeries::identity(n);
    if (is_exactly_nilpotent(x)) {
        MatrixSeries sum = MatrixSeries::identity(n);
        MatrixSeries term = sum;
        for (std::size_t k = 1; k < n; ++k) {
            term = (term * x) * Rational(1, static_cast<unsigned long>(k));
            sum += term;
        }
        return sum;
    }
    const std::int64_t effective = x.valuation().value_or(x.precision() + 1);
    if (x.is_exact() && effective >= 1) {
        // x = C t^k: the series is sum_m C^m t^{km} / m!.
        bool monomial = true;
        for (const auto& s : x.entries())
            if (!s.is_zero() && (s.coeffs().size() != 1 || s.start() != effective))
                monomial = false;
        if (monomial) {
            if (cap == kExact)
                throw std::invalid_argument("exp_positive: infinite expansion needs a finite cap");
            const Matrix c = x.coefficient(effective);
            std::vector<std::pair<std::int64_t, Matrix>> terms;
            Matrix power = Matrix::identity(n);
            for (std::int64_t m = 0; m * effective <= cap; ++m) {
                if (m > 0)
                    power = (power * c) * Rational(1, static_cast<unsigned long>(m));
                terms.emplace_back(m * effective, power);
            }
            return MatrixSeries::from_terms(n, terms, cap);
        }
    }
    if (effective <= 0)
        throw Error(ErrorKind::NonPositiveValuation,
                    "exp needs valuation >= 1 (got " + std::to_string(effective) + ") for a non-nilpotent argument");
    const std::int64_t target = std::min(cap, x.precision());
    if (target == kExact)
        throw std::invalid_argument("exp_positive: infinite expansion needs a finite cap");
    const MatrixSeries xt = x.truncated(target);
    MatrixSeries sum = MatrixSeries::identity(n).truncated(target);
    MatrixSeries term = sum;
    for (unsigned long k = 1;; ++k) {
        term = ((term * xt) * Rational(1, k)).truncated(target);
        if (term.vanishes_on_window())
            break;
        sum += term;
    }
    return sum.truncated(target);
}

} // namespace operforge
