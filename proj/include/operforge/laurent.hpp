#pragma once

#include "operforge/matrix.hpp"
#include "operforge/rational.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace operforge {

// Precision value of a series whose every coefficient is known (a Laurent polynomial).
inline constexpr std::int64_t kExact = std::numeric_limits<std::int64_t>::max() / 4;

// Window arithmetic that keeps kExact absorbing.
std::int64_t precision_add(std::int64_t precision, std::int64_t offset);

// Truncated Laurent series over Q.
//
// Coefficients of t^k are known for every k <= precision(); those beyond it are
// unknown, never implicitly zero. Everything below start() is zero. A series
// with precision kExact is a Laurent polynomial; the exact zero series (the
// "zero flag") has valuation +infinity.
class Series {
public:
    // Exact zero.
    Series() = default;
    Series(std::int64_t start, std::vector<Rational> coeffs, std::int64_t precision);

    // O(t^{precision+1}), not flagged as zero.
    static Series unknown_beyond(std::int64_t precision);
    static Series monomial(const Rational& c, std::int64_t power, std::int64_t precision = kExact);
    static Series constant(const Rational& c, std::int64_t precision = kExact) {
        return monomial(c, 0, precision);
    }

    std::int64_t precision() const { return precision_; }
    bool is_exact() const { return precision_ == kExact; }
    // The zero flag: known to be identically zero.
    bool is_zero() const { return is_exact() && coeffs_.empty(); }
    // No nonzero coefficient inside the window.
    bool vanishes_on_window() const { return coeffs_.empty(); }
    // Exponent of the first stored coefficient; nonzero unless the window is empty.
    std::int64_t start() const { return start_; }
    // Valuation if a nonzero coefficient is visible in the window.
    std::optional<std::int64_t> valuation() const;
    // Last exponent carrying a stored coefficient.
    std::int64_t end() const { return start_ + static_cast<std::int64_t>(coeffs_.size()) - 1; }
    const std::vector<Rational>& coeffs() const { return coeffs_; }

    // Coefficient of t^k; throws PrecisionExhausted beyond the window.
    Rational coeff(std::int64_t k) const;

    Series truncated(std::int64_t precision) const;
    // t^k times this series.
    Series shifted(std::int64_t k) const;
    Series derivative() const;
    // 1/this. Requires a visible nonzero leading coefficient. Exact non-monomial
    // inputs produce infinite expansions, which are cut at `cap`.
    Series reciprocal(std::int64_t cap) const;

    Series& operator+=(const Series& other);
    Series& operator-=(const Series& other);
    Series& operator*=(const Rational& s);

    friend Series operator+(Series a, const Series& b) { return a += b; }
    friend Series operator-(Series a, const Series& b) { return a -= b; }
    friend Series operator-(Series a) { return a *= Rational(-1); }
    friend Series operator*(Series a, const Rational& s) { return a *= s; }
    friend Series operator*(const Rational& s, Series a) { return a *= s; }
    friend Series operator*(const Series& a, const Series& b);

    // Equal coefficients on the common window.
    bool agrees_with(const Series& other) const;
    // Same window and same coefficients.
    friend bool operator==(const Series& a, const Series& b) = default;

private:
    void normalize();

    std::int64_t start_ = 0;
    std::vector<Rational> coeffs_;
    std::int64_t precision_ = kExact;
};

// Square matrix of series sharing one precision window; elements of gl_n(F).
class MatrixSeries {
public:
    MatrixSeries() = default;
    // Exact zero matrix.
    explicit MatrixSeries(std::size_t n);
    // Entries are truncated to their minimum precision.
    MatrixSeries(std::size_t n, std::vector<Series> entries);

    static MatrixSeries identity(std::size_t n);
    // m t^power, exact unless a precision is given.
    static MatrixSeries from_constant(const Matrix& m, std::int64_t power = 0, std::int64_t precision = kExact);
    // Sum of c_k t^k over the supplied (power, matrix) terms, known up to `precision`.
    static MatrixSeries from_terms(std::size_t n, const std::vector<std::pair<std::int64_t, Matrix>>& terms,
                                   std::int64_t precision);

    std::size_t size() const { return n_; }
    const Series& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    const std::vector<Series>& entries() const { return entries_; }

    std::int64_t precision() const { return precision_; }
    bool is_exact() const { return precision_ == kExact; }
    bool is_zero() const;
    bool vanishes_on_window() const;
    // Minimum entry valuation, if any nonzero coefficient is visible.
    std::optional<std::int64_t> valuation() const;
    // Coefficient matrix of t^k.
    Matrix coefficient(std::int64_t k) const;
    Series trace() const;

    MatrixSeries truncated(std::int64_t precision) const;
    MatrixSeries shifted(std::int64_t k) const;
    MatrixSeries derivative() const;

    MatrixSeries& operator+=(const MatrixSeries& other);
    MatrixSeries& operator-=(const MatrixSeries& other);
    MatrixSeries& operator*=(const Rational& s);

    friend MatrixSeries operator+(MatrixSeries a, const MatrixSeries& b) { return a += b; }
    friend MatrixSeries operator-(MatrixSeries a, const MatrixSeries& b) { return a -= b; }
    friend MatrixSeries operator-(MatrixSeries a) { return a *= Rational(-1); }
    friend MatrixSeries operator*(MatrixSeries a, const Rational& s) { return a *= s; }
    friend MatrixSeries operator*(const Rational& s, MatrixSeries a) { return a *= s; }
    friend MatrixSeries operator*(const MatrixSeries& a, const MatrixSeries& b);
    friend MatrixSeries operator*(const Series& s, const MatrixSeries& a);
    friend bool operator==(const MatrixSeries& a, const MatrixSeries& b) = default;

    bool agrees_with(const MatrixSeries& other) const;
    // Coefficient matrices of t^lo..t^hi agree (both windows must cover hi).
    bool agrees_on(const MatrixSeries& other, std::int64_t lo, std::int64_t hi) const;

private:
    std::size_t n_ = 0;
    std::vector<Series> entries_;
    std::int64_t precision_ = kExact;
};

Series determinant(const MatrixSeries& m);
MatrixSeries bracket(const MatrixSeries& a, const MatrixSeries& b);

// m^{-1} for m = t^v (M_0 + O(t)) with M_0 invertible, by Neumann iteration on
// the regular part. The relative precision is preserved; exact inputs whose
// expansion does not terminate are cut at absolute precision `cap`.
// Throws SingularLeadingMatrix when M_0 is singular.
MatrixSeries invert_unit(const MatrixSeries& m, std::int64_t cap);

// Inverse of any matrix whose determinant is visibly nonzero, via the adjugate.
// Falls back to this when the leading matrix is singular (e.g. t^{coweight}).
MatrixSeries invert(const MatrixSeries& m, std::int64_t cap);

// sum_{m>=0} X^m / m!. Requires valuation(X) >= 1, or X an exact nilpotent
// matrix polynomial (finite sum). Non-terminating sums are cut at `cap`.
MatrixSeries exp_positive(const MatrixSeries& x, std::int64_t cap);

} // namespace operforge
