#pragma once

#include "operforge/gauge.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace operforge {

// B = S t^r + sum_j c_j(t) (ge_basis)_j with S the slice point (f for the
// regular nilpotent normalization). Every c_j has valuation >= r + 1.
struct OperForm {
    ContextPtr ctx;
    std::int64_t r = 0;
    Matrix slice_point;
    std::vector<Series> ge_coefficients;
};

Connection expand(const OperForm& form);

struct NormalizationCertificate {
    // exp(t^{k_K} X_K) ... exp(t^{k_1} X_1) * conjugator, carried as a factorization.
    GaugeElement gauge;
    OperForm result;
    std::int64_t steps = 0;
    // Ga_gauge(A) = expand(result) on [window_lo, window_hi].
    std::int64_t window_lo = 0;
    std::int64_t window_hi = 0;

    const Matrix& conjugator() const { return gauge.factorization()->constant; }
    const std::vector<ExpFactor>& factors() const { return gauge.factorization()->factors; }
};

// Called after every applied step with k and the current connection.
using NormalizationObserver = std::function<void(std::int64_t k, const Connection& current)>;

struct NormalizationOptions {
    // Absolute end of the window to normalize; defaults to the precision of A,
    // or ord(A) + kDefaultRelativePrecision when A is exact.
    std::optional<std::int64_t> precision;
    NormalizationObserver observer;
};

// Sum of psi_i X_{-alpha_i} + v with psi_i visibly nonzero on the window and v in b(F).
// Throws OrderUndetermined when A vanishes on its whole window.
bool is_oper_form(const Connection& a);

// Requires ord(A) = r < -1 and A_r regular nilpotent; the result lies in f t^r + g^e(F).
NormalizationCertificate normalize_regular_nilpotent(const Connection& a, const NormalizationOptions& options = {});

// Requires ord(A) = r < -1 and A_r regular; the result lies in S t^r + g^e(F)
// with S = kostant_normal_form(A_r).
NormalizationCertificate normalize_regular(const Connection& a, const NormalizationOptions& options = {});

} // namespace operforge
