#pragma once

#include "operforge/gauge.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace operforge {

// A~ = t^{-r} A in g(O) together with the deformation parameter lambda.
// lambda = 1 gives the deformed fiber Y_A, lambda = 0 the affine Springer fiber of A~.
struct DeformedFiberQuery {
    Connection a_tilde;
    std::int64_t r = -2;
    Rational lambda = 1;

    // Throws InvalidOrder for r >= 0 and NotInAlgebra if A~ has a pole.
    DeformedFiberQuery(Connection a_tilde, std::int64_t r, Rational lambda = 1);

    // A~ = t^{-ord(A)} A. Throws InvalidOrder for the zero connection or ord(A) >= 0.
    static DeformedFiberQuery from_connection(const Connection& a, Rational lambda = 1);
};

// ord(Ga_{g^{-1}}(A)) >= r with r = ord(A), or the explicit `order` when given
// (needed for A = 0). Throws OrderUndetermined when the transformed series is
// not known far enough to decide.
bool in_M_A(const Connection& a, const GaugeElement& g, std::optional<std::int64_t> order = std::nullopt);

// Ad_{g^{-1}}(A~) - lambda t^{-r} dlog(g^{-1}), known at least up to t^0.
MatrixSeries deformed_transform(const DeformedFiberQuery& q, const GaugeElement& g);

// Whether deformed_transform lies in g(O). Throws PrecisionExhausted if the window misses t^{-1}.
bool in_deformed_fiber(const DeformedFiberQuery& q, const GaugeElement& g);

// Whether deformed_transform lies in Lie I: in g(O) with upper-triangular constant term.
bool in_iwahori_fiber(const DeformedFiberQuery& q, const GaugeElement& g);

// The constant term of deformed_transform at lambda = 1. Requires A~ mod t
// nilpotent and membership; throws NotMember otherwise, and LemmaViolation if
// the result is not nilpotent.
Matrix leading_term(const DeformedFiberQuery& q, const GaugeElement& g);

bool is_regular_point(const DeformedFiberQuery& q, const GaugeElement& g);

struct SearchStats {
    std::int64_t coweight_bound = 0;
    std::int64_t depth_bound = 0;
    std::int64_t candidates_tried = 0;
};

// The point c G(O) of Y_A with c = g0 exp(t X_1) ... exp(t^d X_d) t^{coweight};
// the certificate gauge element is g = c^{-1}, so transformed = Ga_g(A).
struct SearchCertificate {
    GaugeElement g;
    Connection transformed;
    Matrix leading;
    SearchStats stats;
    // Working order: ord(A), or -2 for A = 0.
    std::int64_t r = 0;
    // Candidate description; `shortcut` marks the closed form exp(f t^{r+1} / (-r-1)) used for A = 0.
    bool shortcut = false;
    Matrix g0;
    std::vector<std::int64_t> coweight;
    std::vector<Matrix> exponents;
};

// Iterative deepening over (coweight height, depth, candidate index).
// Throws InvalidOrder if ord(A) > -2, NotInAlgebra if A_r is not nilpotent,
// SearchExhausted when no candidate within the bounds is a regular point.
SearchCertificate regularization_search(const Connection& a, std::int64_t coweight_bound = 2,
                                        std::int64_t depth_bound = 2);

// Re-checks a certificate from scratch: replays Ga_g(A), the order bound and regularity.
bool verify_search_certificate(const Connection& a, const SearchCertificate& cert);

// dim T_g, T_g = {X in g(F) : X' + [B, X] in t^r g(O)} / g(O) with B = Ga_{g^{-1}}(A),
// counted on principal parts of depth D and D + 2, which must agree.
//
// When ord(B) >= -1 a principal part of exact depth D >= -r needs D to be an eigenvalue
// of ad(B_{-1}), so D = max(window_depth, tangent_resonance_depth) is already stable.
// Otherwise D starts at window_depth and moves up in steps of 2, at most 12 beyond it.
// Throws NotMember if g is not in M_A, Unstabilized if no two depths agree and
// PrecisionExhausted if B is not known far enough.
std::int64_t tangent_space_dim(const Connection& a, const GaugeElement& g, std::int64_t window_depth = 4);

// max(-r - 1, largest positive integer eigenvalue of ad(B_{-1})) when ord(B) >= -1, else 0.
std::int64_t tangent_resonance_depth(const Connection& a, const GaugeElement& g);

// The same count at a single depth, without the stabilization check.
std::int64_t tangent_space_dim_at_depth(const Connection& a, const GaugeElement& g, std::int64_t depth);

} // namespace operforge
