#pragma once

#include "operforge/matrix.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace operforge {

enum class AlgebraKind { sl, gl };

std::string to_string(AlgebraKind kind);
AlgebraKind parse_algebra_kind(const std::string& text);

// Structure data of sl_n or gl_n in its defining representation. The Borel
// subalgebra is the upper-triangular one, so X_{-alpha_i} = E_{i+1,i}.
struct AlgebraContext {
    std::size_t n = 0;
    AlgebraKind kind = AlgebraKind::sl;
    std::vector<Matrix> simple_negatives;
    Matrix f;
    Matrix e;
    Matrix two_rho_check;
    // e, e^2, ..., e^{n-1}, followed by Id for gl.
    std::vector<Matrix> ge_basis;
    // A basis of im(ad e), the complement of ker(ad f) used by the slice solver.
    std::vector<Matrix> im_ad_e_basis;

    std::size_t dimension() const { return kind == AlgebraKind::sl ? n * n - 1 : n * n; }
    bool contains(const Matrix& m) const;
    friend bool operator==(const AlgebraContext& a, const AlgebraContext& b) {
        return a.n == b.n && a.kind == b.kind;
    }
};

// Builds the principal sl2-triple (e, 2rho^vee, f) with e_{i,i+1} = i(n-i) and
// checks the closed-form basis of g^e against an exact kernel computation.
AlgebraContext make_context(std::size_t n, AlgebraKind kind);

// For a slice point S in f + g^e, solves Y + [X, S] = P with X in im(ad e) and
// P in g^e. With S = f this is the splitting g = g^e + ad f(g).
class SliceSolver {
public:
    struct Solution {
        Matrix x;
        Matrix p;
        // Coordinates of p in ctx.ge_basis.
        std::vector<Rational> ge_coordinates;
    };

    SliceSolver(const AlgebraContext& ctx, const Matrix& slice_point);

    // Throws NotInAlgebra for Y outside g, SolverDegenerate if no solution exists.
    Solution solve(const Matrix& y) const;
    // Whether X is determined uniquely (im(ad e) meets ker(ad S) trivially).
    bool unique() const { return unique_; }

private:
    const AlgebraContext* ctx_;
    Matrix system_;
    bool unique_ = true;
};

struct AdfSolution {
    Matrix x;
    Matrix p;
};

AdfSolution solve_ad_f(const AlgebraContext& ctx, const Matrix& y);

// Coordinates of an element of g^e in ctx.ge_basis; throws NotInAlgebra otherwise.
std::vector<Rational> ge_coordinates(const AlgebraContext& ctx, const Matrix& p);

bool is_nilpotent(const Matrix& m);
// Centralizer in gl_n has dimension n.
bool is_regular(const Matrix& m);
bool is_regular_nilpotent(const Matrix& m);

// The unique point of f + g^e with the characteristic polynomial of m.
Matrix kostant_normal_form(const AlgebraContext& ctx, const Matrix& m);

// h with h m h^{-1} = f, built from the Krylov basis of the first standard
// basis vector that is cyclic for m. For sl, det(h) = 1 whenever det has a
// rational n-th root; otherwise h is left as computed (scalars act trivially).
Matrix conjugate_regular_nilpotent_to_f(const AlgebraContext& ctx, const Matrix& m);

// h with h m h^{-1} = target for regular m and target sharing a characteristic polynomial.
Matrix conjugate_regular(const AlgebraContext& ctx, const Matrix& m, const Matrix& target);

// First vector (standard basis, then the grid {0..n}^n in lexicographic order)
// whose Krylov matrix (v, mv, ..., m^{n-1}v) is invertible. m must be regular.
std::vector<Rational> cyclic_vector(const Matrix& m);
Matrix krylov_matrix(const Matrix& m, const std::vector<Rational>& v);

} // namespace operforge
