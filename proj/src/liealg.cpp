#include "operforge/liealg.hpp"

#include "operforge/error.hpp"

#include <stdexcept>

namespace operforge {

std::string to_string(AlgebraKind kind) { return kind == AlgebraKind::sl ? "sl" : "gl"; }

AlgebraKind parse_algebra_kind(const std::string& text) {
    if (text == "sl")
        return AlgebraKind::sl;
    if (text == "gl")
        return AlgebraKind::gl;
    throw Error(ErrorKind::InvalidInput, "unknown algebra kind '" + text + "'");
}

bool AlgebraContext::contains(const Matrix& m) const {
    if (m.rows() != n || m.cols() != n)
        return false;
    return kind == AlgebraKind::gl || m.trace() == 0;
}

namespace {

// Matrix of X -> [a, X] on gl_n in row-major coordinates.
Matrix ad_matrix(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix ad(n * n, n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            auto col = bracket(a, Matrix::unit(n, i, j)).flatten();
            for (std::size_t r = 0; r < n * n; ++r)
                ad(r, i * n + j) = col[r];
        }
    return ad;
}

Matrix columns_to_matrix(const std::vector<Matrix>& cols, std::size_t n) {
    Matrix m(n * n, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto v = cols[c].flatten();
        for (std::size_t r = 0; r < n * n; ++r)
            m(r, c) = v[r];
    }
    return m;
}

[[noreturn]] void structure_failure(const std::string& what) {
    throw std::logic_error("make_context: " + what);
}

} // namespace

AlgebraContext make_context(std::size_t n, AlgebraKind kind) {
    if (n == 0)
        throw Error(ErrorKind::InvalidInput, "matrix size must be positive");
    AlgebraContext ctx;
    ctx.n = n;
    ctx.kind = kind;
    ctx.f = Matrix::zero(n);
    ctx.e = Matrix::zero(n);
    ctx.two_rho_check = Matrix::zero(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        ctx.simple_negatives.push_back(Matrix::unit(n, i + 1, i));
        ctx.f += ctx.simple_negatives.back();
        const long k = static_cast<long>(i + 1);
        ctx.e(i, i + 1) = Rational(k * (static_cast<long>(n) - k));
    }
    for (std::size_t i = 0; i < n; ++i)
        ctx.two_rho_check(i, i) = Rational(static_cast<long>(n) - 1 - 2 * static_cast<long>(i));

    if (!(bracket(ctx.e, ctx.f) == ctx.two_rho_check) || !(bracket(ctx.two_rho_check, ctx.e) == 2 * ctx.e) ||
        !(bracket(ctx.two_rho_check, ctx.f) == -2 * ctx.f))
        structure_failure("principal sl2 relations fail");

    for (std::size_t k = 1; k < n; ++k)
        ctx.ge_basis.push_back(ctx.e.pow(static_cast<unsigned>(k)));
    if (kind == AlgebraKind::gl)
        ctx.ge_basis.push_back(Matrix::identity(n));

    // ker(ad e) on gl_n is spanned by e^0..e^{n-1}; intersecting with sl drops Id.
    const Matrix ad_e = ad_matrix(ctx.e);
    const std::size_t kernel_dim = kernel(ad_e).size();
    const std::size_t expected = kind == AlgebraKind::gl ? n : n - 1;
    if (kernel_dim != n)
        structure_failure("dim ker(ad e) on gl_n is not n");
    for (const auto& b : ctx.ge_basis)
        if (!bracket(ctx.e, b).is_zero() || !ctx.contains(b))
            structure_failure("closed-form g^e element fails to commute with e");
    if (rank(columns_to_matrix(ctx.ge_basis, n)) != expected)
        structure_failure("g^e basis is dependent");

    Matrix images = ad_e;
    auto pivots = row_reduce(images);
    for (auto col : pivots)
        ctx.im_ad_e_basis.push_back(bracket(ctx.e, Matrix::unit(n, col / n, col % n)));
    return ctx;
}

SliceSolver::SliceSolver(const AlgebraContext& ctx, const Matrix& slice_point) : ctx_(&ctx) {
    const std::size_t n = ctx.n;
    const std::size_t nx = ctx.im_ad_e_basis.size();
    const std::size_t np = ctx.ge_basis.size();
    system_ = Matrix(n * n, nx + np);
    for (std::size_t k = 0; k < nx; ++k) {
        auto col = bracket(ctx.im_ad_e_basis[k], slice_point).flatten();
        for (std::size_t r = 0; r < n * n; ++r)
            system_(r, k) = col[r];
    }
    for (std::size_t j = 0; j < np; ++j) {
        auto col = ctx.ge_basis[j].flatten();
        for (std::size_t r = 0; r < n * n; ++r)
            system_(r, nx + j) = -col[r];
    }
    unique_ = kernel(system_).empty();
}

SliceSolver::Solution SliceSolver::solve(const Matrix& y) const {
    const AlgebraContext& ctx = *ctx_;
    if (!ctx.contains(y))
        throw Error(ErrorKind::NotInAlgebra, "coefficient is not in " + to_string(ctx.kind) + "_" + std::to_string(ctx.n));
    auto rhs = (-y).flatten();
    auto sol = operforge::solve(system_, rhs);
    if (!sol)
        throw Error(ErrorKind::SolverDegenerate, "g^e + im(ad S) does not span g at this slice point");
    const std::size_t nx = ctx.im_ad_e_basis.size();
    Solution out{Matrix::zero(ctx.n), Matrix::zero(ctx.n), {}};
    for (std::size_t k = 0; k < nx; ++k)
        out.x += (*sol)[k] * ctx.im_ad_e_basis[k];
    for (std::size_t j = 0; j < ctx.ge_basis.size(); ++j) {
        out.p += (*sol)[nx + j] * ctx.ge_basis[j];
        out.ge_coordinates.push_back((*sol)[nx + j]);
    }
    return out;
}

AdfSolution solve_ad_f(const AlgebraContext& ctx, const Matrix& y) {
    auto s = SliceSolver(ctx, ctx.f).solve(y);
    return {std::move(s.x), std::move(s.p)};
}

std::vector<Rational> ge_coordinates(const AlgebraContext& ctx, const Matrix& p) {
    Matrix basis = columns_to_matrix(ctx.ge_basis, ctx.n);
    auto sol = solve(basis, p.flatten());
    if (!sol)
        throw Error(ErrorKind::NotInAlgebra, "matrix does not lie in g^e");
    return *sol;
}

bool is_nilpotent(const Matrix& m) { return m.pow(static_cast<unsigned>(m.rows())).is_zero(); }

bool is_regular(const Matrix& m) {
    const std::size_t n = m.rows();
    return kernel(ad_matrix(m)).size() == n;
}

bool is_regular_nilpotent(const Matrix& m) {
    const std::size_t n = m.rows();
    return is_nilpotent(m) && rank(m.pow(static_cast<unsigned>(n - 1))) == 1;
}

Matrix kostant_normal_form(const AlgebraContext& ctx, const Matrix& m) {
    if (!ctx.contains(m))
        throw Error(ErrorKind::NotInAlgebra, "matrix is not in the algebra");
    if (!is_regular(m))
        throw Error(ErrorKind::NotRegular, "kostant_normal_form needs a regular element");
    const std::size_t n = ctx.n;
    const auto target = characteristic_polynomial(m);

    // Weight order: Id (weight 1, gl only), then e^j (weight j+1). The
    // coefficient of x^{n-w} is affine in the weight-w unknown once all lower
    // weights are fixed, so the unknowns are solved one at a time.
    std::vector<std::pair<Matrix, std::size_t>> ordered;
    if (ctx.kind == AlgebraKind::gl)
        ordered.emplace_back(Matrix::identity(n), n - 1);
    for (std::size_t j = 1; j < n; ++j)
        ordered.emplace_back(ctx.e.pow(static_cast<unsigned>(j)), n - j - 1);

    Matrix point = ctx.f;
    for (const auto& [basis, index] : ordered) {
        const Rational a0 = characteristic_polynomial(point)[index];
        const Rational a1 = characteristic_polynomial(point + basis)[index];
        const Rational slope = a1 - a0;
        if (slope == 0)
            throw std::logic_error("kostant_normal_form: degenerate weight step");
        point += ((target[index] - a0) / slope) * basis;
    }
    if (characteristic_polynomial(point) != target)
        throw std::logic_error("kostant_normal_form: characteristic polynomial mismatch");
    return point;
}

Matrix krylov_matrix(const Matrix& m, const std::vector<Rational>& v) {
    const std::size_t n = m.rows();
    Matrix c(n, n);
    Matrix w = Matrix::column(v);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            c(i, j) = w(i, 0);
        w = m * w;
    }
    return c;
}

std::vector<Rational> cyclic_vector(const Matrix& m) {
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Rational> v(n);
        v[i] = 1;
        if (determinant(krylov_matrix(m, v)) != 0)
            return v;
    }
    // det(krylov(v)) is a nonzero polynomial of degree n in v for regular m,
    // so it cannot vanish on all of {0..n}^n.
    std::vector<long> digits(n, 0);
    while (true) {
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (digits[pos] < static_cast<long>(n)) {
                ++digits[pos];
                break;
            }
            digits[pos] = 0;
            if (pos == 0)
                throw Error(ErrorKind::NotRegular, "no cyclic vector: matrix is not regular");
        }
        std::vector<Rational> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = digits[i];
        if (determinant(krylov_matrix(m, v)) != 0)
            return v;
    }
}

namespace {

Matrix normalize_determinant(const AlgebraContext& ctx, Matrix h) {
    if (ctx.kind != AlgebraKind::sl)
        return h;
    const Rational d = determinant(h);
    if (auto root = rational_root(d, static_cast<unsigned>(ctx.n)))
        h *= 1 / *root;
    return h;
}

} // namespace

Matrix conjugate_regular_nilpotent_to_f(const AlgebraContext& ctx, const Matrix& m) {
    if (!is_regular_nilpotent(m))
        throw Error(ErrorKind::NotRegularNilpotent, "matrix is not regular nilpotent");
    // With C = (v, mv, ..., m^{n-1}v): m C = C f, so C^{-1} m C = f.
    const Matrix c = krylov_matrix(m, cyclic_vector(m));
    Matrix h = normalize_determinant(ctx, *inverse(c));
    if (!(h * m == ctx.f * h))
        throw std::logic_error("conjugate_regular_nilpotent_to_f: verification failed");
    return h;
}

Matrix conjugate_regular(const AlgebraContext& ctx, const Matrix& m, const Matrix& target) {
    if (!is_regular(m) || !is_regular(target))
        throw Error(ErrorKind::NotRegular, "conjugate_regular needs regular matrices");
    if (characteristic_polynomial(m) != characteristic_polynomial(target))
        throw Error(ErrorKind::InvalidInput, "matrices have different characteristic polynomials");
    // Both are similar to the same companion matrix through their Krylov bases.
    const Matrix cm = krylov_matrix(m, cyclic_vector(m));
    const Matrix ct = krylov_matrix(target, cyclic_vector(target));
    Matrix h = normalize_determinant(ctx, ct * *inverse(cm));
    if (!(h * m == target * h))
        throw std::logic_error("conjugate_regular: verification failed");
    return h;
}

} // namespace operforge
