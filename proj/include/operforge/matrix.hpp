#pragma once

#include "operforge/rational.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace operforge {

// Dense matrix over Q. Used for constant coefficients (elements of g) and
// for the exact linear systems that the Lie-theoretic operations reduce to.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::initializer_list<std::initializer_list<Rational>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zero(std::size_t n) { return Matrix(n, n); }
    // E_{ij}, zero-based indices.
    static Matrix unit(std::size_t n, std::size_t i, std::size_t j);
    static Matrix diagonal(const std::vector<Rational>& d);
    static Matrix column(const std::vector<Rational>& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool is_zero() const;
    Rational trace() const;
    Matrix transpose() const;
    Matrix pow(unsigned k) const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(const Rational& s);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator-(Matrix a) { return a *= Rational(-1); }
    friend Matrix operator*(Matrix a, const Rational& s) { return a *= s; }
    friend Matrix operator*(const Rational& s, Matrix a) { return a *= s; }
    friend Matrix operator*(const Matrix& a, const Matrix& b);
    friend bool operator==(const Matrix& a, const Matrix& b);

    // Entries flattened row-major into a column vector.
    std::vector<Rational> flatten() const { return data_; }
    static Matrix unflatten(std::size_t rows, std::size_t cols, const std::vector<Rational>& v);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

Matrix bracket(const Matrix& a, const Matrix& b);

// Reduced row echelon form; returns pivot columns.
std::vector<std::size_t> row_reduce(Matrix& m);
std::size_t rank(Matrix m);
// Basis of the right kernel, one column vector per element.
std::vector<std::vector<Rational>> kernel(const Matrix& m);
// Some solution of m x = b (free variables set to zero), or nullopt if inconsistent.
std::optional<std::vector<Rational>> solve(const Matrix& m, const std::vector<Rational>& b);
Rational determinant(Matrix m);
std::optional<Matrix> inverse(const Matrix& m);
// Coefficients c_0..c_n of det(x I - m), c_n = 1.
std::vector<Rational> characteristic_polynomial(const Matrix& m);

} // namespace operforge
