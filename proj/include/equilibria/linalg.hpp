#pragma once

// Small dense linear algebra over a generic scalar: exact rationals or binary64
// with a zero tolerance.  Eigen handles the float-only work elsewhere.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "equilibria/rational.hpp"

namespace equilibria {

template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static bool is_zero(const Rational& v) { return v == 0; }
    static bool is_positive(const Rational& v) { return v > 0; }
    static bool is_negative(const Rational& v) { return v < 0; }
    static Rational magnitude(const Rational& v) { return abs(v); }
};

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static constexpr double eps = 1e-10;
    static bool is_zero(double v) { return std::abs(v) <= eps; }
    static bool is_positive(double v) { return v > eps; }
    static bool is_negative(double v) { return v < -eps; }
    static double magnitude(double v) { return std::abs(v); }
};

template <class Scalar>
using DenseVector = std::vector<Scalar>;

template <class Scalar>
using DenseMatrix = std::vector<std::vector<Scalar>>;

template <class Scalar>
Scalar dot(const DenseVector<Scalar>& a, const DenseVector<Scalar>& b)
{
    Scalar s(0);
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

template <class Scalar>
DenseVector<Scalar> subtract(const DenseVector<Scalar>& a, const DenseVector<Scalar>& b)
{
    DenseVector<Scalar> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        r[i] = a[i] - b[i];
    return r;
}

namespace detail {

// Row-echelon reduction in place; returns pivot columns.  For floats the pivot
// is chosen by magnitude and entries below eps * scale are treated as zero.
template <class Scalar>
std::vector<std::size_t> row_reduce(DenseMatrix<Scalar>& m, std::size_t cols, double rel_tol = 1e-10)
{
    using T = ScalarTraits<Scalar>;
    std::vector<std::size_t> pivots;
    const std::size_t rows = m.size();
    double scale = 0.0;
    if constexpr (!T::exact) {
        for (auto& row : m)
            for (std::size_t c = 0; c < cols; ++c)
                scale = std::max(scale, std::abs(static_cast<double>(row[c])));
        if (scale == 0.0)
            return pivots;
    }
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t best = rows;
        if constexpr (T::exact) {
            for (std::size_t i = r; i < rows; ++i)
                if (m[i][c] != 0) {
                    best = i;
                    break;
                }
        } else {
            double best_mag = rel_tol * scale;
            for (std::size_t i = r; i < rows; ++i)
                if (std::abs(m[i][c]) > best_mag) {
                    best_mag = std::abs(m[i][c]);
                    best = i;
                }
        }
        if (best == rows)
            continue;
        std::swap(m[r], m[best]);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || T::is_zero(m[i][c]))
                continue;
            Scalar factor = m[i][c] / m[r][c];
            for (std::size_t j = c; j < m[i].size(); ++j)
                m[i][j] -= factor * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

} // namespace detail

template <class Scalar>
std::size_t matrix_rank(DenseMatrix<Scalar> rows, double rel_tol = 1e-10)
{
    if (rows.empty())
        return 0;
    const std::size_t cols = rows.front().size();
    return detail::row_reduce(rows, cols, rel_tol).size();
}

/// Solves a square system; nullopt when singular.
template <class Scalar>
std::optional<DenseVector<Scalar>> solve_square(DenseMatrix<Scalar> a, DenseVector<Scalar> b,
                                                double rel_tol = 1e-12)
{
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        a[i].push_back(b[i]);
    auto pivots = detail::row_reduce(a, n, rel_tol);
    if (pivots.size() != n)
        return std::nullopt;
    DenseVector<Scalar> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = a[i][n] / a[i][i];
    return x;
}

/// Determinant by elimination.
template <class Scalar>
Scalar determinant(DenseMatrix<Scalar> a)
{
    using T = ScalarTraits<Scalar>;
    const std::size_t n = a.size();
    Scalar det(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best = n;
        if constexpr (T::exact) {
            for (std::size_t i = c; i < n; ++i)
                if (a[i][c] != 0) {
                    best = i;
                    break;
                }
        } else {
            double mag = 0.0;
            for (std::size_t i = c; i < n; ++i)
                if (std::abs(a[i][c]) > mag) {
                    mag = std::abs(a[i][c]);
                    best = i;
                }
            if (mag == 0.0)
                best = n;
        }
        if (best == n)
            return Scalar(0);
        if (best != c) {
            std::swap(a[best], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            Scalar factor = a[i][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j)
                a[i][j] -= factor * a[c][j];
        }
    }
    return det;
}

} // namespace equilibria
