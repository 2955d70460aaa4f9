#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "equilibria/error.hpp"
#include "equilibria/linalg.hpp"
#include "equilibria/lp.hpp"
#include "equilibria/rational.hpp"

namespace equilibria {

using Point = Eigen::VectorXd;
using RationalPoint = DenseVector<Rational>;

inline RationalPoint to_rational(const Point& p, std::uint64_t max_den = default_snap_denominator)
{
    RationalPoint r(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i)
        r[static_cast<std::size_t>(i)] = snap_to_rational(p[i], max_den);
    return r;
}

inline Point to_point(const RationalPoint& r)
{
    Point p(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i)
        p[static_cast<Eigen::Index>(i)] = to_double(r[i]);
    return p;
}

inline DenseVector<double> to_dense(const Point& p) { return {p.data(), p.data() + p.size()}; }

/// base + span of orthonormal columns of `basis` (ambient x dim).
struct AffineSubspace {
    Point base;
    Eigen::MatrixXd basis;

    Eigen::Index ambient() const { return base.size(); }
    Eigen::Index dim() const { return basis.cols(); }

    Point coordinates(const Point& p) const { return basis.transpose() * (p - base); }
    Point from_coordinates(const Point& t) const { return base + basis * t; }

    static AffineSubspace whole(Eigen::Index n)
    {
        return {Point::Zero(n), Eigen::MatrixXd::Identity(n, n)};
    }

    /// Orthonormalizes arbitrary direction vectors (columns); drops dependent ones.
    static AffineSubspace from_directions(const Point& base, const Eigen::MatrixXd& directions,
                                          double rel_tol = 1e-10)
    {
        if (directions.rows() != base.size())
            throw Error(Errc::dimension_mismatch, "direction vectors do not match base dimension");
        AffineSubspace L{base, Eigen::MatrixXd(base.size(), 0)};
        if (directions.cols() == 0)
            return L;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(directions, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s[i] > rel_tol * std::max(1.0, s[0]))
                ++r;
        L.basis = svd.matrixU().leftCols(r);
        return L;
    }
};

inline void check_dims(const Point& a, const Point& b)
{
    if (a.size() != b.size())
        throw Error(Errc::dimension_mismatch, "points have different dimensions");
}

inline Point project_onto(const Point& p, const AffineSubspace& L)
{
    check_dims(p, L.base);
    return L.from_coordinates(L.coordinates(p));
}

inline AffineSubspace affine_span(const std::vector<Point>& points, double rel_tol = 1e-10)
{
    if (points.empty())
        throw Error(Errc::invalid_argument, "affine span of an empty set");
    const Eigen::Index n = points.front().size();
    Eigen::MatrixXd centered(n, static_cast<Eigen::Index>(points.size()) - 1);
    double scale = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        check_dims(points[i], points.front());
        centered.col(static_cast<Eigen::Index>(i) - 1) = points[i] - points.front();
        scale = std::max(scale, centered.col(static_cast<Eigen::Index>(i) - 1).norm());
    }
    if (scale == 0.0)
        return {points.front(), Eigen::MatrixXd(n, 0)};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > rel_tol * s[0])
            ++r;
    return {points.front(), svd.matrixU().leftCols(r)};
}

/// Point of aff(points) equidistant from all of them; `weights` shifts the
/// squared distances (power distance |x-c|^2 + w), zero for the plain case.
template <class Scalar>
DenseVector<Scalar> circumcenter(const std::vector<DenseVector<Scalar>>& points,
                                 const std::vector<Scalar>& weights = {})
{
    if (points.empty())
        throw Error(Errc::invalid_argument, "circumcenter of an empty set");
    const std::size_t k = points.size() - 1;
    const auto& p0 = points.front();
    std::vector<DenseVector<Scalar>> e(k);
    for (std::size_t j = 0; j < k; ++j) {
        if (points[j + 1].size() != p0.size())
            throw Error(Errc::dimension_mismatch, "circumcenter inputs differ in dimension");
        e[j] = subtract(points[j + 1], p0);
    }
    // x = p0 + sum t_j e_j with 2 (x - p0).e_j = |e_j|^2 + w_j - w_0.
    DenseMatrix<Scalar> gram(k, DenseVector<Scalar>(k));
    DenseVector<Scalar> rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            gram[i][j] = Scalar(2) * dot(e[i], e[j]);
        rhs[i] = dot(e[i], e[i]);
        if (!weights.empty())
            rhs[i] += weights[i + 1] - weights[0];
    }
    if constexpr (!ScalarTraits<Scalar>::exact) {
        // Gram determinant test relative to the edge scale.
        double scale = 1.0;
        for (std::size_t i = 0; i < k; ++i)
            scale *= std::max(1e-300, static_cast<double>(gram[i][i]));
        if (k > 0 && std::abs(static_cast<double>(determinant(gram))) <= 1e-12 * scale)
            throw Error(Errc::degenerate_input, "circumcenter inputs are affinely dependent");
    }
    auto t = solve_square(gram, rhs);
    if (!t)
        throw Error(Errc::degenerate_input, "circumcenter inputs are affinely dependent");
    DenseVector<Scalar> x = p0;
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < x.size(); ++c)
            x[c] += (*t)[j] * e[j][c];
    return x;
}

inline Point circumcenter(const std::vector<Point>& points)
{
    std::vector<DenseVector<double>> dense;
    for (const auto& p : points)
        dense.push_back(to_dense(p));
    auto x = circumcenter<double>(dense);
    return Eigen::Map<Point>(x.data(), static_cast<Eigen::Index>(x.size()));
}

enum class HullStatus { interior, boundary, outside };

/// interior: barycentric weights all positive (relative interior of the hull).
/// outside: normal and offset with normal.v + offset <= 0 on vertices and
/// normal.p + offset > 0.
template <class Scalar>
struct HullMembershipT {
    HullStatus status = HullStatus::outside;
    std::vector<Scalar> barycentric;
    std::vector<Scalar> normal;
    Scalar offset{0};
};

using HullMembership = HullMembershipT<Rational>;

template <class Scalar>
HullMembershipT<Scalar> hull_membership(const DenseVector<Scalar>& p,
                                        const std::vector<DenseVector<Scalar>>& vertices)
{
    if (vertices.empty())
        throw Error(Errc::invalid_argument, "hull of an empty vertex list");
    const std::size_t n = p.size(), m = vertices.size();
    for (const auto& v : vertices)
        if (v.size() != n)
            throw Error(Errc::dimension_mismatch, "vertex dimension differs from the query point");

    HullMembershipT<Scalar> out;
    // Pass one: plain feasibility, to get a separating certificate if outside.
    lp::Problem<Scalar> feas(m);
    feas.add(std::vector<Scalar>(m, Scalar(1)), lp::Relation::equal, Scalar(1));
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<Scalar> row(m);
        for (std::size_t i = 0; i < m; ++i)
            row[i] = vertices[i][c];
        feas.add(row, lp::Relation::equal, p[c]);
    }
    auto sol = lp::solve(feas);
    if (sol.status == lp::Status::infeasible) {
        out.status = HullStatus::outside;
        out.offset = sol.farkas[0];
        out.normal.assign(sol.farkas.begin() + 1, sol.farkas.end());
        return out;
    }

    // Pass two: maximize the smallest weight.
    lp::Problem<Scalar> inner(m + 1);
    inner.set_free(m);
    inner.objective[m] = Scalar(1);
    for (const auto& c : feas.rows) {
        auto row = c.coeffs;
        row.push_back(Scalar(0));
        inner.add(row, lp::Relation::equal, c.rhs);
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Scalar> row(m + 1, Scalar(0));
        row[i] = Scalar(1);
        row[m] = Scalar(-1);
        inner.add(row, lp::Relation::greater_equal, Scalar(0));
    }
    std::vector<Scalar> cap(m + 1, Scalar(0));
    cap[m] = Scalar(1);
    inner.add(cap, lp::Relation::less_equal, Scalar(1));
    auto best = lp::solve(inner);
    best.x.resize(m);
    out.barycentric = best.x;
    out.status = ScalarTraits<Scalar>::is_positive(best.value) ? HullStatus::interior : HullStatus::boundary;
    return out;
}

/// Float inputs are snapped to rationals and classified exactly.
inline HullMembership hull_membership(const Point& p, const std::vector<Point>& vertices)
{
    std::vector<RationalPoint> v;
    for (const auto& q : vertices) {
        check_dims(q, p);
        v.push_back(to_rational(q));
    }
    return hull_membership<Rational>(to_rational(p), v);
}

} // namespace equilibria
