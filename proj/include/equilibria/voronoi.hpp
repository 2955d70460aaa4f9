#pragma once

// Voronoi (and power) diagrams with cells of every dimension, built by
// enumerating nearest-site sets and testing each with an LP.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "equilibria/error.hpp"
#include "equilibria/geometry.hpp"
#include "equilibria/linalg.hpp"
#include "equilibria/lp.hpp"
#include "equilibria/rational.hpp"

namespace equilibria {

inline constexpr std::size_t voronoi_max_dimension = 4;
inline constexpr std::size_t voronoi_max_sites = 12;

/// coeffs . x < rhs (strict inside the cell).
template <class Scalar>
struct LinearInequality {
    DenseVector<Scalar> coeffs;
    Scalar rhs;
};

enum class CellClass { effective, ineffective, boundary };

inline const char* to_string(CellClass c)
{
    switch (c) {
    case CellClass::effective: return "effective";
    case CellClass::ineffective: return "ineffective";
    case CellClass::boundary: return "boundary";
    }
    return "?";
}

template <class Scalar>
struct VoronoiCellT {
    std::vector<std::size_t> nearest;
    std::size_t codim = 0; ///< |nearest| - 1
    std::size_t dim = 0;   ///< n - rank of the equidistance system
    std::size_t rank = 0;
    AffineSubspace span;
    std::vector<LinearInequality<Scalar>> equalities; ///< coeffs . x = rhs
    std::vector<LinearInequality<Scalar>> constraints;
    std::optional<DenseVector<Scalar>> witness; ///< circumcenter of the nearest sites
    DenseVector<Scalar> sample;                 ///< a point of the cell
    bool witness_in_cell = false;
    HullStatus witness_hull = HullStatus::outside;
    CellClass classification = CellClass::ineffective;
    bool effective = false;
    bool generic = true;
};

template <class Scalar>
struct VoronoiDiagramT {
    std::vector<VoronoiCellT<Scalar>> cells;
    std::uint64_t config_hash = 0;
    std::size_t ambient = 0;
    std::vector<DenseVector<Scalar>> sites;
    std::vector<Scalar> weights; ///< power shifts, all zero for plain diagrams

    const VoronoiCellT<Scalar>* find(const std::vector<std::size_t>& nearest) const
    {
        for (const auto& c : cells)
            if (c.nearest == nearest)
                return &c;
        return nullptr;
    }
};

using VoronoiCell = VoronoiCellT<Rational>;
using VoronoiDiagram = VoronoiDiagramT<Rational>;

namespace detail {

inline void fnv1a(std::uint64_t& h, const std::string& s)
{
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
}

template <class Scalar>
std::string scalar_repr(const Scalar& v)
{
    if constexpr (ScalarTraits<Scalar>::exact)
        return v.str();
    else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
        return buf;
    }
}

template <class Scalar>
Scalar power(const DenseVector<Scalar>& x, const DenseVector<Scalar>& c, const Scalar& w)
{
    Scalar s = w;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Scalar d = x[i] - c[i];
        s += d * d;
    }
    return s;
}

// Row of power(x, c_i) - power(x, c_j) = -2 (c_i - c_j).x + |c_i|^2 - |c_j|^2 + w_i - w_j,
// written as 2 (c_i - c_j).x  vs  |c_i|^2 - |c_j|^2 + w_i - w_j.
template <class Scalar>
LinearInequality<Scalar> bisector(const VoronoiDiagramT<Scalar>& d, std::size_t i, std::size_t j)
{
    LinearInequality<Scalar> r;
    const auto& ci = d.sites[i];
    const auto& cj = d.sites[j];
    r.coeffs.resize(ci.size());
    for (std::size_t k = 0; k < ci.size(); ++k)
        r.coeffs[k] = Scalar(2) * (ci[k] - cj[k]);
    r.rhs = dot(ci, ci) - dot(cj, cj) + d.weights[i] - d.weights[j];
    return r;
}

template <class Scalar>
struct CellLp {
    lp::Status status;
    Scalar slack{0};
    DenseVector<Scalar> point;
};

// Max s subject to the equalities, inequality + s <= rhs, s <= 1.  With
// `hull` the point is constrained to conv of the nearest sites.
template <class Scalar>
CellLp<Scalar> solve_cell_lp(const VoronoiDiagramT<Scalar>& d, const std::vector<std::size_t>& T, bool hull)
{
    const std::size_t n = d.ambient;
    const std::size_t l = d.sites.size();
    const std::size_t nx = hull ? T.size() : n;
    const std::size_t vars = nx + 1;
    lp::Problem<Scalar> prob(vars);
    if (!hull)
        for (std::size_t k = 0; k < n; ++k)
            prob.set_free(k);
    prob.set_free(nx);
    prob.objective[nx] = Scalar(1);

    // Maps a row over x to a row over the LP variables.
    auto lift = [&](const DenseVector<Scalar>& coeffs) {
        std::vector<Scalar> row(vars, Scalar(0));
        if (!hull) {
            for (std::size_t k = 0; k < n; ++k)
                row[k] = coeffs[k];
        } else {
            for (std::size_t t = 0; t < T.size(); ++t)
                row[t] = dot(coeffs, d.sites[T[t]]);
        }
        return row;
    };
    if (hull)
        prob.add([&] {
            std::vector<Scalar> row(vars, Scalar(0));
            for (std::size_t t = 0; t < T.size(); ++t)
                row[t] = Scalar(1);
            return row;
        }(), lp::Relation::equal, Scalar(1));

    const std::size_t t0 = T.front();
    for (std::size_t t = 1; t < T.size(); ++t) {
        auto b = bisector(d, T[t], t0);
        prob.add(lift(b.coeffs), lp::Relation::equal, b.rhs);
    }
    std::vector<bool> in_t(l, false);
    for (auto t : T)
        in_t[t] = true;
    for (std::size_t o = 0; o < l; ++o) {
        if (in_t[o])
            continue;
        auto b = bisector(d, o, t0);
        auto row = lift(b.coeffs);
        row[nx] = Scalar(1);
        prob.add(row, lp::Relation::less_equal, b.rhs);
    }
    std::vector<Scalar> cap(vars, Scalar(0));
    cap[nx] = Scalar(1);
    prob.add(cap, lp::Relation::less_equal, Scalar(1));

    auto sol = lp::solve(prob);
    CellLp<Scalar> out{sol.status, Scalar(0), {}};
    if (sol.status != lp::Status::optimal)
        return out;
    out.slack = sol.value;
    if (!hull) {
        out.point.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
        out.point.assign(n, Scalar(0));
        for (std::size_t t = 0; t < T.size(); ++t)
            for (std::size_t k = 0; k < n; ++k)
                out.point[k] += sol.x[t] * d.sites[T[t]][k];
    }
    return out;
}

template <class Scalar>
Eigen::MatrixXd to_eigen_rows(const std::vector<LinearInequality<Scalar>>& rows, std::size_t n)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t k = 0; k < n; ++k)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = static_cast<double>(rows[r].coeffs[k]);
    return m;
}

template <class Scalar>
double as_double(const Scalar& v)
{
    if constexpr (ScalarTraits<Scalar>::exact)
        return to_double(v);
    else
        return static_cast<double>(v);
}

template <class Scalar>
void classify_cell(const VoronoiDiagramT<Scalar>& d, VoronoiCellT<Scalar>& cell)
{
    using T = ScalarTraits<Scalar>;
    const auto& NS = cell.nearest;
    cell.codim = NS.size() - 1;
    cell.rank = 0;
    if (!cell.equalities.empty()) {
        DenseMatrix<Scalar> a;
        for (const auto& e : cell.equalities)
            a.push_back(e.coeffs);
        cell.rank = matrix_rank(a);
    }
    cell.dim = d.ambient - cell.rank;

    // Float span of the equidistant locus.
    Point base(static_cast<Eigen::Index>(d.ambient));
    for (std::size_t k = 0; k < d.ambient; ++k)
        base[static_cast<Eigen::Index>(k)] = as_double(cell.sample[k]);
    if (cell.equalities.empty()) {
        cell.span = AffineSubspace::whole(static_cast<Eigen::Index>(d.ambient));
        cell.span.base = base;
    } else {
        Eigen::MatrixXd a = to_eigen_rows(cell.equalities, d.ambient);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
        auto r = static_cast<Eigen::Index>(cell.rank);
        cell.span = {base, svd.matrixV().rightCols(static_cast<Eigen::Index>(d.ambient) - r)};
    }

    const bool independent = cell.rank == cell.codim;
    cell.generic = independent;
    cell.witness.reset();
    if (independent) {
        std::vector<DenseVector<Scalar>> pts;
        std::vector<Scalar> w;
        for (auto i : NS) {
            pts.push_back(d.sites[i]);
            w.push_back(d.weights[i]);
        }
        cell.witness = circumcenter(pts, w);
        const auto& p = *cell.witness;
        Scalar p0 = power(p, d.sites[NS.front()], d.weights[NS.front()]);
        cell.witness_in_cell = true;
        std::vector<bool> in_t(d.sites.size(), false);
        for (auto i : NS)
            in_t[i] = true;
        for (std::size_t o = 0; o < d.sites.size(); ++o)
            if (!in_t[o] && !T::is_positive(power(p, d.sites[o], d.weights[o]) - p0)) {
                cell.witness_in_cell = false;
                break;
            }
        cell.witness_hull = hull_membership<Scalar>(p, pts).status;
        if (!cell.witness_in_cell || cell.witness_hull == HullStatus::outside)
            cell.classification = CellClass::ineffective;
        else if (cell.witness_hull == HullStatus::interior)
            cell.classification = CellClass::effective;
        else {
            cell.classification = CellClass::boundary;
            cell.generic = false;
        }
    } else {
        // Degenerate nearest set: no unique witness, decide by LP.
        auto r = solve_cell_lp(d, NS, true);
        cell.classification = CellClass::boundary;
        if (r.status != lp::Status::optimal || !T::is_positive(r.slack))
            cell.classification = CellClass::ineffective;
    }
    cell.effective = cell.classification == CellClass::effective;
}

template <class Scalar>
void enumerate_cells(VoronoiDiagramT<Scalar>& d, std::vector<std::size_t>& T)
{
    using Tr = ScalarTraits<Scalar>;
    const std::size_t l = d.sites.size();
    const std::size_t start = T.empty() ? 0 : T.back() + 1;
    for (std::size_t i = start; i < l; ++i) {
        T.push_back(i);
        auto r = solve_cell_lp(d, T, false);
        if (r.status == lp::Status::optimal && !Tr::is_negative(r.slack)) {
            if (Tr::is_positive(r.slack)) {
                VoronoiCellT<Scalar> cell;
                cell.nearest = T;
                for (std::size_t t = 1; t < T.size(); ++t)
                    cell.equalities.push_back(bisector(d, T[t], T.front()));
                std::vector<bool> in_t(l, false);
                for (auto t : T)
                    in_t[t] = true;
                for (std::size_t o = 0; o < l; ++o)
                    if (!in_t[o])
                        cell.constraints.push_back(bisector(d, o, T.front()));
                cell.sample = r.point;
                classify_cell(d, cell);
                d.cells.push_back(std::move(cell));
            }
            enumerate_cells(d, T);
        }
        T.pop_back();
    }
}

} // namespace detail

/// Builds the diagram of `sites` (power diagram when `weights` is given).
/// Cells are listed by nearest-site set in lexicographic order.
template <class Scalar>
VoronoiDiagramT<Scalar> build_diagram(const std::vector<DenseVector<Scalar>>& sites,
                                      const std::vector<Scalar>& weights = {})
{
    if (sites.empty())
        throw Error(Errc::invalid_argument, "diagram of an empty site list");
    const std::size_t n = sites.front().size();
    if (n > voronoi_max_dimension || sites.size() > voronoi_max_sites)
        throw Error(Errc::limits_exceeded, "diagram limited to n <= 4 and l <= 12");
    if (!weights.empty() && weights.size() != sites.size())
        throw Error(Errc::dimension_mismatch, "one weight per site expected");
    VoronoiDiagramT<Scalar> d;
    d.ambient = n;
    d.sites = sites;
    d.weights = weights.empty() ? std::vector<Scalar>(sites.size(), Scalar(0)) : weights;
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (sites[i].size() != n)
            throw Error(Errc::dimension_mismatch, "sites differ in dimension");
        for (std::size_t j = 0; j < i; ++j)
            if (sites[i] == sites[j] && d.weights[i] == d.weights[j])
                throw Error(Errc::duplicate_sites,
                            "sites " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
        for (const auto& c : sites[i])
            detail::fnv1a(h, detail::scalar_repr(c));
        detail::fnv1a(h, detail::scalar_repr(d.weights[i]));
    }
    d.config_hash = h;
    std::vector<std::size_t> T;
    detail::enumerate_cells(d, T);
    return d;
}

/// Exact diagram of binary64 sites (snapped to rationals).
inline VoronoiDiagram build_diagram(const std::vector<Point>& sites)
{
    std::vector<RationalPoint> r;
    for (const auto& s : sites)
        r.push_back(to_rational(s));
    return build_diagram<Rational>(r);
}

struct GenericityReport {
    bool generic = true;
    std::vector<std::string> violations;
};

inline std::string describe_nearest(const std::vector<std::size_t>& ns)
{
    std::string s = "{";
    for (std::size_t i = 0; i < ns.size(); ++i)
        s += (i ? "," : "") + std::to_string(ns[i]);
    return s + "}";
}

template <class Scalar>
GenericityReport is_generic(const VoronoiDiagramT<Scalar>& d)
{
    GenericityReport r;
    for (const auto& c : d.cells) {
        if (c.rank != c.codim) {
            r.violations.push_back("cell " + describe_nearest(c.nearest) + " has " +
                                   std::to_string(c.nearest.size()) + " nearest sites in codimension " +
                                   std::to_string(c.rank));
        } else if (c.classification == CellClass::boundary) {
            r.violations.push_back("cell " + describe_nearest(c.nearest) +
                                   " meets the boundary of the hull of its nearest sites");
        }
    }
    r.generic = r.violations.empty();
    return r;
}

template <class Scalar>
bool is_effective(const VoronoiCellT<Scalar>& cell)
{
    if (cell.nearest.size() < 2)
        throw Error(Errc::not_positive_codim, "effectiveness is defined for positive codimension");
    return cell.effective;
}

/// LP route: does the cell meet conv(NS)?  Boundary contacts count as true.
template <class Scalar>
bool is_effective_lp(const VoronoiDiagramT<Scalar>& d, const VoronoiCellT<Scalar>& cell)
{
    if (cell.nearest.size() < 2)
        throw Error(Errc::not_positive_codim, "effectiveness is defined for positive codimension");
    auto r = detail::solve_cell_lp(d, cell.nearest, true);
    return r.status == lp::Status::optimal && ScalarTraits<Scalar>::is_positive(r.slack);
}

/// Sites in intrinsic coordinates of L, as a power diagram input.
struct SliceSites {
    std::vector<RationalPoint> sites;
    std::vector<Rational> weights;
};

inline SliceSites slice_sites(const std::vector<Point>& sites, const AffineSubspace& L)
{
    SliceSites s;
    for (const auto& c : sites) {
        check_dims(c, L.base);
        Point t = L.coordinates(c);
        s.sites.push_back(to_rational(t));
        double off = (c - L.from_coordinates(t)).squaredNorm();
        if (off < 1e-24 * std::max(1.0, c.squaredNorm()))
            off = 0.0;
        s.weights.push_back(snap_to_rational(off));
    }
    return s;
}

namespace detail {

inline std::size_t ambient_rank(const std::vector<Point>& sites, const std::vector<std::size_t>& T)
{
    if (T.size() < 2)
        return 0;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(T.size() - 1), sites.front().size());
    for (std::size_t t = 1; t < T.size(); ++t)
        a.row(static_cast<Eigen::Index>(t - 1)) = (sites[T[t]] - sites[T[0]]).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > 1e-10 * std::max(1e-300, s[0]))
            ++r;
    return r;
}

} // namespace detail

/// Does the cell with nearest set NS meet L inside conv(projections of NS)?
/// The cell must cross L transversally when it meets it.
inline bool is_effective_wrt(const std::vector<std::size_t>& nearest, const std::vector<Point>& sites,
                             const AffineSubspace& L)
{
    auto ss = slice_sites(sites, L);
    VoronoiDiagram d;
    d.ambient = static_cast<std::size_t>(L.dim());
    d.sites = ss.sites;
    d.weights = ss.weights;
    auto meet = detail::solve_cell_lp(d, nearest, false);
    if (meet.status != lp::Status::optimal || meet.slack <= 0)
        return false;
    DenseMatrix<Rational> a;
    for (std::size_t t = 1; t < nearest.size(); ++t)
        a.push_back(detail::bisector(d, nearest[t], nearest[0]).coeffs);
    if (matrix_rank(a) != detail::ambient_rank(sites, nearest))
        throw Error(Errc::non_generic_slice, "cell " + describe_nearest(nearest) + " is not transversal to L");
    auto r = detail::solve_cell_lp(d, nearest, true);
    return r.status == lp::Status::optimal && r.slack > 0;
}

template <class Scalar>
bool is_effective_wrt(const VoronoiCellT<Scalar>& cell, const std::vector<Point>& sites, const AffineSubspace& L)
{
    return is_effective_wrt(cell.nearest, sites, L);
}

struct EffectiveCensus {
    std::map<std::size_t, std::size_t> counts_by_dim;
    std::size_t total = 0;
    std::size_t unclassified = 0; ///< boundary or degenerate cells left out of the counts

    std::size_t at(std::size_t dim) const
    {
        auto it = counts_by_dim.find(dim);
        return it == counts_by_dim.end() ? 0 : it->second;
    }
};

/// Effective cells of positive codimension, keyed by cell dimension.
template <class Scalar>
EffectiveCensus effective_census(const VoronoiDiagramT<Scalar>& d)
{
    EffectiveCensus c;
    for (const auto& cell : d.cells) {
        if (cell.nearest.size() < 2)
            continue;
        if (cell.classification == CellClass::boundary)
            ++c.unclassified;
        else if (cell.effective) {
            ++c.counts_by_dim[cell.dim];
            ++c.total;
        }
    }
    return c;
}

/// Cells effective with respect to L, keyed by dim(S ∩ L).  Full-dimensional
/// slice cells count when their site sits off L (a site on L is a pole).
inline EffectiveCensus effective_census(const std::vector<Point>& sites, const AffineSubspace& L)
{
    auto ss = slice_sites(sites, L);
    auto d = build_diagram<Rational>(ss.sites, ss.weights);
    EffectiveCensus c;
    for (const auto& cell : d.cells) {
        if (cell.rank != detail::ambient_rank(sites, cell.nearest))
            throw Error(Errc::non_generic_slice,
                        "cell " + describe_nearest(cell.nearest) + " is not transversal to L");
        if (cell.nearest.size() == 1 && ss.weights[cell.nearest[0]] == 0)
            continue;
        if (cell.classification == CellClass::boundary)
            ++c.unclassified;
        else if (cell.effective) {
            ++c.counts_by_dim[cell.dim];
            ++c.total;
        }
    }
    return c;
}

struct VInfinityCritical {
    Point location;
    std::size_t index;
    std::vector<std::size_t> nearest;
};

template <class Scalar>
std::vector<VInfinityCritical> v_infty_critical_points(const VoronoiDiagramT<Scalar>& d)
{
    auto g = is_generic(d);
    if (!g.generic)
        throw Error(Errc::non_generic_diagram, g.violations.front());
    std::vector<VInfinityCritical> out;
    for (const auto& cell : d.cells) {
        if (cell.nearest.size() < 2 || !cell.effective)
            continue;
        Point p(static_cast<Eigen::Index>(d.ambient));
        for (std::size_t k = 0; k < d.ambient; ++k)
            p[static_cast<Eigen::Index>(k)] = detail::as_double((*cell.witness)[k]);
        out.push_back({p, cell.dim, cell.nearest});
    }
    return out;
}

/// Index of the cell whose nearest set matches x's, by direct distance sorting.
template <class Scalar>
std::optional<std::size_t> locate(const VoronoiDiagramT<Scalar>& d, const DenseVector<Scalar>& x)
{
    using T = ScalarTraits<Scalar>;
    std::vector<Scalar> pw;
    for (std::size_t i = 0; i < d.sites.size(); ++i)
        pw.push_back(detail::power(x, d.sites[i], d.weights[i]));
    Scalar best = *std::min_element(pw.begin(), pw.end());
    std::vector<std::size_t> ns;
    for (std::size_t i = 0; i < pw.size(); ++i)
        if (T::is_zero(pw[i] - best))
            ns.push_back(i);
    for (std::size_t c = 0; c < d.cells.size(); ++c)
        if (d.cells[c].nearest == ns)
            return c;
    return std::nullopt;
}

struct ComplexityBounds {
    std::optional<long long> vertices, edges, faces; ///< three-space counts
    std::optional<long long> positive_codim_cells;   ///< planar total
    long long maxwell = 0;                           ///< (l-1)^2
};

inline ComplexityBounds complexity_bounds(long long l, long long n)
{
    ComplexityBounds b;
    b.maxwell = (l - 1) * (l - 1);
    if (n == 2) {
        if (l < 3)
            throw Error(Errc::invalid_argument, "planar bound needs l >= 3");
        b.positive_codim_cells = 5 * l - 11;
    } else if (n == 3) {
        b.vertices = l * (l - 3) / 2;
        b.edges = l * (l - 3);
        b.faces = l * (l - 1) / 2;
    } else {
        throw Error(Errc::unsupported_dimension, "combinatorial bounds exist for n = 2 and n = 3");
    }
    return b;
}

} // namespace equilibria
