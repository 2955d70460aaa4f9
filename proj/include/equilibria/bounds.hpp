#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "equilibria/error.hpp"
#include "equilibria/rational.hpp"

namespace equilibria {

struct DegreeData {
    std::vector<long> degrees; ///< d_1..d_m
    long k = 0;                ///< number of exponential variables

    void validate() const
    {
        if (degrees.empty() || k < 0)
            throw Error(Errc::invalid_argument, "degree data needs m >= 1 and k >= 0");
        for (long d : degrees)
            if (d < 1)
                throw Error(Errc::invalid_argument, "degrees must be >= 1");
    }
};

inline BigInt big_pow(BigInt base, unsigned long e)
{
    BigInt r = 1;
    while (e) {
        if (e & 1ul)
            r *= base;
        base *= base;
        e >>= 1ul;
    }
    return r;
}

/// d_1...d_m (d_1+...+d_m+1)^k 2^{k(k-1)/2}
inline BigInt khovanskii_bound(const DegreeData& d)
{
    d.validate();
    BigInt prod = 1, sum = 1;
    for (long v : d.degrees) {
        prod *= v;
        sum += v;
    }
    const auto k = static_cast<unsigned long>(d.k);
    return prod * big_pow(sum, k) * big_pow(2, k * (k - (k ? 1 : 0)) / 2);
}

/// l quadrics, l-1 linear equations, 2l exponentials.
inline DegreeData charge_degree_data(long l)
{
    if (l < 2)
        throw Error(Errc::invalid_argument, "charge bound needs l >= 2");
    DegreeData d;
    d.degrees.assign(static_cast<std::size_t>(l), 2);
    d.degrees.insert(d.degrees.end(), static_cast<std::size_t>(l - 1), 1);
    d.k = 2 * l;
    return d;
}

/// 4^{l^2} (3l)^{2l}, cross-checked against the assembled Khovanskii bound.
inline BigInt charge_bound(long l)
{
    if (l < 2)
        throw Error(Errc::invalid_argument, "charge bound needs l >= 2");
    const auto ul = static_cast<unsigned long>(l);
    BigInt closed = big_pow(4, ul * ul) * big_pow(3 * ul, 2 * ul);
    if (closed != khovanskii_bound(charge_degree_data(l)))
        throw Error(Errc::identity_violation, "closed form and assembled bound disagree");
    return closed;
}

/// 2 * 4^{l^2} (2l+3)^{2l}
inline BigInt charge_bound_alt(long l)
{
    if (l < 2)
        throw Error(Errc::invalid_argument, "charge bound needs l >= 2");
    const auto ul = static_cast<unsigned long>(l);
    return 2 * big_pow(4, ul * ul) * big_pow(2 * ul + 3, 2 * ul);
}

struct LatticePoint {
    long long p = 0, q = 0;
    friend bool operator==(const LatticePoint& a, const LatticePoint& b) { return a.p == b.p && a.q == b.q; }
    friend bool operator<(const LatticePoint& a, const LatticePoint& b)
    {
        return a.p != b.p ? a.p < b.p : a.q < b.q;
    }
    friend LatticePoint operator+(const LatticePoint& a, const LatticePoint& b) { return {a.p + b.p, a.q + b.q}; }
    friend LatticePoint operator-(const LatticePoint& a, const LatticePoint& b) { return {a.p - b.p, a.q - b.q}; }
};

inline BigInt cross(const LatticePoint& o, const LatticePoint& a, const LatticePoint& b)
{
    return BigInt(a.p - o.p) * BigInt(b.q - o.q) - BigInt(a.q - o.q) * BigInt(b.p - o.p);
}

/// Convex lattice polygon (possibly a segment or point), vertices counterclockwise
/// starting from the lexicographically smallest.
class LatticePolygon {
public:
    LatticePolygon() = default;

    /// Convex hull (monotone chain); collinear boundary points are dropped.
    static LatticePolygon hull(std::vector<LatticePoint> pts)
    {
        if (pts.empty())
            throw Error(Errc::invalid_argument, "hull of no points");
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        LatticePolygon poly;
        if (pts.size() <= 2) {
            poly.v_ = pts;
            return poly;
        }
        std::vector<LatticePoint> h(2 * pts.size());
        std::size_t k = 0;
        for (const auto& p : pts) {
            while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0)
                --k;
            h[k++] = p;
        }
        for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
            while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0)
                --k;
            h[k++] = pts[i];
        }
        h.resize(k - 1);
        poly.v_ = h;
        return poly;
    }

    const std::vector<LatticePoint>& vertices() const { return v_; }
    std::size_t size() const { return v_.size(); }

    /// Twice the area (shoelace).
    BigInt doubled_area() const
    {
        BigInt s = 0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const auto& a = v_[i];
            const auto& b = v_[(i + 1) % v_.size()];
            s += BigInt(a.p) * BigInt(b.q) - BigInt(b.p) * BigInt(a.q);
        }
        return s < 0 ? BigInt(-s) : s;
    }

    /// Closed containment.
    bool contains(const LatticePoint& x) const
    {
        if (v_.size() == 1)
            return x == v_[0];
        if (v_.size() == 2)
            return cross(v_[0], v_[1], x) == 0 && std::min(v_[0].p, v_[1].p) <= x.p &&
                   x.p <= std::max(v_[0].p, v_[1].p) && std::min(v_[0].q, v_[1].q) <= x.q &&
                   x.q <= std::max(v_[0].q, v_[1].q);
        for (std::size_t i = 0; i < v_.size(); ++i)
            if (cross(v_[i], v_[(i + 1) % v_.size()], x) < 0)
                return false;
        return true;
    }
    /// Interior containment (for a full polygon).
    bool strictly_contains(const LatticePoint& x) const
    {
        if (v_.size() < 3)
            return false;
        for (std::size_t i = 0; i < v_.size(); ++i)
            if (cross(v_[i], v_[(i + 1) % v_.size()], x) <= 0)
                return false;
        return true;
    }
    bool contains(const LatticePolygon& other) const
    {
        return std::all_of(other.v_.begin(), other.v_.end(), [&](const LatticePoint& x) { return contains(x); });
    }

    friend bool operator==(const LatticePolygon& a, const LatticePolygon& b) { return a.v_ == b.v_; }

private:
    std::vector<LatticePoint> v_;
};

namespace detail {

// Edge vectors of a counterclockwise polygon (a segment contributes both directions).
inline std::vector<LatticePoint> edges(const LatticePolygon& a)
{
    std::vector<LatticePoint> e;
    const auto& v = a.vertices();
    if (v.size() < 2)
        return e;
    for (std::size_t i = 0; i < v.size(); ++i)
        e.push_back(v[(i + 1) % v.size()] - v[i]);
    return e;
}

// Angle in [0, 2pi): upper half-plane class first, then by cross product.
inline bool angle_less(const LatticePoint& a, const LatticePoint& b)
{
    auto half = [](const LatticePoint& v) { return (v.q > 0 || (v.q == 0 && v.p > 0)) ? 0 : 1; };
    int ha = half(a), hb = half(b);
    if (ha != hb)
        return ha < hb;
    return BigInt(a.p) * BigInt(b.q) - BigInt(a.q) * BigInt(b.p) > 0;
}

inline LatticePoint bottom_left(const LatticePolygon& a)
{
    const auto& v = a.vertices();
    return *std::min_element(v.begin(), v.end(), [](const LatticePoint& x, const LatticePoint& y) {
        return x.q != y.q ? x.q < y.q : x.p < y.p;
    });
}

} // namespace detail

/// Minkowski sum by merging edge sequences sorted by angle.
inline LatticePolygon minkowski_sum(const LatticePolygon& a, const LatticePolygon& b)
{
    if (a.size() == 0 || b.size() == 0)
        throw Error(Errc::invalid_argument, "empty polygon");
    auto ea = detail::edges(a), eb = detail::edges(b);
    std::vector<LatticePoint> all = ea;
    all.insert(all.end(), eb.begin(), eb.end());
    std::stable_sort(all.begin(), all.end(), detail::angle_less);
    LatticePoint cur = detail::bottom_left(a) + detail::bottom_left(b);
    std::vector<LatticePoint> pts{cur};
    for (const auto& e : all) {
        cur = cur + e;
        pts.push_back(cur);
    }
    return LatticePolygon::hull(pts);
}

/// Reference construction: hull of all pairwise vertex sums.
inline LatticePolygon minkowski_sum_naive(const LatticePolygon& a, const LatticePolygon& b)
{
    std::vector<LatticePoint> pts;
    for (const auto& x : a.vertices())
        for (const auto& y : b.vertices())
            pts.push_back(x + y);
    return LatticePolygon::hull(pts);
}

/// 2 Vol(A, B) = Vol(A+B) - Vol(A) - Vol(B), returned as an exact integer.
/// The doubled areas D satisfy D(A+B) - D(A) - D(B) = 2 * (2 Vol(A,B)).
inline BigInt mixed_volume_2x(const LatticePolygon& a, const LatticePolygon& b)
{
    BigInt twice = minkowski_sum(a, b).doubled_area() - a.doubled_area() - b.doubled_area();
    if (twice % 2 != 0)
        throw Error(Errc::identity_violation, "mixed area of lattice polygons must be a half-integer multiple");
    return twice / 2;
}

} // namespace equilibria
