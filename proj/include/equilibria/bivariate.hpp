#pragma once

// Sparse polynomials in (f, g) over an exact field.

#include <algorithm>
#include <cstddef>
#include <map>
#include <ostream>
#include <type_traits>
#include <utility>
#include <vector>

#include "equilibria/bounds.hpp"
#include "equilibria/error.hpp"
#include "equilibria/polynomial.hpp"
#include "equilibria/rational.hpp"

namespace equilibria {

template <class Coeff>
class BivariatePoly {
public:
    using Exponents = std::pair<int, int>;
    using Terms = std::map<Exponents, Coeff>;

    BivariatePoly() = default;
    BivariatePoly(Coeff c) { add_term(0, 0, std::move(c)); } // NOLINT

    static BivariatePoly monomial(int i, int j, Coeff c = Coeff(1))
    {
        BivariatePoly p;
        p.add_term(i, j, std::move(c));
        return p;
    }
    static BivariatePoly f() { return monomial(1, 0); }
    static BivariatePoly g() { return monomial(0, 1); }

    void add_term(int i, int j, const Coeff& c)
    {
        if (i < 0 || j < 0)
            throw Error(Errc::invalid_argument, "negative exponent");
        if (c == Coeff(0))
            return;
        auto [it, fresh] = t_.try_emplace({i, j}, c);
        if (!fresh) {
            it->second += c;
            if (it->second == Coeff(0))
                t_.erase(it);
        }
    }

    const Terms& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    Coeff coeff(int i, int j) const
    {
        auto it = t_.find({i, j});
        return it == t_.end() ? Coeff(0) : it->second;
    }
    int total_degree() const
    {
        int d = -1;
        for (const auto& [e, c] : t_)
            d = std::max(d, e.first + e.second);
        return d;
    }
    int degree_f() const
    {
        int d = -1;
        for (const auto& [e, c] : t_)
            d = std::max(d, e.first);
        return d;
    }
    int degree_g() const
    {
        int d = -1;
        for (const auto& [e, c] : t_)
            d = std::max(d, e.second);
        return d;
    }

    friend BivariatePoly operator+(BivariatePoly a, const BivariatePoly& b)
    {
        for (const auto& [e, c] : b.t_)
            a.add_term(e.first, e.second, c);
        return a;
    }
    friend BivariatePoly operator-(const BivariatePoly& a)
    {
        BivariatePoly r;
        for (const auto& [e, c] : a.t_)
            r.t_.emplace(e, -c);
        return r;
    }
    friend BivariatePoly operator-(const BivariatePoly& a, const BivariatePoly& b) { return a + (-b); }
    friend BivariatePoly operator*(const BivariatePoly& a, const BivariatePoly& b)
    {
        BivariatePoly r;
        for (const auto& [ea, ca] : a.t_)
            for (const auto& [eb, cb] : b.t_)
                r.add_term(ea.first + eb.first, ea.second + eb.second, ca * cb);
        return r;
    }
    BivariatePoly& operator+=(const BivariatePoly& o) { return *this = *this + o; }
    BivariatePoly& operator-=(const BivariatePoly& o) { return *this = *this - o; }
    BivariatePoly& operator*=(const BivariatePoly& o) { return *this = *this * o; }
    friend bool operator==(const BivariatePoly& a, const BivariatePoly& b) { return a.t_ == b.t_; }
    friend bool operator!=(const BivariatePoly& a, const BivariatePoly& b) { return !(a == b); }

    BivariatePoly derivative_f(int times = 1) const { return derive(times, 0); }
    BivariatePoly derivative_g(int times = 1) const { return derive(0, times); }

    template <class T>
    T operator()(const T& fv, const T& gv) const
    {
        T acc(0);
        std::vector<T> fpow{T(1)}, gpow{T(1)};
        auto power = [](std::vector<T>& cache, const T& base, int e) -> const T& {
            while (static_cast<int>(cache.size()) <= e)
                cache.push_back(cache.back() * base);
            return cache[static_cast<std::size_t>(e)];
        };
        for (const auto& [e, c] : t_)
            acc = acc + convert<T>(c) * power(fpow, fv, e.first) * power(gpow, gv, e.second);
        return acc;
    }

    /// Exact division; throws unless b divides *this.
    BivariatePoly divide_exact(const BivariatePoly& b) const
    {
        if (b.is_zero())
            throw Error(Errc::zero_polynomial, "division by the zero polynomial");
        // Lexicographic leading terms (by g then f) give an exact long division.
        auto lead = [](const BivariatePoly& p) {
            auto best = p.t_.begin();
            for (auto it = p.t_.begin(); it != p.t_.end(); ++it)
                if (std::make_pair(it->first.second, it->first.first) >
                    std::make_pair(best->first.second, best->first.first))
                    best = it;
            return best;
        };
        BivariatePoly rem = *this, quo;
        const auto lb = lead(b);
        while (!rem.is_zero()) {
            auto lr = lead(rem);
            int di = lr->first.first - lb->first.first, dj = lr->first.second - lb->first.second;
            if (di < 0 || dj < 0)
                throw Error(Errc::identity_violation, "polynomial division is not exact");
            auto m = monomial(di, dj, lr->second / lb->second);
            quo += m;
            rem -= m * b;
        }
        return quo;
    }

    /// Substitutes f -> f + df0, g -> g + dg0.
    BivariatePoly translate(const Coeff& f0, const Coeff& g0) const
    {
        BivariatePoly r;
        const BivariatePoly fs = f() + BivariatePoly(f0), gs = g() + BivariatePoly(g0);
        std::vector<BivariatePoly> fp{BivariatePoly(Coeff(1))}, gp{BivariatePoly(Coeff(1))};
        for (const auto& [e, c] : t_) {
            while (static_cast<int>(fp.size()) <= e.first)
                fp.push_back(fp.back() * fs);
            while (static_cast<int>(gp.size()) <= e.second)
                gp.push_back(gp.back() * gs);
            r += BivariatePoly(c) * fp[static_cast<std::size_t>(e.first)] * gp[static_cast<std::size_t>(e.second)];
        }
        return r;
    }

    friend std::ostream& operator<<(std::ostream& os, const BivariatePoly& p)
    {
        if (p.is_zero())
            return os << "0";
        bool first = true;
        for (const auto& [e, c] : p.t_) {
            os << (first ? "" : " + ") << "(" << c << ")";
            if (e.first)
                os << "*f^" << e.first;
            if (e.second)
                os << "*g^" << e.second;
            first = false;
        }
        return os;
    }

private:
    template <class T>
    static T convert(const Coeff& c)
    {
        if constexpr (std::is_same_v<T, double> && std::is_same_v<Coeff, Rational>)
            return to_double(c);
        else
            return T(c);
    }

    BivariatePoly derive(int nf, int ng) const
    {
        BivariatePoly r;
        for (const auto& [e, c] : t_) {
            if (e.first < nf || e.second < ng)
                continue;
            Coeff k = c;
            for (int s = 0; s < nf; ++s)
                k *= Coeff(e.first - s);
            for (int s = 0; s < ng; ++s)
                k *= Coeff(e.second - s);
            r.add_term(e.first - nf, e.second - ng, k);
        }
        return r;
    }

    Terms t_;
};

using RationalBivariate = BivariatePoly<Rational>;
using GaussianBivariate = BivariatePoly<GaussianRational>;

inline GaussianBivariate to_gaussian(const RationalBivariate& p)
{
    GaussianBivariate r;
    for (const auto& [e, c] : p.terms())
        r.add_term(e.first, e.second, GaussianRational(c));
    return r;
}

template <class Coeff>
LatticePolygon newton_polygon(const BivariatePoly<Coeff>& p)
{
    if (p.is_zero())
        throw Error(Errc::zero_polynomial, "Newton polygon of the zero polynomial");
    std::vector<LatticePoint> pts;
    for (const auto& [e, c] : p.terms())
        pts.push_back({e.first, e.second});
    return LatticePolygon::hull(pts);
}

/// Lattice polygon {lo <= p+q <= hi, pmin <= p, q <= pmax}.
inline LatticePolygon diagonal_hexagon(long long lo, long long hi, long long pmin, long long pmax)
{
    std::vector<LatticePoint> pts;
    for (long long p = pmin; p <= pmax; ++p)
        for (long long q = pmin; q <= pmax; ++q)
            if (p + q >= lo && p + q <= hi)
                pts.push_back({p, q});
    return LatticePolygon::hull(pts);
}

/// Remainder of p modulo monic-izable univariate pf(f) and pg(g).
template <class Coeff>
BivariatePoly<Coeff> reduce_modulo(const BivariatePoly<Coeff>& p, const Polynomial<Coeff>& pf,
                                   const Polynomial<Coeff>& pg)
{
    if (pf.degree() < 1 || pg.degree() < 1)
        throw Error(Errc::invalid_argument, "reduction needs nonconstant moduli");
    // Replace f^k (k >= deg pf) using pf, then the same for g.
    auto reduce_var = [](const BivariatePoly<Coeff>& in, const Polynomial<Coeff>& m, bool in_f) {
        const int d = m.degree();
        BivariatePoly<Coeff> cur = in;
        for (;;) {
            BivariatePoly<Coeff> next;
            bool changed = false;
            for (const auto& [e, c] : cur.terms()) {
                int k = in_f ? e.first : e.second;
                if (k < d) {
                    next.add_term(e.first, e.second, c);
                    continue;
                }
                changed = true;
                // x^k = x^{k-d} * x^d and x^d = -(m_0 + ... + m_{d-1} x^{d-1}) / m_d
                for (int s = 0; s < d; ++s) {
                    Coeff k2 = -c * m[static_cast<std::size_t>(s)] / m.leading();
                    if (in_f)
                        next.add_term(k - d + s, e.second, k2);
                    else
                        next.add_term(e.first, k - d + s, k2);
                }
            }
            cur = next;
            if (!changed)
                return cur;
        }
    };
    return reduce_var(reduce_var(p, pf, true), pg, false);
}

namespace detail {

template <class Coeff>
Polynomial<Coeff> restrict_g0(const BivariatePoly<Coeff>& p)
{
    std::vector<Coeff> c;
    for (const auto& [e, v] : p.terms())
        if (e.second == 0) {
            if (static_cast<int>(c.size()) <= e.first)
                c.resize(static_cast<std::size_t>(e.first) + 1, Coeff(0));
            c[static_cast<std::size_t>(e.first)] = v;
        }
    return Polynomial<Coeff>(std::move(c));
}

template <class Coeff>
int order_at_zero(const Polynomial<Coeff>& p)
{
    for (int i = 0; i <= p.degree(); ++i)
        if (!(p[static_cast<std::size_t>(i)] == Coeff(0)))
            return i;
    return -1;
}

} // namespace detail

namespace detail {

template <class Coeff>
BivariatePoly<Coeff> truncate_degree(const BivariatePoly<Coeff>& p, int cap)
{
    if (cap < 0)
        return p;
    BivariatePoly<Coeff> r;
    for (const auto& [e, c] : p.terms())
        if (e.first + e.second <= cap)
            r.add_term(e.first, e.second, c);
    return r;
}

// Fulton's algorithm with every intermediate truncated to total degree <= cap
// (cap < 0: no truncation).  The answer only depends on the jets of F and G of
// order I, so a result I <= cap is exact.
template <class Coeff>
int fulton(BivariatePoly<Coeff> F, BivariatePoly<Coeff> G, int cap, int budget)
{
    int total = 0;
    F = truncate_degree(F, cap);
    G = truncate_degree(G, cap);
    for (int step = 0; step < budget; ++step) {
        if (F.is_zero() || G.is_zero())
            throw Error(Errc::degenerate_input, "curves share a component through the point");
        if (!(F.coeff(0, 0) == Coeff(0)) || !(G.coeff(0, 0) == Coeff(0)))
            return total;
        auto F0 = restrict_g0(F);
        auto G0 = restrict_g0(G);
        if (F0.is_zero() && G0.is_zero())
            throw Error(Errc::degenerate_input, "curves share a component through the point");
        if (G0.is_zero()) {
            std::swap(F, G);
            std::swap(F0, G0);
        }
        if (F0.is_zero()) {
            // F = g * H: I(g, G) is the order of G(f, 0) at 0.
            total += order_at_zero(G0);
            F = F.divide_exact(BivariatePoly<Coeff>::g());
            continue;
        }
        if (F0.degree() > G0.degree()) {
            std::swap(F, G);
            std::swap(F0, G0);
        }
        const int shift = G0.degree() - F0.degree();
        G = truncate_degree(G - BivariatePoly<Coeff>::monomial(shift, 0, G0.leading() / F0.leading()) * F, cap);
    }
    throw Error(Errc::limits_exceeded, "intersection multiplicity step budget exhausted");
}

} // namespace detail

/// Intersection multiplicity of F = G = 0 at the origin.
template <class Coeff>
int intersection_multiplicity_at_origin(const BivariatePoly<Coeff>& F, const BivariatePoly<Coeff>& G,
                                        int budget = 100000)
{
    const int full = std::max(F.total_degree(), 0) * std::max(G.total_degree(), 0);
    for (int cap = 8; cap < full; cap *= 2) {
        try {
            const int m = detail::fulton(F, G, cap, budget);
            if (m <= cap)
                return m;
        } catch (const Error& e) {
            // Truncation can create a spurious common component; widen.
            if (e.code() != Errc::degenerate_input)
                throw;
        }
    }
    return detail::fulton(F, G, -1, budget);
}

} // namespace equilibria
