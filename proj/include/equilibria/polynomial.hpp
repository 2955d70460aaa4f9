#pragma once

// Dense univariate polynomials over a field, Sturm sequences.

#include <cstddef>
#include <utility>
#include <vector>

#include "equilibria/error.hpp"
#include "equilibria/rational.hpp"

namespace equilibria {

template <class Coeff>
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(Coeff c) : c_{std::move(c)} { trim(); } // NOLINT
    explicit Polynomial(std::vector<Coeff> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Polynomial x() { return Polynomial(std::vector<Coeff>{Coeff(0), Coeff(1)}); }

    /// -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const Coeff& operator[](std::size_t i) const { return c_[i]; }
    Coeff coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Coeff(0); }
    const Coeff& leading() const { return c_.back(); }
    const std::vector<Coeff>& coeffs() const { return c_; }

    template <class T>
    T operator()(const T& x) const
    {
        T acc(0);
        for (std::size_t i = c_.size(); i-- > 0;)
            acc = acc * x + T(c_[i]);
        return acc;
    }

    Polynomial derivative() const
    {
        std::vector<Coeff> d;
        for (std::size_t i = 1; i < c_.size(); ++i)
            d.push_back(c_[i] * Coeff(static_cast<long>(i)));
        return Polynomial(std::move(d));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b)
    {
        std::vector<Coeff> r(std::max(a.c_.size(), b.c_.size()), Coeff(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            r[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i)
            r[i] += b.c_[i];
        return Polynomial(std::move(r));
    }
    friend Polynomial operator-(const Polynomial& a) { return a * Polynomial(Coeff(-1)); }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
    {
        if (a.is_zero() || b.is_zero())
            return {};
        std::vector<Coeff> r(a.c_.size() + b.c_.size() - 1, Coeff(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                r[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(r));
    }
    Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
    Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }
    Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

    Polynomial pow(unsigned e) const
    {
        Polynomial r(Coeff(1)), base = *this;
        while (e) {
            if (e & 1u)
                r *= base;
            base *= base;
            e >>= 1u;
        }
        return r;
    }

    /// Euclidean division: *this = q * d + r.
    std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const
    {
        if (d.is_zero())
            throw Error(Errc::zero_polynomial, "division by the zero polynomial");
        std::vector<Coeff> rem = c_;
        if (degree() < d.degree())
            return {Polynomial{}, *this};
        std::vector<Coeff> q(c_.size() - d.c_.size() + 1, Coeff(0));
        for (std::size_t k = q.size(); k-- > 0;) {
            Coeff f = rem[k + d.c_.size() - 1] / d.leading();
            q[k] = f;
            if (f == Coeff(0))
                continue;
            for (std::size_t j = 0; j < d.c_.size(); ++j)
                rem[k + j] -= f * d.c_[j];
        }
        rem.resize(d.c_.size() - 1);
        return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
    }

    Polynomial monic() const
    {
        if (is_zero())
            return *this;
        std::vector<Coeff> r = c_;
        Coeff lc = leading();
        for (auto& v : r)
            v /= lc;
        return Polynomial(std::move(r));
    }

private:
    void trim()
    {
        while (!c_.empty() && c_.back() == Coeff(0))
            c_.pop_back();
    }

    std::vector<Coeff> c_;
};

using RationalPolynomial = Polynomial<Rational>;

template <class Coeff>
Polynomial<Coeff> gcd(Polynomial<Coeff> a, Polynomial<Coeff> b)
{
    while (!b.is_zero()) {
        auto r = a.divmod(b).second;
        a = std::move(b);
        b = r.monic();
    }
    return a.monic();
}

inline int sign(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

/// Sturm chain p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k) with each member
/// rescaled by a positive constant to keep coefficients small.
class SturmSequence {
public:
    explicit SturmSequence(const RationalPolynomial& p)
    {
        if (p.is_zero())
            throw Error(Errc::zero_polynomial, "Sturm sequence of the zero polynomial");
        chain_.push_back(normalize(p));
        auto d = p.derivative();
        if (!d.is_zero())
            chain_.push_back(normalize(d));
        while (chain_.size() >= 2 && chain_.back().degree() > 0) {
            auto r = chain_[chain_.size() - 2].divmod(chain_.back()).second;
            if (r.is_zero())
                break;
            chain_.push_back(normalize(-r));
        }
    }

    /// Sign changes at x.
    int variations(const Rational& x) const
    {
        std::vector<int> s;
        for (const auto& q : chain_)
            s.push_back(sign(q(x)));
        return count(s);
    }
    /// Sign changes at +inf (side = 1) or -inf (side = -1).
    int variations_at_infinity(int side) const
    {
        std::vector<int> s;
        for (const auto& q : chain_) {
            int sg = sign(q.leading());
            if (side < 0 && q.degree() % 2 == 1)
                sg = -sg;
            s.push_back(sg);
        }
        return count(s);
    }

    /// Distinct real roots in (a, b]; requires p(a), p(b) handled by the caller.
    int count(const Rational& a, const Rational& b) const { return variations(a) - variations(b); }
    int count_real() const { return variations_at_infinity(-1) - variations_at_infinity(1); }
    const std::vector<RationalPolynomial>& chain() const { return chain_; }

private:
    static RationalPolynomial normalize(const RationalPolynomial& p)
    {
        Rational lc = abs(p.leading());
        std::vector<Rational> c = p.coeffs();
        for (auto& v : c)
            v /= lc;
        return RationalPolynomial(std::move(c));
    }
    static int count(const std::vector<int>& s)
    {
        int changes = 0, last = 0;
        for (int v : s) {
            if (v == 0)
                continue;
            if (last != 0 && v != last)
                ++changes;
            last = v;
        }
        return changes;
    }

    std::vector<RationalPolynomial> chain_;
};

} // namespace equilibria
