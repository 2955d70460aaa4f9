#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "equilibria/error.hpp"

namespace equilibria {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

/// Denominator cap used whenever binary64 inputs enter the exact track.
inline constexpr std::uint64_t default_snap_denominator = std::uint64_t{1} << 40;

inline BigInt floor_div(const BigInt& n, const BigInt& d)
{
    BigInt q = n / d;
    if (q * d != n && ((n < 0) != (d < 0)))
        q -= 1;
    return q;
}

inline BigInt floor(const Rational& r)
{
    return floor_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Simplest continued-fraction convergent that rounds back to x, with the
/// denominator capped at max_den.  Decimal literals such as 0.1 come back as
/// 1/10; irrational inputs land on a nearby rational with bounded size.
inline Rational snap_to_rational(double x, std::uint64_t max_den = default_snap_denominator)
{
    if (!std::isfinite(x))
        throw Error(Errc::invalid_argument, "cannot snap a non-finite value");
    Rational remaining(x); // exact binary value
    BigInt h_prev = 0, h = 1, k_prev = 1, k = 0;
    const BigInt cap(max_den);
    Rational best(0);
    bool have = false;
    for (int iter = 0; iter < 128; ++iter) {
        BigInt a = floor(remaining);
        BigInt h_next = a * h + h_prev;
        BigInt k_next = a * k + k_prev;
        if (k_next > cap)
            break;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        best = Rational(h, k);
        have = true;
        if (to_double(best) == x)
            return best;
        Rational frac = remaining - Rational(a);
        if (frac == 0)
            return best;
        remaining = 1 / frac;
    }
    if (!have)
        return Rational(x);
    return best;
}

inline std::string to_string(const Rational& r) { return r.str(); }

/// Element of Q(i); enough field arithmetic for exact work at complex points.
struct GaussianRational {
    Rational re{0};
    Rational im{0};

    GaussianRational() = default;
    GaussianRational(Rational r) : re(std::move(r)) {}
    GaussianRational(int r) : re(r) {}
    GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    GaussianRational conj() const { return {re, -im}; }
    Rational norm() const { return re * re + im * im; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b)
    {
        Rational n = b.norm();
        if (n == 0)
            throw Error(Errc::invalid_argument, "division by zero in Q(i)");
        GaussianRational t = a * b.conj();
        return {t.re / n, t.im / n};
    }
    GaussianRational& operator+=(const GaussianRational& o) { return *this = *this + o; }
    GaussianRational& operator-=(const GaussianRational& o) { return *this = *this - o; }
    GaussianRational& operator*=(const GaussianRational& o) { return *this = *this * o; }
    GaussianRational& operator/=(const GaussianRational& o) { return *this = *this / o; }
    friend bool operator==(const GaussianRational& a, const GaussianRational& b)
    {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }
    friend std::ostream& operator<<(std::ostream& os, const GaussianRational& z)
    {
        return os << z.re << (z.im < 0 ? " - " : " + ") << abs(z.im) << "i";
    }
};

} // namespace equilibria
