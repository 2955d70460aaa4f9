#pragma once

// Closed intervals of doubles with outward rounding.  Every result is widened
// by one ulp per endpoint after the round-to-nearest operation, so the
// enclosure holds whatever the rounding mode; exp and log get a few extra ulps
// because libm does not promise correct rounding.

#include <algorithm>
#include <cmath>
#include <limits>

namespace equilibria {

class Interval {
public:
    Interval() = default;
    Interval(double v) : lo_(v), hi_(v) {} // NOLINT
    Interval(double lo, double hi) : lo_(lo), hi_(hi) {}

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double width() const { return hi_ - lo_; }
    double mid() const { return 0.5 * (lo_ + hi_); }
    bool contains(double v) const { return lo_ <= v && v <= hi_; }
    bool contains_zero() const { return contains(0.0); }
    /// +1 / -1 when the sign is certain, 0 otherwise.
    int sign() const { return lo_ > 0 ? 1 : (hi_ < 0 ? -1 : 0); }

    friend Interval operator+(const Interval& a, const Interval& b)
    {
        return widen(a.lo_ + b.lo_, a.hi_ + b.hi_, 1);
    }
    friend Interval operator-(const Interval& a, const Interval& b)
    {
        return widen(a.lo_ - b.hi_, a.hi_ - b.lo_, 1);
    }
    friend Interval operator-(const Interval& a) { return {-a.hi_, -a.lo_}; }
    friend Interval operator*(const Interval& a, const Interval& b)
    {
        double p[4] = {a.lo_ * b.lo_, a.lo_ * b.hi_, a.hi_ * b.lo_, a.hi_ * b.hi_};
        return widen(*std::min_element(p, p + 4), *std::max_element(p, p + 4), 1);
    }
    Interval& operator+=(const Interval& o) { return *this = *this + o; }
    Interval& operator*=(const Interval& o) { return *this = *this * o; }

    friend Interval sqr(const Interval& a)
    {
        double l = std::abs(a.lo_), h = std::abs(a.hi_);
        if (a.contains_zero())
            return widen(0.0, std::max(l, h) * std::max(l, h), 1).clamp_nonneg();
        double m = std::min(l, h), M = std::max(l, h);
        return widen(m * m, M * M, 1).clamp_nonneg();
    }
    friend Interval exp(const Interval& a) { return widen(std::exp(a.lo_), std::exp(a.hi_), 4).clamp_nonneg(); }
    /// Requires a.lo() > 0.
    friend Interval log(const Interval& a) { return widen(std::log(a.lo_), std::log(a.hi_), 4); }

private:
    static double down(double v, int k)
    {
        for (int i = 0; i < k; ++i)
            v = std::nextafter(v, -std::numeric_limits<double>::infinity());
        return v;
    }
    static double up(double v, int k)
    {
        for (int i = 0; i < k; ++i)
            v = std::nextafter(v, std::numeric_limits<double>::infinity());
        return v;
    }
    static Interval widen(double lo, double hi, int ulps) { return {down(lo, ulps), up(hi, ulps)}; }
    Interval clamp_nonneg() const { return {std::max(0.0, lo_), hi_}; }

    double lo_ = 0.0, hi_ = 0.0;
};

} // namespace equilibria
