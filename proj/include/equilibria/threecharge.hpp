#pragma once

// Three charges zeta1, zeta2, 1 at (0,0), (1,0), (a,b): the (f, g)-plane
// reduction, the polynomials Q and R, and the bound assembled from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/gmp.hpp>

#include "equilibria/bivariate.hpp"
#include "equilibria/bounds.hpp"
#include "equilibria/error.hpp"
#include "equilibria/parallel.hpp"
#include "equilibria/polynomial.hpp"
#include "equilibria/potential.hpp"
#include "equilibria/rational.hpp"

namespace equilibria {

struct ThreeChargeParams {
    Rational zeta1{1}, zeta2{1};
    Rational a{0}, b{1};
    Rational alpha{1};

    static ThreeChargeParams from_doubles(double z1, double z2, double a, double b, double alpha)
    {
        ThreeChargeParams p;
        p.zeta1 = snap_to_rational(z1);
        p.zeta2 = snap_to_rational(z2);
        p.a = snap_to_rational(a);
        p.b = snap_to_rational(b);
        p.alpha = snap_to_rational(alpha);
        p.validate();
        return p;
    }

    void validate() const
    {
        if (b == 0)
            throw Error(Errc::collinear_sites, "the third charge lies on the line of the first two (b = 0)");
        if (zeta1 <= 0 || zeta2 <= 0)
            throw Error(Errc::invalid_argument, "zeta1 and zeta2 must be positive");
        if (alpha <= 0)
            throw Error(Errc::invalid_argument, "alpha must be positive");
    }

    ChargeConfig config() const
    {
        Point s1(2), s2(2), s3(2);
        s1 << 0, 0;
        s2 << 1, 0;
        s3 << to_double(a), to_double(b);
        return ChargeConfig({s1, s2, s3}, {to_double(zeta1), to_double(zeta2), 1.0});
    }
};

/// Generic parameters used where none are given.
inline ThreeChargeParams reference_three_charge_params()
{
    ThreeChargeParams p;
    p.zeta1 = Rational(3, 2);
    p.zeta2 = Rational(2, 3);
    p.a = Rational(1, 3);
    p.b = Rational(4, 5);
    p.alpha = Rational(1);
    return p;
}

struct XiPolys {
    RationalBivariate xi1, xi2, xi3;
    RationalBivariate sigma; ///< zeta1 + zeta2 f + g
};

inline XiPolys build_xi(const ThreeChargeParams& p)
{
    p.validate();
    using B = RationalBivariate;
    const B f = B::f(), g = B::g();
    const B a(p.a), b(p.b), z1(p.zeta1), z2(p.zeta2);
    const B am1(p.a - 1);
    XiPolys x;
    B t = a * g + z2 * f;
    x.xi1 = t * t + b * b * g * g;
    t = am1 * g - z1;
    x.xi2 = t * t + b * b * g * g;
    t = am1 * z2 * f + a * z1;
    B u = z2 * f + z1;
    x.xi3 = t * t + b * b * u * u;
    x.sigma = z1 + z2 * f + g;
    return x;
}

/// P df + S dg with denominators cleared by `clearing_factor`.
struct ClearedForm {
    RationalBivariate P, S;
    RationalBivariate clearing_factor;
};

inline ClearedForm eta1_cleared(const ThreeChargeParams& p, const XiPolys& x)
{
    using B = RationalBivariate;
    const B f = B::f(), k(Rational(1) / (p.alpha + 1));
    const B d2 = x.xi2.derivative_g();
    ClearedForm c;
    c.P = k * x.xi1 * x.xi2 - f * x.xi2 * x.xi1.derivative_f();
    c.S = f * x.xi1 * d2 - f * x.xi2 * x.xi1.derivative_g();
    c.clearing_factor = f * x.xi1 * x.xi2;
    return c;
}

inline ClearedForm eta2_cleared(const ThreeChargeParams& p, const XiPolys& x)
{
    using B = RationalBivariate;
    const B f = B::f(), g = B::g(), k(Rational(1) / (p.alpha + 1));
    ClearedForm c;
    c.P = g * x.xi2 * (f * x.xi3.derivative_f() - k * x.xi3);
    c.S = f * x.xi3 * (k * x.xi2 - g * x.xi2.derivative_g());
    c.clearing_factor = f * g * x.xi2 * x.xi3;
    return c;
}

struct QData {
    RationalBivariate Q, Q1;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok)
        throw Error(Errc::identity_violation, what);
}

inline bool inside(const LatticePolygon& outer, const RationalBivariate& p)
{
    return outer.contains(newton_polygon(p));
}

} // namespace detail

/// Q from the wedge of the cleared forms, checked against the closed form
/// k xi1 xi2 xi3 + f g Q1 with k = (-1-2 alpha)/(alpha+1)^2.
inline QData build_Q(const ThreeChargeParams& p)
{
    using B = RationalBivariate;
    const XiPolys x = build_xi(p);
    const B f = B::f(), g = B::g();
    const auto e1 = eta1_cleared(p, x), e2 = eta2_cleared(p, x);

    // eta1c ^ eta2c = f xi2 * Q.
    B wedge = e1.P * e2.S - e1.S * e2.P;
    QData d;
    d.Q = wedge.divide_exact(f * x.xi2);

    const B d2 = x.xi2.derivative_g(), d3 = x.xi3.derivative_f();
    d.Q1 = d2 * x.xi3 * x.xi1.derivative_f() + x.xi2 * d3 * x.xi1.derivative_g() - d2 * d3 * x.xi1;
    const Rational k = (-1 - 2 * p.alpha) / ((p.alpha + 1) * (p.alpha + 1));
    const B xi123 = x.xi1 * x.xi2 * x.xi3;
    detail::require(d.Q == B(k) * xi123 + f * g * d.Q1, "Q from the forms differs from its closed form");

    detail::require(d.Q1.derivative_f(3).is_zero(), "d^3 Q1 / df^3 is not zero");
    detail::require(d.Q1.derivative_g(3).is_zero(), "d^3 Q1 / dg^3 is not zero");
    detail::require(d.Q1.derivative_f(2).derivative_g(2).is_zero(), "d^4 Q1 / df^2 dg^2 is not zero");
    detail::require(d.Q1.coeff(0, 0) == 0, "Q1(0,0) is not zero");

    const auto hexQ = diagonal_hexagon(2, 6, 0, 4);
    detail::require(detail::inside(hexQ, d.Q), "NP(Q) leaves {2<=p+q<=6, 0<=p,q<=4}");
    detail::require(newton_polygon(xi123) == hexQ, "NP(xi1 xi2 xi3) is not the expected hexagon");
    const B fgQ1 = f * g * d.Q1;
    detail::require(newton_polygon(fgQ1) == diagonal_hexagon(3, 5, 1, 3), "NP(fgQ1) differs from {3..5, 1..3}");
    const auto npQ1 = newton_polygon(fgQ1);
    for (const auto& v : npQ1.vertices())
        detail::require(hexQ.strictly_contains(v), "NP(fgQ1) touches the boundary of NP(xi1 xi2 xi3)");
    return d;
}

/// R df^dg = f g xi2 xi3 dQ ^ eta2, i.e. Q_f S2 - Q_g P2 with the cleared eta2.
inline RationalBivariate build_R(const ThreeChargeParams& p, const RationalBivariate& Q)
{
    const XiPolys x = build_xi(p);
    const auto e2 = eta2_cleared(p, x);
    RationalBivariate R = Q.derivative_f() * e2.S - Q.derivative_g() * e2.P;
    if (R.is_zero())
        throw Error(Errc::identity_violation, "R vanishes identically");
    detail::require(detail::inside(diagonal_hexagon(2, 10, 0, 6), R), "NP(R) leaves {2<=p+q<=10, 0<=p,q<=6}");
    return R;
}

struct Reduction {
    RationalBivariate R_tilde, q;
    Rational c;
};

inline RationalBivariate reduction_multiplier(const ThreeChargeParams& p)
{
    using B = RationalBivariate;
    const XiPolys x = build_xi(p);
    const B f = B::f(), g = B::g();
    const B d2 = x.xi2.derivative_g(), d3 = x.xi3.derivative_f();
    return f * x.xi2 * d3 + g * x.xi3 * d2 + B(Rational(2)) * x.xi2 * x.xi3 -
           B(3 * (1 + p.alpha)) * f * g * d2 * d3;
}

/// R~ = R - c q Q with c fixed by the f^6 corner; every monomial of R~ must
/// then lie in {3 <= p+q <= 9, 1 <= p,q <= 5}.
inline Reduction reduce_R(const ThreeChargeParams& p, const RationalBivariate& Q, const RationalBivariate& R)
{
    Reduction r;
    r.q = reduction_multiplier(p);
    const RationalBivariate qQ = r.q * Q;
    const Rational corner = qQ.coeff(6, 0);
    if (corner == 0)
        throw Error(Errc::reduction_failure, "q Q has no f^6 term to match");
    r.c = R.coeff(6, 0) / corner;
    r.R_tilde = R - RationalBivariate(r.c) * qQ;
    if (r.R_tilde.is_zero())
        throw Error(Errc::reduction_failure, "R~ vanishes identically");
    const auto hex = diagonal_hexagon(3, 9, 1, 5);
    std::ostringstream bad;
    for (const auto& [e, c] : r.R_tilde.terms())
        if (!hex.contains(LatticePoint{e.first, e.second}))
            bad << " (" << e.first << "," << e.second << ")";
    if (!bad.str().empty())
        throw Error(Errc::reduction_failure, "boundary monomials survive:" + bad.str());
    return r;
}

// ---------------------------------------------------------------------------
// Special points.

struct ComplexZero {
    GaussianRational f, g;
};

/// Common zeros of xi1, xi2, xi3 (roots of xi2 in g crossed with roots of xi3 in f).
inline std::vector<ComplexZero> common_xi_zeros(const ThreeChargeParams& p, const XiPolys& x)
{
    using G = GaussianRational;
    const G I(Rational(0), Rational(1));
    const G am1(p.a - 1), bb(p.b), z1(p.zeta1), z2(p.zeta2), aa(p.a);
    std::vector<ComplexZero> out;
    const auto X1 = to_gaussian(x.xi1), X2 = to_gaussian(x.xi2), X3 = to_gaussian(x.xi3);
    for (int s : {1, -1})
        for (int t : {1, -1}) {
            const G sg(s), tg(t);
            G gv = z1 / (am1 - sg * I * bb);
            G fv = z1 * (-aa + tg * I * bb) / (z2 * (am1 - tg * I * bb));
            if (!(X2(fv, gv) == G(0)) || !(X3(fv, gv) == G(0)))
                throw Error(Errc::identity_violation, "root formula for xi2 or xi3 is wrong");
            if (X1(fv, gv) == G(0))
                out.push_back({fv, gv});
        }
    return out;
}

/// The two quadratics whose common zeros are the zeros of eta2 (P2 = S2 = 0 off the axes).
inline std::pair<RationalPolynomial, RationalPolynomial> eta2_zero_polys(const ThreeChargeParams& p, const XiPolys& x)
{
    const Rational k = Rational(1) / (p.alpha + 1);
    using B = RationalBivariate;
    B pf = B::f() * x.xi3.derivative_f() - B(k) * x.xi3;
    B pg = B(k) * x.xi2 - B::g() * x.xi2.derivative_g();
    auto univariate = [](const B& poly, bool in_f) {
        std::vector<Rational> c;
        for (const auto& [e, v] : poly.terms()) {
            int d = in_f ? e.first : e.second;
            if ((in_f ? e.second : e.first) != 0)
                throw Error(Errc::identity_violation, "expected a univariate polynomial");
            if (static_cast<int>(c.size()) <= d)
                c.resize(static_cast<std::size_t>(d) + 1, Rational(0));
            c[static_cast<std::size_t>(d)] = v;
        }
        return RationalPolynomial(std::move(c));
    };
    return {univariate(pf, true), univariate(pg, false)};
}

namespace detail {

inline std::vector<double> real_quadratic_roots(const RationalPolynomial& p)
{
    if (p.degree() != 2)
        return {};
    Rational disc = p[1] * p[1] - 4 * p[0] * p[2];
    if (disc <= 0)
        return {};
    double A = to_double(p[2]), Bc = to_double(p[1]), D = std::sqrt(to_double(disc));
    // Cancellation-free pair.
    double q = -0.5 * (Bc + std::copysign(D, Bc));
    std::vector<double> r{q / A, to_double(p[0]) / q};
    std::sort(r.begin(), r.end());
    return r;
}

// Double-precision image of an exact polynomial with an absolute-value companion.
struct NumericPoly {
    struct Term {
        int i, j;
        double c;
    };
    std::vector<Term> terms;
    int max_i = 0, max_j = 0;

    explicit NumericPoly(const RationalBivariate& p)
    {
        for (const auto& [e, c] : p.terms()) {
            terms.push_back({e.first, e.second, to_double(c)});
            max_i = std::max(max_i, e.first);
            max_j = std::max(max_j, e.second);
        }
        if (max_i > 31 || max_j > 31)
            throw Error(Errc::limits_exceeded, "polynomial degree too high for numeric evaluation");
    }
    // value, sum of |terms|
    std::pair<double, double> eval(double f, double g) const
    {
        double fp[32], gp[32];
        fp[0] = gp[0] = 1;
        for (int k = 1; k <= max_i; ++k)
            fp[k] = fp[k - 1] * f;
        for (int k = 1; k <= max_j; ++k)
            gp[k] = gp[k - 1] * g;
        double v = 0, s = 0;
        for (const auto& t : terms) {
            double m = t.c * fp[t.i] * gp[t.j];
            v += m;
            s += std::abs(m);
        }
        return {v, s};
    }
};

} // namespace detail

struct RealSolution {
    double f = 0, g = 0;
    int quadrant = 0; ///< 1..4 counterclockwise, 1 = positive
    bool singular = false;
};

inline int quadrant_of(double f, double g)
{
    if (f > 0)
        return g > 0 ? 1 : 4;
    return g > 0 ? 2 : 3;
}

namespace detail {

using HighFloat = boost::multiprecision::mpf_float_100;

struct HighPoly {
    struct Term {
        int i, j;
        HighFloat c;
    };
    std::vector<Term> terms;

    explicit HighPoly(const RationalBivariate& p)
    {
        for (const auto& [e, c] : p.terms())
            terms.push_back({e.first, e.second,
                             HighFloat(boost::multiprecision::numerator(c)) /
                                 HighFloat(boost::multiprecision::denominator(c))});
    }
    std::pair<HighFloat, HighFloat> eval(const HighFloat& f, const HighFloat& g) const
    {
        HighFloat v = 0, s = 0;
        for (const auto& t : terms) {
            HighFloat m = t.c * boost::multiprecision::pow(f, t.i) * boost::multiprecision::pow(g, t.j);
            v += m;
            s += boost::multiprecision::abs(m);
        }
        return {v, s};
    }
};

} // namespace detail

/// Real solutions of Q = R = 0 with f, g != 0.  Log-coordinate Newton in
/// double precision from a grid of seeds proposes candidates; each is then
/// polished with 100-digit Newton on the exact coefficients, so near-multiple
/// roots are neither split nor smeared into clusters.
inline std::vector<RealSolution> real_common_zeros(const RationalBivariate& Q, const RationalBivariate& R,
                                                   double span = 8.0, double step = 1.0)
{
    const RationalBivariate Qf = Q.derivative_f(), Qg = Q.derivative_g(), Rf = R.derivative_f(),
                            Rg = R.derivative_g();
    const detail::NumericPoly nQ(Q), nR(R), nQf(Qf), nQg(Qg), nRf(Rf), nRg(Rg);
    const detail::HighPoly hQ(Q), hR(R), hQf(Qf), hQg(Qg), hRf(Rf), hRg(Rg);
    using detail::HighFloat;
    std::vector<RealSolution> found;
    for (int quad = 1; quad <= 4; ++quad) {
        const double sf = (quad == 1 || quad == 4) ? 1 : -1;
        const double sg = (quad == 1 || quad == 2) ? 1 : -1;
        std::vector<Eigen::Vector2d> candidates;
        for (double u0 = -span; u0 <= span + 1e-12; u0 += step)
            for (double v0 = -span; v0 <= span + 1e-12; v0 += step) {
                Eigen::Vector2d w(u0, v0);
                bool ok = false;
                for (int it = 0; it < 80; ++it) {
                    double f = sf * std::exp(w[0]), g = sg * std::exp(w[1]);
                    auto [q, qs] = nQ.eval(f, g);
                    auto [r, rs] = nR.eval(f, g);
                    Eigen::Vector2d F(q / qs, r / rs);
                    Eigen::Matrix2d J;
                    J << f * nQf.eval(f, g).first / qs, g * nQg.eval(f, g).first / qs,
                        f * nRf.eval(f, g).first / rs, g * nRg.eval(f, g).first / rs;
                    Eigen::Vector2d d = J.fullPivLu().solve(-F);
                    if (!d.allFinite())
                        break;
                    if (d.norm() > 1.0)
                        d *= 1.0 / d.norm();
                    w += d;
                    if (w.cwiseAbs().maxCoeff() > 4 * span)
                        break;
                    if (F.norm() < 1e-9 && d.norm() < 1e-6) {
                        ok = true;
                        break;
                    }
                }
                if (ok && std::none_of(candidates.begin(), candidates.end(),
                                       [&](const Eigen::Vector2d& m) { return (m - w).norm() < 1e-5; }))
                    candidates.push_back(w);
            }

        struct Polished {
            HighFloat f, g;
            bool singular;
        };
        std::vector<Polished> roots;
        for (const auto& w : candidates) {
            HighFloat f = sf * std::exp(w[0]), g = sg * std::exp(w[1]);
            bool ok = false;
            HighFloat det, jscale;
            for (int it = 0; it < 400; ++it) {
                auto [q, qs] = hQ.eval(f, g);
                auto [r, rs] = hR.eval(f, g);
                HighFloat a = hQf.eval(f, g).first, b = hQg.eval(f, g).first;
                HighFloat c = hRf.eval(f, g).first, d = hRg.eval(f, g).first;
                det = a * d - b * c;
                // Scaled Jacobian determinant, as in the double pass.
                jscale = boost::multiprecision::abs(f * g * det / (qs * rs));
                if (boost::multiprecision::abs(q) <= 1e-80 * qs && boost::multiprecision::abs(r) <= 1e-80 * rs) {
                    ok = true;
                    break;
                }
                if (det == 0)
                    break;
                HighFloat df = (-q * d + r * b) / det, dg = (-a * r + c * q) / det;
                f += df;
                g += dg;
                if (f * sf <= 0 || g * sg <= 0)
                    break; // left the quadrant
            }
            if (!ok)
                continue;
            const bool singular = jscale < HighFloat(1e-30);
            bool dup = false;
            for (auto& r : roots)
                if (boost::multiprecision::abs(r.f - f) + boost::multiprecision::abs(r.g - g) <=
                    HighFloat(1e-25) * (boost::multiprecision::abs(f) + boost::multiprecision::abs(g))) {
                    dup = true;
                    r.singular = r.singular || singular;
                }
            if (!dup)
                roots.push_back({f, g, singular});
        }
        std::vector<RealSolution> mine;
        for (const auto& r : roots)
            mine.push_back({r.f.convert_to<double>(), r.g.convert_to<double>(), quad, r.singular});
        std::sort(mine.begin(), mine.end(),
                  [](const RealSolution& x, const RealSolution& y) { return x.f != y.f ? x.f < y.f : x.g < y.g; });
        found.insert(found.end(), mine.begin(), mine.end());
    }
    return found;
}

// ---------------------------------------------------------------------------
// The curves gamma1, gamma2 in log coordinates (u, v) = (log f, log g).

namespace detail {

// log(A t^2 + B t + C) and t d/dt of it at t = e^w, for a positive quadratic.
struct LogQuadratic {
    double A = 0, B = 0, C = 0;
    std::pair<double, double> operator()(double w) const
    {
        if (w > 0) {
            double e = std::exp(-w);
            double val = A + B * e + C * e * e;
            return {2 * w + std::log(val), (2 * A + B * e) / val};
        }
        double t = std::exp(w);
        double val = (A * t + B) * t + C;
        return {std::log(val), (2 * A * t + B) * t / val};
    }
};

} // namespace detail

class GammaSystem {
public:
    explicit GammaSystem(const ThreeChargeParams& p) : GammaSystem(to_double(p.zeta1), to_double(p.zeta2), to_double(p.a), to_double(p.b), to_double(p.alpha)) {}

    GammaSystem(double z1, double z2, double a, double b, double alpha)
        : z1_(z1), z2_(z2), a_(a), b_(b), k_(1.0 / (alpha + 1))
    {
        if (b == 0)
            throw Error(Errc::collinear_sites, "b = 0");
        xi1_ = {z2 * z2, 2 * a * z2, a * a + b * b};
        xi2_ = {(a - 1) * (a - 1) + b * b, -2 * (a - 1) * z1, z1 * z1};
        xi3_ = {z2 * z2 * ((a - 1) * (a - 1) + b * b), 2 * z2 * z1 * (a * (a - 1) + b * b), z1 * z1 * (a * a + b * b)};
    }

    /// (G1, G2) and their Jacobian in (u, v).
    struct Value {
        Eigen::Vector2d G;
        Eigen::Matrix2d J;
    };

    Value operator()(double u, double v) const
    {
        auto [l1, t1] = xi1_(u - v); // log xi1 = 2v + log q(e^{u-v})
        l1 += 2 * v;
        auto [l2, t2] = xi2_(v);
        auto [l3, t3] = xi3_(u);
        Value r;
        r.G << k_ * u + l2 - l1, k_ * (v - u) + l3 - l2;
        r.J << k_ - t1, t2 - (2 - t1), -k_ + t3, k_ - t2;
        return r;
    }

    /// x = (a g + zeta2 f)/sigma, y = b g / sigma.
    Point to_xy(double f, double g) const
    {
        const double s = z1_ + z2_ * f + g;
        Point x(2);
        x << (a_ * g + z2_ * f) / s, b_ * g / s;
        return x;
    }

    /// f = (rho1/rho2)^{alpha+1}, g = (rho1/rho3)^{alpha+1}.
    std::pair<double, double> to_fg(const Point& x) const
    {
        const double r1 = x.squaredNorm();
        const double r2 = (x[0] - 1) * (x[0] - 1) + x[1] * x[1];
        const double r3 = (x[0] - a_) * (x[0] - a_) + (x[1] - b_) * (x[1] - b_);
        const double e = 1.0 / k_;
        return {std::pow(r1 / r2, e), std::pow(r1 / r3, e)};
    }

private:
    double z1_, z2_, a_, b_, k_;
    detail::LogQuadratic xi1_, xi2_, xi3_;
};

struct GammaPoint {
    double u = 0, v = 0;
    double f = 0, g = 0;
    Point xy;
    double residual = 0;      ///< relative gradient residual of V at xy
    double roundtrip = 0;     ///< relative error of (f,g) -> (x,y) -> (f,g)
};

struct GammaOptions {
    int resolution = 2048;
    double half_width = 40.0;
    unsigned jobs = 1;
};

/// Intersections of gamma1 and gamma2 in the open positive quadrant.
inline std::vector<GammaPoint> gamma_intersections(const ThreeChargeParams& p, const GammaOptions& opt = {})
{
    p.validate();
    const GammaSystem sys(p);
    const int N = opt.resolution;
    if (N < 2 || N > 8192)
        throw Error(Errc::invalid_argument, "grid resolution must be in [2, 8192]");
    const double lo = -opt.half_width, h = 2 * opt.half_width / N;

    const int bands = static_cast<int>(std::max(1u, opt.jobs) * 4);
    std::vector<std::vector<Eigen::Vector2d>> per_band(static_cast<std::size_t>(bands));
    parallel_for(static_cast<std::size_t>(bands), opt.jobs, [&](std::size_t bi) {
        const int r0 = static_cast<int>(bi) * N / bands, r1 = static_cast<int>(bi + 1) * N / bands;
        std::vector<Eigen::Vector2d> prev(static_cast<std::size_t>(N) + 1), cur(prev.size());
        auto row = [&](int r, std::vector<Eigen::Vector2d>& out) {
            for (int c = 0; c <= N; ++c)
                out[static_cast<std::size_t>(c)] = sys(lo + c * h, lo + r * h).G;
        };
        row(r0, prev);
        for (int r = r0; r < r1; ++r) {
            row(r + 1, cur);
            for (int c = 0; c < N; ++c) {
                const Eigen::Vector2d* q[4] = {&prev[c], &prev[c + 1], &cur[c], &cur[c + 1]};
                bool hit = true;
                for (int comp = 0; comp < 2 && hit; ++comp) {
                    double mn = (*q[0])[comp], mx = mn;
                    for (auto* s : q) {
                        mn = std::min(mn, (*s)[comp]);
                        mx = std::max(mx, (*s)[comp]);
                    }
                    hit = mn <= 0 && mx >= 0;
                }
                if (hit)
                    per_band[bi].push_back({lo + (c + 0.5) * h, lo + (r + 0.5) * h});
            }
            std::swap(prev, cur);
        }
    });

    const ChargeConfig cfg = p.config();
    const Exponent alpha(to_double(p.alpha));
    std::vector<GammaPoint> out;
    for (const auto& band : per_band)
        for (const auto& seed : band) {
            Eigen::Vector2d w = seed;
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                auto val = sys(w[0], w[1]);
                if (val.G.cwiseAbs().maxCoeff() < 1e-13) {
                    ok = true;
                    break;
                }
                Eigen::Vector2d d = val.J.fullPivLu().solve(-val.G);
                if (!d.allFinite())
                    break;
                if (d.norm() > 4 * h)
                    d *= 4 * h / d.norm();
                w += d;
            }
            if (!ok || (w - seed).cwiseAbs().maxCoeff() > 2 * h)
                continue;
            if (std::any_of(out.begin(), out.end(), [&](const GammaPoint& g) {
                    return std::hypot(g.u - w[0], g.v - w[1]) < 1e-7;
                }))
                continue;
            auto val = sys(w[0], w[1]);
            const double det = val.J.determinant();
            if (!(std::abs(det) > 1e-10 * std::max(1.0, val.J.squaredNorm())))
                throw Error(Errc::non_regular_value, "gamma curves meet non-transversally");
            GammaPoint gp;
            gp.u = w[0];
            gp.v = w[1];
            gp.f = std::exp(w[0]);
            gp.g = std::exp(w[1]);
            gp.xy = sys.to_xy(gp.f, gp.g);
            auto [f2, g2] = sys.to_fg(gp.xy);
            gp.roundtrip = std::max(std::abs(f2 - gp.f) / gp.f, std::abs(g2 - gp.g) / gp.g);
            {
                auto rho = squared_distances(cfg, gp.xy);
                double s = 0;
                for (std::size_t i = 0; i < rho.size(); ++i)
                    s += std::abs(cfg.values[i]) * alpha.alpha * std::pow(rho[i], -alpha.alpha - 1) * 2 *
                         std::sqrt(rho[i]);
                gp.residual = gradient(cfg, alpha, gp.xy).norm() / s;
            }
            out.push_back(gp);
        }
    std::sort(out.begin(), out.end(), [](const GammaPoint& x, const GammaPoint& y) {
        return x.u != y.u ? x.u < y.u : x.v < y.v;
    });
    return out;
}

/// Sign changes of G2 along the boundary of [-U1, U1] x [-U2, U2] in (u, v).
inline int gamma2_rectangle_crossings(const ThreeChargeParams& p, double U1, double U2, int samples_per_side = 200000)
{
    const GammaSystem sys(p);
    std::vector<Eigen::Vector2d> corners{{-U1, -U2}, {U1, -U2}, {U1, U2}, {-U1, U2}};
    int changes = 0, last = 0, first = 0;
    for (int side = 0; side < 4; ++side) {
        const Eigen::Vector2d a = corners[side], b = corners[(side + 1) % 4];
        for (int s = 0; s < samples_per_side; ++s) {
            Eigen::Vector2d w = a + (b - a) * (static_cast<double>(s) / samples_per_side);
            double val = sys(w[0], w[1]).G[1];
            int sg = val > 0 ? 1 : (val < 0 ? -1 : 0);
            if (sg == 0)
                continue;
            if (last == 0)
                first = sg;
            else if (sg != last)
                ++changes;
            last = sg;
        }
    }
    if (last != 0 && first != 0 && last != first)
        ++changes;
    return changes;
}

// ---------------------------------------------------------------------------
// Final count.

struct PipelineReport {
    ThreeChargeParams params;
    int n1 = 2;          ///< unbounded components of gamma1 in the positive quadrant
    int n3 = 0;          ///< unbounded components of {Q = 0}
    int subtracted = 18; ///< solutions of Q = R = 0 known to lie outside the positive quadrant
    BigInt mixed_volume_2x = 0;
    Rational reduction_constant = 0;
    int total_degree_R = 0;
    std::vector<int> complex_multiplicities;
    std::array<int, 4> real_zeros_by_quadrant{0, 0, 0, 0};
    bool eta2_zeros_common = false;
    int rectangle_crossings = 0;
    bool certified = false;
    std::vector<std::string> failures;

    long long bound() const
    {
        return n1 + n3 + static_cast<long long>(mixed_volume_2x) - subtracted;
    }
};

inline PipelineReport pipeline_count(const ThreeChargeParams& p, bool verify_numerics = true)
{
    PipelineReport rep;
    rep.params = p;
    const XiPolys x = build_xi(p);
    const QData qd = build_Q(p);
    const RationalBivariate R = build_R(p, qd.Q);
    rep.total_degree_R = R.total_degree();
    const Reduction red = reduce_R(p, qd.Q, R);
    rep.reduction_constant = red.c;
    rep.mixed_volume_2x = mixed_volume_2x(newton_polygon(qd.Q), newton_polygon(red.R_tilde));

    // Q and R vanish at the four zeros of eta2.
    auto [pf, pg] = eta2_zero_polys(p, x);
    rep.eta2_zeros_common = reduce_modulo(qd.Q, pf, pg).is_zero() && reduce_modulo(R, pf, pg).is_zero();
    if (!rep.eta2_zeros_common)
        rep.failures.push_back("Q or R does not vanish at the zeros of eta2");
    const auto rf = detail::real_quadratic_roots(pf), rg = detail::real_quadratic_roots(pg);
    if (rf.size() != 2 || rg.size() != 2 || !(rf[0] < 0 && rf[1] > 0) || !(rg[0] < 0 && rg[1] > 0))
        rep.failures.push_back("eta2 does not vanish once in each open quadrant");

    // The complex pair: multiplicity of Q = R~ = 0.
    const auto zeros = common_xi_zeros(p, x);
    if (zeros.size() != 2)
        rep.failures.push_back("expected two common complex zeros of the xi's, found " + std::to_string(zeros.size()));
    const auto gQ = to_gaussian(qd.Q), gR = to_gaussian(red.R_tilde);
    for (const auto& z : zeros) {
        if (!(gQ(z.f, z.g) == GaussianRational(0)) || !(gQ.derivative_f()(z.f, z.g) == GaussianRational(0)) ||
            !(gQ.derivative_g()(z.f, z.g) == GaussianRational(0)))
            rep.failures.push_back("a common xi zero is not a critical point of Q");
        int m = intersection_multiplicity_at_origin(gQ.translate(z.f, z.g), gR.translate(z.f, z.g));
        rep.complex_multiplicities.push_back(m);
        if (m < 6)
            rep.failures.push_back("complex zero of multiplicity " + std::to_string(m) + " < 6");
    }

    if (verify_numerics) {
        for (const auto& s : real_common_zeros(qd.Q, R))
            rep.real_zeros_by_quadrant[static_cast<std::size_t>(s.quadrant - 1)] += s.singular ? 2 : 1;
        for (int quad : {2, 3, 4})
            if (rep.real_zeros_by_quadrant[static_cast<std::size_t>(quad - 1)] < 2)
                rep.failures.push_back("fewer than two real solutions located in quadrant " + std::to_string(quad));
        const double U1 = std::min(20.0, 250.0 / (1 + 2 * to_double(p.alpha)));
        rep.rectangle_crossings = gamma2_rectangle_crossings(p, U1, 300.0);
        if (rep.rectangle_crossings != 4)
            rep.failures.push_back("gamma2 crosses the large rectangle " + std::to_string(rep.rectangle_crossings) +
                                   " times, expected 4");
    }
    rep.certified = rep.failures.empty();
    return rep;
}

} // namespace equilibria
