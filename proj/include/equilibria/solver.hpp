#pragma once

// Critical points of V_alpha: damped Newton from many starts, exact and
// interval-certified counting on a line, alpha sweeps and census checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "equilibria/error.hpp"
#include "equilibria/geometry.hpp"
#include "equilibria/interval.hpp"
#include "equilibria/parallel.hpp"
#include "equilibria/polynomial.hpp"
#include "equilibria/potential.hpp"
#include "equilibria/rational.hpp"
#include "equilibria/voronoi.hpp"

namespace equilibria {

struct SolverOptions {
    std::size_t seeds = 0; ///< 0 means 64 per charge
    std::uint64_t rng_seed = 0;
    std::size_t max_iterations = 200;
    double tolerance = 1e-10;     ///< relative gradient residual
    double merge_radius = 1e-7;   ///< fraction of the site diameter
    double box_inflation = 0.1;   ///< same-sign charges
    double mixed_box_inflation = 2.0;
    bool voronoi_seeds = true;
    unsigned retries = 2; ///< seed multiplier 4 per retry on identity failure
    unsigned jobs = 1;
};

struct CriticalPoint {
    Point location;
    double residual = 0;          ///< |grad V|
    double relative_residual = 0; ///< |grad V| over the gradient scale
    int morse_index = 0;
    bool degenerate = false;
    std::size_t basin_seed = 0;
    Eigen::VectorXd eigenvalues;
};

struct MorseCensus {
    std::map<int, std::size_t> counts;
    std::size_t total = 0;
    std::size_t degenerate = 0;

    std::size_t at(int j) const
    {
        auto it = counts.find(j);
        return it == counts.end() ? 0 : it->second;
    }
    void add(int j)
    {
        ++counts[j];
        ++total;
    }
    long long alternating_sum() const
    {
        long long s = 0;
        for (auto [j, c] : counts)
            s += (j % 2 ? -1 : 1) * static_cast<long long>(c);
        return s;
    }
};

inline MorseCensus census_of(const std::vector<CriticalPoint>& pts)
{
    MorseCensus c;
    for (const auto& p : pts) {
        if (p.degenerate)
            ++c.degenerate;
        else
            c.add(p.morse_index);
    }
    return c;
}

struct IdentityReport {
    long long lhs = 0, rhs = 0;
    bool holds = false;
    std::size_t mu = 0, nu = 0;
    int total_sign = 0;
    // Morse-Kiang comparison; m2 counts index n-1.
    long long m1 = 0, m2 = 0;
    long long index_difference_rhs = 0; ///< nu - mu - 1
    bool index_difference_holds = false;
    bool morse_kiang_applicable = false; ///< n >= 3 and harmonic alpha
    bool m2_bound_holds = true, m1_bound_holds = true;
};

/// Poincare-Hopf count for a nondegenerate census in R^n.
inline IdentityReport census_identities(const MorseCensus& census, const ChargeConfig& cfg,
                                        std::optional<double> alpha = std::nullopt)
{
    if (census.degenerate > 0)
        throw Error(Errc::degenerate_census, "census contains degenerate critical points");
    IdentityReport r;
    for (double z : cfg.values)
        (z > 0 ? r.mu : r.nu)++;
    const double q = cfg.total_charge();
    if (q == 0)
        throw Error(Errc::invalid_argument, "zero total charge is outside the supported cases");
    r.total_sign = q > 0 ? 1 : -1;
    const long long n = cfg.dimension();
    const long long sn = n % 2 ? -1 : 1;
    const auto mu = static_cast<long long>(r.mu), nu = static_cast<long long>(r.nu);
    r.lhs = census.alternating_sum();
    r.rhs = q > 0 ? sn * (1 - mu) - nu : 1 - sn * mu - nu;
    r.holds = r.lhs == r.rhs;
    r.m1 = static_cast<long long>(census.at(1));
    r.m2 = static_cast<long long>(census.at(static_cast<int>(n - 1)));
    r.index_difference_rhs = nu - mu - 1;
    r.index_difference_holds = r.m1 - r.m2 == r.index_difference_rhs;
    r.morse_kiang_applicable = n >= 3 && alpha && std::abs(*alpha - (n - 2) / 2.0) < 1e-12;
    if (q < 0) {
        r.m2_bound_holds = r.m2 >= mu;
        r.m1_bound_holds = r.m1 >= nu - 1;
    } else {
        r.m2_bound_holds = r.m2 >= mu - 1;
        r.m1_bound_holds = r.m1 >= nu;
    }
    return r;
}

struct SolveStats {
    std::size_t seeds = 0;
    std::size_t converged = 0, left_box = 0, hit_site = 0, stalled = 0;
    std::size_t attempts = 0; ///< identity-driven reruns included
    bool normalized = false;
    double box_inflation = 0;
};

struct SolveResult {
    std::vector<CriticalPoint> points;
    MorseCensus census;
    SolveStats stats;
    std::optional<IdentityReport> identity;
    /// Identity holds (or is not applicable) and no degenerate point was seen.
    bool complete() const { return census.degenerate == 0 && (!identity || identity->holds); }
};

namespace detail {

inline double halton(std::size_t index, unsigned base)
{
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

inline unsigned nth_prime(std::size_t k)
{
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (k >= std::size(primes))
        throw Error(Errc::limits_exceeded, "seeding supports up to 16 dimensions");
    return primes[k];
}

struct Box {
    Point lo, hi;
    bool contains(const Point& x) const
    {
        return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }
};

// Gradient and Hessian up to the common positive factor alpha * exp(M) and sign;
// `scale` is the matching gradient magnitude scale.
struct ScaledDerivatives {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    double scale = 0;
    bool at_site = false;
};

inline ScaledDerivatives scaled_derivatives(const ChargeConfig& cfg, double alpha, const Point& x, bool with_hessian)
{
    const std::size_t l = cfg.size();
    const Eigen::Index n = x.size();
    std::vector<double> rho(l), logw(l);
    ScaledDerivatives out;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l; ++i) {
        rho[i] = (x - cfg.sites[i]).squaredNorm();
        if (!(rho[i] >= at_site_cutoff)) {
            out.at_site = true;
            return out;
        }
        logw[i] = std::log(std::abs(cfg.values[i])) - (alpha + 1) * std::log(rho[i]);
        m = std::max(m, logw[i]);
    }
    out.g = Eigen::VectorXd::Zero(n);
    if (with_hessian)
        out.h = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < l; ++i) {
        double w = (cfg.values[i] > 0 ? 1.0 : -1.0) * std::exp(logw[i] - m);
        Eigen::VectorXd d = x - cfg.sites[i];
        out.g += 2.0 * w * d;
        out.scale += 2.0 * std::abs(w) * std::sqrt(rho[i]);
        if (with_hessian)
            out.h += w * (2.0 * Eigen::MatrixXd::Identity(n, n) - 4.0 * (alpha + 1) / rho[i] * d * d.transpose());
    }
    return out;
}

enum class NewtonKind { converged, left_box, hit_site, stalled };

struct NewtonResult {
    NewtonKind kind;
    Point x;
    double rel = 0;
};

// Converged means a small relative gradient and a Newton step below
// 1e-9 * length; the second test keeps slow convergence near a degenerate
// point from producing a cloud of distinct "roots".
inline NewtonResult newton(const ChargeConfig& cfg, double alpha, Point x, const Box& box, const SolverOptions& opt,
                           double length)
{
    auto cur = scaled_derivatives(cfg, alpha, x, true);
    if (cur.at_site)
        return {NewtonKind::hit_site, x};
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        double rel = cur.g.norm() / cur.scale;
        Eigen::VectorXd step = -cur.h.fullPivLu().solve(cur.g);
        if (!step.allFinite())
            step = -cur.g; // singular Hessian, fall back to the gradient direction
        if (rel < opt.tolerance && step.norm() <= 1e-9 * length)
            return {NewtonKind::converged, x, rel};
        double t = 1.0;
        bool accepted = false, first_out = false;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            Point trial = x + t * step;
            if (!box.contains(trial)) {
                if (k == 0)
                    first_out = true;
                continue;
            }
            auto nd = scaled_derivatives(cfg, alpha, trial, true);
            if (nd.at_site)
                continue;
            double nrel = nd.g.norm() / nd.scale;
            if (nrel < rel * (1 - 1e-4 * t) || nrel < opt.tolerance) {
                x = trial;
                cur = std::move(nd);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            return {first_out ? NewtonKind::left_box : NewtonKind::stalled, x, rel};
    }
    double rel = cur.g.norm() / cur.scale;
    return {rel < opt.tolerance ? NewtonKind::converged : NewtonKind::stalled, x, rel};
}

inline bool lex_less(const Point& a, const Point& b)
{
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i])
            return a[i] < b[i];
    return false;
}

inline double diameter(const std::vector<Point>& pts)
{
    double d = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
}

// Whether every critical point is known to lie in the affine span of the sites.
inline bool critical_points_in_span(const ChargeConfig& cfg, const AffineSubspace& L)
{
    const auto codim = cfg.dimension() - L.dim();
    return cfg.same_sign() || codim == 0 || codim >= 2 || L.dim() == static_cast<Eigen::Index>(cfg.size()) - 1;
}

inline std::vector<Point> make_seeds(const ChargeConfig& w, const Box& box, std::size_t count,
                                     const SolverOptions& opt)
{
    std::vector<Point> seeds;
    const Eigen::Index d = w.dimension();
    if (opt.voronoi_seeds && d <= static_cast<Eigen::Index>(voronoi_max_dimension) &&
        w.size() <= voronoi_max_sites) {
        auto diagram = build_diagram(w.sites);
        for (const auto& cell : diagram.cells) {
            if (cell.nearest.size() < 2)
                continue;
            if (cell.witness) {
                Point p = to_point(*cell.witness);
                if (box.contains(p))
                    seeds.push_back(p);
            }
            Point s = to_point(cell.sample);
            if (box.contains(s))
                seeds.push_back(s);
        }
    }
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            seeds.push_back(0.5 * (w.sites[i] + w.sites[j]));
    std::mt19937_64 rng(opt.rng_seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Eigen::VectorXd shift(d);
    for (Eigen::Index k = 0; k < d; ++k)
        shift[k] = uni(rng);
    for (std::size_t i = 1; i <= count; ++i) {
        Point p(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            double u = halton(i, nth_prime(static_cast<std::size_t>(k))) + shift[k];
            u -= std::floor(u);
            p[k] = box.lo[k] + u * (box.hi[k] - box.lo[k]);
        }
        seeds.push_back(p);
    }
    return seeds;
}

inline SolveResult solve_once(const ChargeConfig& cfg, double alpha, const SolverOptions& opt, std::size_t seed_count)
{
    SolveResult res;
    AffineSubspace L = affine_span(cfg.sites);
    if (L.dim() == 0)
        return res; // one charge: the gradient never vanishes
    const bool in_span = critical_points_in_span(cfg, L) && L.dim() < cfg.dimension();
    ChargeConfig w = cfg;
    if (in_span) {
        w.sites.clear();
        for (const auto& c : cfg.sites)
            w.sites.push_back(L.coordinates(c));
    }
    res.stats.normalized = in_span;
    const double infl = cfg.same_sign() ? opt.box_inflation : opt.mixed_box_inflation;
    res.stats.box_inflation = infl;
    const double diam = diameter(w.sites);
    Box box{w.sites.front(), w.sites.front()};
    for (const auto& s : w.sites) {
        box.lo = box.lo.cwiseMin(s);
        box.hi = box.hi.cwiseMax(s);
    }
    box.lo.array() -= infl * diam;
    box.hi.array() += infl * diam;

    auto seeds = make_seeds(w, box, seed_count, opt);
    res.stats.seeds = seeds.size();
    std::vector<NewtonResult> outcomes(seeds.size(), NewtonResult{NewtonKind::stalled, Point()});
    parallel_for(seeds.size(), opt.jobs, [&](std::size_t i) { outcomes[i] = newton(w, alpha, seeds[i], box, opt, diam); });

    struct Candidate {
        Point x;
        double rel;
        std::size_t seed;
    };
    std::vector<Candidate> found;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        switch (outcomes[i].kind) {
        case NewtonKind::converged:
            ++res.stats.converged;
            found.push_back({outcomes[i].x, outcomes[i].rel, i});
            break;
        case NewtonKind::left_box: ++res.stats.left_box; break;
        case NewtonKind::hit_site: ++res.stats.hit_site; break;
        case NewtonKind::stalled: ++res.stats.stalled; break;
        }
    }
    std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
        if (lex_less(a.x, b.x))
            return true;
        if (lex_less(b.x, a.x))
            return false;
        return a.seed < b.seed;
    });
    const double radius = opt.merge_radius * diam;
    std::vector<Candidate> kept;
    for (auto& c : found) {
        bool merged = false;
        for (auto& k : kept)
            if ((k.x - c.x).norm() <= radius) {
                if (c.rel < k.rel)
                    k = c;
                merged = true;
                break;
            }
        if (!merged)
            kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) { return lex_less(a.x, b.x); });

    const Exponent a(alpha);
    for (const auto& c : kept) {
        CriticalPoint cp;
        cp.location = in_span ? L.from_coordinates(c.x) : c.x;
        cp.basin_seed = c.seed;
        Eigen::VectorXd g = gradient(cfg, a, cp.location);
        auto sd = scaled_derivatives(cfg, alpha, cp.location, false);
        cp.residual = g.norm();
        cp.relative_residual = sd.g.norm() / sd.scale;
        auto h = classify_hessian(hessian_matrix(cfg, a, cp.location), hessian_scale(cfg, a, cp.location));
        cp.morse_index = h.morse_index;
        cp.degenerate = h.degenerate();
        cp.eigenvalues = h.eigenvalues;
        res.points.push_back(std::move(cp));
    }
    // Near a degenerate point the gradient is flat to rounding over a small
    // ball; fold everything in that ball into one degenerate entry.
    const double flat_radius = 1e-4 * diam;
    std::vector<CriticalPoint> folded;
    std::vector<bool> absorbed(res.points.size(), false);
    for (std::size_t i = 0; i < res.points.size(); ++i) {
        if (!res.points[i].degenerate || absorbed[i])
            continue;
        for (std::size_t j = 0; j < res.points.size(); ++j)
            if (j != i && (res.points[j].location - res.points[i].location).norm() <= flat_radius)
                absorbed[j] = true;
    }
    for (std::size_t i = 0; i < res.points.size(); ++i)
        if (!absorbed[i])
            folded.push_back(std::move(res.points[i]));
    res.points = std::move(folded);
    res.census = census_of(res.points);
    return res;
}

} // namespace detail

/// Deduplicated, lexicographically ordered critical points.  When all charges
/// share a sign the index-sum identity is checked and the search is rerun with
/// 4x and 16x the seeds if it fails.
inline SolveResult find_critical_points(const ChargeConfig& cfg, const Exponent& a, const SolverOptions& opt = {})
{
    cfg.validate();
    if (a.alpha <= 0)
        throw Error(Errc::invalid_argument, "critical points need alpha > 0");
    std::size_t count = opt.seeds ? opt.seeds : 64 * cfg.size();
    SolveResult res;
    for (unsigned attempt = 0; attempt <= opt.retries; ++attempt, count *= 4) {
        res = detail::solve_once(cfg, a.alpha, opt, count);
        res.stats.attempts = attempt + 1;
        res.identity.reset();
        if (res.census.degenerate == 0 && cfg.total_charge() != 0)
            res.identity = census_identities(res.census, cfg, a.alpha);
        if (!cfg.same_sign() || res.complete())
            break;
    }
    return res;
}

struct Count1DExact {
    int count = 0;
    int degree = 0;         ///< degree of the cleared numerator
    int nominal_degree = 0; ///< 2(alpha+1)(l-1)+1
    bool repeated_roots = false;
    RationalPolynomial polynomial; ///< after removing factors at on-line sites
};

inline void require_line(const RestrictedConfig& r)
{
    if (r.dimension() != 1)
        throw Error(Errc::dimension_mismatch, "one-dimensional counting needs a line");
    if (r.size() == 0)
        throw Error(Errc::invalid_argument, "empty configuration");
}

/// Distinct real zeros of d/dx of the restricted potential, by Sturm sequences
/// on the cleared numerator.  Binary64 data are snapped to rationals.
/// With `window`, only zeros in (lo, hi] are counted.
inline Count1DExact count_1d_exact(const RestrictedConfig& r, const Exponent& a,
                                   std::optional<std::pair<double, double>> window = std::nullopt)
{
    require_line(r);
    if (!a.is_integer() || a.alpha < 1)
        throw Error(Errc::non_integer_alpha, "exact counting needs a positive integer alpha");
    const auto k = static_cast<unsigned>(a.alpha) + 1;
    const std::size_t l = r.size();
    std::vector<Rational> xs(l), ys(l), zs(l);
    for (std::size_t i = 0; i < l; ++i) {
        xs[i] = snap_to_rational(r.projected_sites[i][0]);
        ys[i] = snap_to_rational(r.offsets_sq[i]);
        zs[i] = snap_to_rational(r.values[i]);
    }
    const auto X = RationalPolynomial::x();
    std::vector<RationalPolynomial> powered(l);
    for (std::size_t i = 0; i < l; ++i)
        powered[i] = ((X - xs[i]) * (X - xs[i]) + ys[i]).pow(k);
    RationalPolynomial p;
    for (std::size_t i = 0; i < l; ++i) {
        RationalPolynomial term = (X - xs[i]) * zs[i];
        for (std::size_t j = 0; j < l; ++j)
            if (j != i)
                term *= powered[j];
        p += term;
    }
    Count1DExact out;
    out.degree = p.degree();
    out.nominal_degree = static_cast<int>(2 * k * (l - 1) + 1);
    if (p.is_zero())
        throw Error(Errc::zero_polynomial, "derivative vanishes identically");
    for (std::size_t j = 0; j < l; ++j)
        if (ys[j] == 0) {
            auto [q, rem] = p.divmod(X - xs[j]);
            if (!rem.is_zero())
                throw Error(Errc::identity_violation, "missing factor at an on-line site");
            p = q;
        }
    out.polynomial = p;
    auto g = gcd(p, p.derivative());
    out.repeated_roots = g.degree() > 0;
    auto sq = out.repeated_roots ? p.divmod(g).first : p;
    SturmSequence s(sq);
    out.count = window ? s.count(Rational(window->first), Rational(window->second)) : s.count_real();
    return out;
}

struct RootBracket {
    double lo, hi;
    int index; ///< 0 local minimum, 1 local maximum of the restricted potential
};

struct Count1DCertified {
    int count = 0;
    std::vector<RootBracket> roots;
    std::vector<std::pair<double, double>> unresolved;
    double search_lo = 0, search_hi = 0;
    bool resolved() const { return unresolved.empty(); }
};

namespace detail {

// D(x) = sum zeta (x - x_i) rho_i^{-alpha-1} and D'(x), each up to a positive factor.
struct LineData {
    std::vector<double> x, y2, z;
    double alpha;
};

inline Interval enclose_d(const LineData& d, const Interval& X, bool derivative)
{
    const std::size_t l = d.x.size();
    const double p = d.alpha + (derivative ? 2.0 : 1.0);
    std::vector<Interval> logs(l);
    std::vector<Interval> dx(l), dx2(l);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l; ++i) {
        dx[i] = X - Interval(d.x[i]);
        dx2[i] = sqr(dx[i]);
        Interval rho = dx2[i] + Interval(d.y2[i]);
        if (rho.lo() <= 0)
            return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        logs[i] = log(Interval(std::abs(d.z[i]))) - Interval(p) * log(rho);
        m = std::max(m, logs[i].hi());
    }
    Interval s(0.0);
    for (std::size_t i = 0; i < l; ++i) {
        Interval mag = exp(logs[i] - Interval(m));
        Interval shape = derivative ? Interval(d.y2[i]) - Interval(2 * d.alpha + 1) * dx2[i] : dx[i];
        Interval t = mag * shape;
        s += d.z[i] > 0 ? t : -t;
    }
    return s;
}

enum class LeafKind { nonzero, monotone, unresolved };

struct Leaf {
    double lo, hi;
    LeafKind kind;
    int sign; ///< sign of D (nonzero) or D' (monotone)
};

inline void subdivide(const LineData& d, double lo, double hi, double floor_width, std::vector<Leaf>& out)
{
    Interval X(lo, hi);
    Interval v = enclose_d(d, X, false);
    if (v.sign() != 0) {
        out.push_back({lo, hi, LeafKind::nonzero, v.sign()});
        return;
    }
    Interval dv = enclose_d(d, X, true);
    if (dv.sign() != 0) {
        out.push_back({lo, hi, LeafKind::monotone, dv.sign()});
        return;
    }
    if (hi - lo <= floor_width) {
        out.push_back({lo, hi, LeafKind::unresolved, 0});
        return;
    }
    // Split slightly off center so symmetric roots do not land on a cut.
    double mid = lo + (hi - lo) * 0.4990234375;
    subdivide(d, lo, mid, floor_width, out);
    subdivide(d, mid, hi, floor_width, out);
}

inline int point_sign(const LineData& d, double x) { return enclose_d(d, Interval(x), false).sign(); }

} // namespace detail

/// Isolates zeros of d/dx of the restricted potential on the site hull widened
/// by 10% of its length (or the explicit window), using interval enclosures.
inline Count1DCertified count_1d_certified(const RestrictedConfig& r, const Exponent& a,
                                           std::optional<std::pair<double, double>> window = std::nullopt)
{
    require_line(r);
    if (a.alpha <= 0)
        throw Error(Errc::invalid_argument, "certified counting needs alpha > 0");
    detail::LineData d;
    d.alpha = a.alpha;
    for (std::size_t i = 0; i < r.size(); ++i) {
        d.x.push_back(r.projected_sites[i][0]);
        d.y2.push_back(r.offsets_sq[i]);
        d.z.push_back(r.values[i]);
    }
    Count1DCertified out;
    if (window) {
        out.search_lo = window->first;
        out.search_hi = window->second;
    } else {
        double lo = *std::min_element(d.x.begin(), d.x.end());
        double hi = *std::max_element(d.x.begin(), d.x.end());
        double pad = 0.1 * (hi - lo);
        if (pad == 0)
            pad = 0.1 * std::max(1.0, std::sqrt(*std::max_element(d.y2.begin(), d.y2.end())));
        out.search_lo = lo - pad;
        out.search_hi = hi + pad;
    }
    const double floor_width = 1e-12 * (out.search_hi - out.search_lo);

    // Cut at on-line sites (poles), then subdivide each piece.
    std::vector<double> cuts{out.search_lo};
    for (std::size_t i = 0; i < d.x.size(); ++i)
        if (d.y2[i] == 0 && d.x[i] > out.search_lo && d.x[i] < out.search_hi)
            cuts.push_back(d.x[i]);
    cuts.push_back(out.search_hi);
    std::sort(cuts.begin(), cuts.end());

    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        double lo = cuts[piece], hi = cuts[piece + 1];
        const bool lo_pole = piece > 0, hi_pole = piece + 2 < cuts.size();
        // Keep away from poles: the potential blows up and D changes sign there.
        if (lo_pole)
            lo = std::nextafter(lo, hi) + 1e-9 * (hi - lo);
        if (hi_pole)
            hi = std::nextafter(hi, lo) - 1e-9 * (hi - lo);
        std::vector<detail::Leaf> leaves;
        detail::subdivide(d, lo, hi, floor_width, leaves);
        for (std::size_t i = 0; i < leaves.size();) {
            const auto& leaf = leaves[i];
            if (leaf.kind == detail::LeafKind::nonzero) {
                ++i;
                continue;
            }
            if (leaf.kind == detail::LeafKind::unresolved) {
                out.unresolved.emplace_back(leaf.lo, leaf.hi);
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < leaves.size() && leaves[j + 1].kind == detail::LeafKind::monotone &&
                   leaves[j + 1].sign == leaf.sign)
                ++j;
            double a0 = leaves[i].lo, b0 = leaves[j].hi;
            int sa = detail::point_sign(d, a0), sb = detail::point_sign(d, b0);
            if (sa == 0 || sb == 0)
                out.unresolved.emplace_back(a0, b0);
            else if (sa != sb) {
                // Narrow the bracket around the single zero of the run.
                double lo_r = a0, hi_r = b0;
                for (int it = 0; it < 60 && hi_r - lo_r > floor_width; ++it) {
                    double m = 0.5 * (lo_r + hi_r);
                    int sm = detail::point_sign(d, m);
                    if (sm == 0)
                        break;
                    (sm == sa ? lo_r : hi_r) = m;
                }
                // D rising through zero means V' = -2 alpha D falls: a maximum.
                out.roots.push_back({lo_r, hi_r, sa < 0 ? 1 : 0});
            }
            i = j + 1;
        }
    }
    out.count = static_cast<int>(out.roots.size());
    return out;
}

struct SweepRecord {
    double alpha = 0;
    MorseCensus census;
    std::size_t effective_total = 0;
    bool effective_available = false;
    bool matches_effective = false;
    bool ok = true;
    std::string error;
};

namespace detail {

inline bool census_matches(const MorseCensus& m, const EffectiveCensus& e)
{
    if (m.total != e.total || m.degenerate != 0)
        return false;
    for (auto [dim, c] : e.counts_by_dim)
        if (m.at(static_cast<int>(dim)) != c)
            return false;
    return true;
}

} // namespace detail

/// Effective census of an ambient configuration, with cells in the span of the
/// sites lifted by the codimension (each transversal direction adds one).
inline EffectiveCensus ambient_effective_census(const ChargeConfig& cfg)
{
    auto [w, L] = normalize_dimension(cfg);
    auto e = effective_census(build_diagram(w.sites));
    if (L.dim() == cfg.dimension())
        return e;
    const auto shift = static_cast<std::size_t>(cfg.dimension() - affine_span(cfg.sites).dim());
    EffectiveCensus lifted;
    lifted.total = e.total;
    lifted.unclassified = e.unclassified;
    for (auto [dim, c] : e.counts_by_dim)
        lifted.counts_by_dim[dim + shift] = c;
    return lifted;
}

inline std::vector<SweepRecord> alpha_sweep(const ChargeConfig& cfg, const std::vector<double>& alphas,
                                            const SolverOptions& opt = {})
{
    if (!std::is_sorted(alphas.begin(), alphas.end()))
        throw Error(Errc::invalid_argument, "alphas must be sorted ascending");
    std::optional<EffectiveCensus> eff;
    if (cfg.all_positive() && affine_span(cfg.sites).dim() <= static_cast<Eigen::Index>(voronoi_max_dimension) &&
        cfg.size() <= voronoi_max_sites)
        eff = ambient_effective_census(cfg);
    std::vector<SweepRecord> out(alphas.size());
    SolverOptions inner = opt;
    inner.jobs = 1;
    parallel_for(alphas.size(), opt.jobs, [&](std::size_t i) {
        SweepRecord& rec = out[i];
        rec.alpha = alphas[i];
        try {
            auto res = find_critical_points(cfg, Exponent(alphas[i]), inner);
            rec.census = res.census;
            rec.ok = res.complete();
            if (!rec.ok)
                rec.error = "index-sum identity failed or degenerate points present";
        } catch (const Error& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        if (eff) {
            rec.effective_available = true;
            rec.effective_total = eff->total;
            rec.matches_effective = rec.ok && detail::census_matches(rec.census, *eff);
        }
    });
    return out;
}

/// One-dimensional sweep with certified counts; indices come from the sign of D'.
inline std::vector<SweepRecord> alpha_sweep(const RestrictedConfig& r, const std::vector<double>& alphas,
                                            unsigned jobs = 1)
{
    require_line(r);
    if (!std::is_sorted(alphas.begin(), alphas.end()))
        throw Error(Errc::invalid_argument, "alphas must be sorted ascending");
    std::optional<EffectiveCensus> eff;
    bool positive = std::all_of(r.values.begin(), r.values.end(), [](double z) { return z > 0; });
    if (positive && r.size() <= voronoi_max_sites) {
        std::vector<Point> ambient;
        for (std::size_t i = 0; i < r.size(); ++i) {
            Point p(2);
            p << r.projected_sites[i][0], std::sqrt(r.offsets_sq[i]);
            ambient.push_back(p);
        }
        AffineSubspace line{Point::Zero(2), Eigen::MatrixXd(Eigen::Vector2d(1, 0))};
        eff = effective_census(ambient, line);
    }
    std::vector<SweepRecord> out(alphas.size());
    parallel_for(alphas.size(), jobs, [&](std::size_t i) {
        SweepRecord& rec = out[i];
        rec.alpha = alphas[i];
        try {
            auto c = count_1d_certified(r, Exponent(alphas[i]));
            for (const auto& root : c.roots)
                rec.census.add(root.index);
            rec.ok = c.resolved();
            if (!rec.ok)
                rec.error = "unresolved intervals remain";
        } catch (const Error& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        if (eff) {
            rec.effective_available = true;
            rec.effective_total = eff->total;
            rec.matches_effective = rec.ok && detail::census_matches(rec.census, *eff);
        }
    });
    return out;
}

struct MaxwellReport {
    std::size_t total = 0;
    std::size_t bound = 0; ///< (l-1)^2
    bool exceeds_bound = false;
    bool effective_available = false;
    EffectiveCensus effective;
    std::vector<std::string> violations; ///< a^j > #^j per index
    bool counterexample() const { return exceeds_bound || !violations.empty(); }
};

inline MaxwellReport maxwell_check(const ChargeConfig& cfg, const Exponent& a, const SolveResult& solved)
{
    (void)a;
    MaxwellReport r;
    r.total = solved.census.total + solved.census.degenerate;
    r.bound = (cfg.size() - 1) * (cfg.size() - 1);
    r.exceeds_bound = r.total > r.bound;
    if (cfg.all_positive() && affine_span(cfg.sites).dim() <= static_cast<Eigen::Index>(voronoi_max_dimension) &&
        cfg.size() <= voronoi_max_sites) {
        r.effective_available = true;
        r.effective = ambient_effective_census(cfg);
        for (auto [j, c] : solved.census.counts) {
            std::size_t cap = r.effective.at(static_cast<std::size_t>(j));
            if (c > cap)
                r.violations.push_back("index " + std::to_string(j) + ": " + std::to_string(c) + " critical points > " +
                                       std::to_string(cap) + " effective cells");
        }
    }
    return r;
}

inline MaxwellReport maxwell_check(const ChargeConfig& cfg, const Exponent& a, const SolverOptions& opt = {})
{
    return maxwell_check(cfg, a, find_critical_points(cfg, a, opt));
}

} // namespace equilibria
