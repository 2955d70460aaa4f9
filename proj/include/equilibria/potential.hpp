#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "equilibria/error.hpp"
#include "equilibria/geometry.hpp"

namespace equilibria {

inline constexpr double at_site_cutoff = 1e-14;

struct ChargeConfig {
    std::vector<Point> sites;
    std::vector<double> values;

    ChargeConfig() = default;
    ChargeConfig(std::vector<Point> s, std::vector<double> v) : sites(std::move(s)), values(std::move(v))
    {
        validate();
    }

    std::size_t size() const { return sites.size(); }
    Eigen::Index dimension() const { return sites.empty() ? 0 : sites.front().size(); }
    bool all_positive() const
    {
        return std::all_of(values.begin(), values.end(), [](double z) { return z > 0; });
    }
    bool same_sign() const
    {
        return all_positive() || std::all_of(values.begin(), values.end(), [](double z) { return z < 0; });
    }
    double total_charge() const
    {
        double s = 0;
        for (double z : values)
            s += z;
        return s;
    }

    void validate() const
    {
        if (sites.empty())
            throw Error(Errc::invalid_argument, "configuration needs at least one charge");
        if (sites.size() != values.size())
            throw Error(Errc::dimension_mismatch, "number of sites and charge values differ");
        for (std::size_t i = 0; i < sites.size(); ++i) {
            if (sites[i].size() != sites.front().size() || sites[i].size() < 1)
                throw Error(Errc::dimension_mismatch, "sites must share a dimension n >= 1");
            if (!sites[i].allFinite() || !std::isfinite(values[i]))
                throw Error(Errc::invalid_argument, "non-finite site or charge");
            if (values[i] == 0.0)
                throw Error(Errc::invalid_argument, "charge " + std::to_string(i) + " is zero");
            for (std::size_t j = 0; j < i; ++j)
                if ((sites[i] - sites[j]).squaredNorm() == 0.0)
                    throw Error(Errc::duplicate_sites,
                                "sites " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
        }
    }
};

struct Exponent {
    double alpha = 1.0;
    std::optional<std::pair<std::int64_t, std::int64_t>> rational_form;

    Exponent() = default;
    Exponent(double a) : alpha(a) // NOLINT: implicit by design
    {
        if (!(a >= 0) || !std::isfinite(a))
            throw Error(Errc::invalid_argument, "alpha must be a finite value >= 0");
    }
    static Exponent ratio(std::int64_t p, std::int64_t q)
    {
        if (q <= 0 || p < 0)
            throw Error(Errc::invalid_argument, "alpha = p/q needs p >= 0, q > 0");
        Exponent e(static_cast<double>(p) / static_cast<double>(q));
        e.rational_form = {{p, q}};
        return e;
    }

    bool is_integer() const { return alpha == std::floor(alpha); }
    Rational exact() const
    {
        if (rational_form)
            return Rational(rational_form->first) / Rational(rational_form->second);
        return snap_to_rational(alpha);
    }
};

inline std::vector<double> squared_distances(const ChargeConfig& cfg, const Point& x)
{
    std::vector<double> rho(cfg.size());
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        check_dims(cfg.sites[i], x);
        rho[i] = (x - cfg.sites[i]).squaredNorm();
        if (rho[i] < at_site_cutoff)
            throw Error(Errc::at_site, "evaluation point coincides with site " + std::to_string(i));
    }
    return rho;
}

inline double eval_potential(const ChargeConfig& cfg, const Exponent& a, const Point& x)
{
    auto rho = squared_distances(cfg, x);
    double v = 0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        v += cfg.values[i] * std::exp(-a.alpha * std::log(rho[i]));
    return v;
}

inline Eigen::VectorXd gradient(const ChargeConfig& cfg, const Exponent& a, const Point& x)
{
    auto rho = squared_distances(cfg, x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
        g += (-a.alpha * cfg.values[i] * std::exp(-(a.alpha + 1) * std::log(rho[i]))) * 2.0 * (x - cfg.sites[i]);
    return g;
}

inline Eigen::MatrixXd hessian_matrix(const ChargeConfig& cfg, const Exponent& a, const Point& x)
{
    auto rho = squared_distances(cfg, x);
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        Eigen::VectorXd d = x - cfg.sites[i];
        double w = a.alpha * cfg.values[i] * std::exp(-(a.alpha + 1) * std::log(rho[i]));
        h += w * (4.0 * (a.alpha + 1) / rho[i] * d * d.transpose() - 2.0 * Eigen::MatrixXd::Identity(n, n));
    }
    return h;
}

/// Quadratic form of the Hessian evaluated term by term on xi.
inline double hessian_form(const ChargeConfig& cfg, const Exponent& a, const Point& x, const Eigen::VectorXd& xi)
{
    auto rho = squared_distances(cfg, x);
    double s = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double grad_dot = 2.0 * (x - cfg.sites[i]).dot(xi);
        s += cfg.values[i] * std::pow(rho[i], -a.alpha - 2) *
             (grad_dot * grad_dot - 2.0 / (a.alpha + 1) * rho[i] * xi.squaredNorm());
    }
    return a.alpha * (a.alpha + 1) * s;
}

inline constexpr double degenerate_eigen_threshold = 1e-8;

struct HessianReport {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues;
    int negative = 0, zero = 0, positive = 0;
    int morse_index = 0;
    bool degenerate() const { return zero > 0; }
};

/// Zero eigenvalues are those below 1e-8 * max|lambda|; `floor_scale`, when
/// given, raises the reference so that a Hessian which is small everywhere
/// (as at a degenerate point) is not read as nondegenerate.
inline HessianReport classify_hessian(Eigen::MatrixXd m, double floor_scale = 0.0)
{
    HessianReport r;
    r.matrix = std::move(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.matrix, Eigen::EigenvaluesOnly);
    r.eigenvalues = es.eigenvalues();
    const double scale =
        std::max(floor_scale, r.eigenvalues.size() ? r.eigenvalues.cwiseAbs().maxCoeff() : 0.0);
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
        double l = r.eigenvalues[i];
        if (std::abs(l) <= degenerate_eigen_threshold * scale)
            ++r.zero;
        else if (l < 0)
            ++r.negative;
        else
            ++r.positive;
    }
    r.morse_index = r.negative;
    return r;
}

/// Size of the individual Hessian terms: alpha sum |zeta| rho^{-alpha-1} (4 alpha + 6).
inline double hessian_scale(const ChargeConfig& cfg, const Exponent& a, const Point& x)
{
    auto rho = squared_distances(cfg, x);
    double s = 0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        s += std::abs(cfg.values[i]) * std::exp(-(a.alpha + 1) * std::log(rho[i]));
    return a.alpha * (4 * a.alpha + 6) * s;
}

inline HessianReport hessian(const ChargeConfig& cfg, const Exponent& a, const Point& x)
{
    return classify_hessian(hessian_matrix(cfg, a, x));
}

inline double v_infinity(const ChargeConfig& cfg, const Point& x)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cfg.sites) {
        check_dims(c, x);
        best = std::min(best, (x - c).squaredNorm());
    }
    return best;
}

/// Sites expressed in intrinsic coordinates of L, plus squared offsets from L.
struct RestrictedConfig {
    std::vector<Point> projected_sites;
    std::vector<double> offsets_sq;
    std::vector<double> values;
    AffineSubspace subspace;

    std::size_t size() const { return values.size(); }
    Eigen::Index dimension() const { return subspace.dim(); }
};

inline RestrictedConfig restrict_to(const ChargeConfig& cfg, const AffineSubspace& L)
{
    if (L.ambient() != cfg.dimension())
        throw Error(Errc::dimension_mismatch, "subspace and configuration live in different spaces");
    if (L.dim() < 1)
        throw Error(Errc::dimension_mismatch, "restriction needs a subspace of dimension >= 1");
    RestrictedConfig r;
    r.subspace = L;
    r.values = cfg.values;
    for (const auto& c : cfg.sites) {
        Point t = L.coordinates(c);
        r.projected_sites.push_back(t);
        r.offsets_sq.push_back(std::max(0.0, (c - L.from_coordinates(t)).squaredNorm()));
    }
    return r;
}

/// V restricted to L, as a function of intrinsic coordinates t.
inline double eval_restricted(const RestrictedConfig& r, const Exponent& a, const Point& t)
{
    double v = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double rho = (t - r.projected_sites[i]).squaredNorm() + r.offsets_sq[i];
        if (rho < at_site_cutoff)
            throw Error(Errc::at_site, "evaluation point coincides with site " + std::to_string(i));
        v += r.values[i] * std::exp(-a.alpha * std::log(rho));
    }
    return v;
}

/// Re-expresses the configuration in coordinates of its affine span.
inline std::pair<ChargeConfig, AffineSubspace> normalize_dimension(const ChargeConfig& cfg)
{
    AffineSubspace L = affine_span(cfg.sites);
    if (L.dim() == cfg.dimension())
        return {cfg, AffineSubspace::whole(cfg.dimension())};
    ChargeConfig out;
    out.values = cfg.values;
    if (L.dim() == 0) {
        // Single site: keep one coordinate so the point type stays nonempty.
        out.sites.push_back(Point::Zero(1));
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(cfg.dimension(), 1);
        b(0, 0) = 1.0;
        return {out, AffineSubspace{L.base, b}};
    }
    for (const auto& c : cfg.sites)
        out.sites.push_back(L.coordinates(c));
    return {out, L};
}

} // namespace equilibria
