#pragma once

// Run configuration, result records and the per-mode drivers behind the
// equilibria tool.  Records are JSON Lines; grids are CSV.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "equilibria/bounds.hpp"
#include "equilibria/error.hpp"
#include "equilibria/potential.hpp"
#include "equilibria/solver.hpp"
#include "equilibria/threecharge.hpp"
#include "equilibria/voronoi.hpp"

namespace equilibria::cli {

using json = nlohmann::json;

enum class Mode { solve, sweep, voronoi, bounds, three, grid };

inline const char* to_string(Mode m)
{
    switch (m) {
    case Mode::solve: return "solve";
    case Mode::sweep: return "sweep";
    case Mode::voronoi: return "voronoi";
    case Mode::bounds: return "bounds";
    case Mode::three: return "three";
    case Mode::grid: return "grid";
    }
    return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s)
{
    for (Mode m : {Mode::solve, Mode::sweep, Mode::voronoi, Mode::bounds, Mode::three, Mode::grid})
        if (s == to_string(m))
            return m;
    return std::nullopt;
}

enum ExitCode { exit_ok = 0, exit_validation = 2, exit_numerical = 3 };

struct Limits {
    std::size_t seeds = 0; ///< 0: 64 per charge
    double tolerance = 1e-10;
    std::size_t max_iterations = 200;
    unsigned retries = 2;
    int gamma_resolution = 2048;
};

struct Window {
    double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
};

struct RunConfig {
    Mode mode = Mode::solve;
    std::vector<Point> sites;
    std::vector<double> charges;
    std::vector<Exponent> alphas;
    std::optional<AffineSubspace> subspace;
    std::optional<json> subspace_json; ///< as written, echoed into records
    std::uint64_t seed = 0;
    Limits limits;
    bool exact = false;
    long l = 0; ///< bounds mode; 0 means the number of sites (or 3)
    std::optional<ThreeChargeParams> three;
    Window window;
    int nx = 256, ny = 256;
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& what) { throw Error(Errc::validation, what); }

inline double number(const json& j, const std::string& what)
{
    if (!j.is_number())
        invalid(what + " must be a number");
    return j.get<double>();
}

// "p/q" strings give exact rationals; numbers are snapped.
inline Rational rational_value(const json& j, const std::string& what)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        try {
            return Rational(s);
        } catch (const std::exception&) {
            invalid(what + ": cannot read '" + s + "' as a rational");
        }
    }
    return snap_to_rational(number(j, what));
}

inline Exponent exponent_value(const json& j)
{
    if (j.is_string()) {
        Rational r = rational_value(j, "alpha");
        if (r < 0)
            invalid("alpha must be >= 0");
        auto num = boost::multiprecision::numerator(r), den = boost::multiprecision::denominator(r);
        if (num > INT64_MAX || den > INT64_MAX)
            invalid("alpha numerator/denominator too large");
        return Exponent::ratio(num.convert_to<std::int64_t>(), den.convert_to<std::int64_t>());
    }
    double a = number(j, "alpha");
    if (!(a >= 0))
        invalid("alpha must be >= 0");
    return Exponent(a);
}

inline json exponent_json(const Exponent& e)
{
    if (e.rational_form)
        return std::to_string(e.rational_form->first) + "/" + std::to_string(e.rational_form->second);
    return e.alpha;
}

inline Point point_value(const json& j, const std::string& what)
{
    if (!j.is_array() || j.empty())
        invalid(what + " must be a nonempty array of numbers");
    Point p(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        p[static_cast<Eigen::Index>(i)] = number(j[i], what);
    return p;
}

inline json point_json(const Point& p)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i)
        a.push_back(p[i]);
    return a;
}

inline std::uint64_t fnv1a64(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

/// Reads a RunConfig; `mode_override` (from the command line) wins over the
/// file, but a contradicting "mode" field is rejected.
inline RunConfig parse_config(const json& j, std::optional<Mode> mode_override = std::nullopt)
{
    using detail::invalid;
    if (!j.is_object())
        invalid("configuration must be a JSON object");
    static const std::vector<std::string> known{"mode",  "sites",  "charges",   "alpha",      "alphas",
                                                "subspace", "seed", "limits",   "exact",      "l",
                                                "three", "window", "resolution"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            invalid("unknown configuration field '" + k + "'");

    RunConfig c;
    if (j.contains("mode")) {
        if (!j["mode"].is_string() || !parse_mode(j["mode"].get<std::string>()))
            invalid("mode must be one of solve, sweep, voronoi, bounds, three, grid");
        c.mode = *parse_mode(j["mode"].get<std::string>());
        if (mode_override && *mode_override != c.mode)
            invalid(std::string("command line mode '") + to_string(*mode_override) + "' contradicts config mode '" +
                    to_string(c.mode) + "'");
    } else if (mode_override) {
        c.mode = *mode_override;
    } else {
        invalid("no mode given");
    }
    if (mode_override)
        c.mode = *mode_override;

    if (j.contains("sites")) {
        if (!j["sites"].is_array())
            invalid("sites must be an array of coordinate arrays");
        for (std::size_t i = 0; i < j["sites"].size(); ++i)
            c.sites.push_back(detail::point_value(j["sites"][i], "site " + std::to_string(i)));
    }
    if (j.contains("charges")) {
        if (!j["charges"].is_array())
            invalid("charges must be an array of numbers");
        for (const auto& z : j["charges"])
            c.charges.push_back(detail::number(z, "charge"));
    }
    const bool need_charges = c.mode == Mode::solve || c.mode == Mode::sweep || c.mode == Mode::grid;
    if (need_charges || c.mode == Mode::voronoi) {
        if (c.sites.empty())
            invalid("sites are required in this mode");
        if (c.charges.empty())
            c.charges.assign(c.sites.size(), 1.0);
        try {
            (void)ChargeConfig(c.sites, c.charges);
        } catch (const Error& e) {
            invalid(e.what());
        }
    }

    if (j.contains("alpha") && j.contains("alphas"))
        invalid("give either alpha or alphas, not both");
    if (j.contains("alpha"))
        c.alphas.push_back(detail::exponent_value(j["alpha"]));
    if (j.contains("alphas")) {
        const json& a = j["alphas"];
        if (a.is_array()) {
            for (const auto& v : a)
                c.alphas.push_back(detail::exponent_value(v));
        } else if (a.is_object()) {
            if (!a.contains("from") || !a.contains("to") || !a.contains("step"))
                invalid("an alpha range needs from, to and step");
            double from = detail::number(a["from"], "alphas.from"), to = detail::number(a["to"], "alphas.to"),
                   step = detail::number(a["step"], "alphas.step");
            if (!(step > 0) || to < from)
                invalid("alpha range needs step > 0 and to >= from");
            const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
            if (n > 100000)
                invalid("alpha range has too many values");
            for (std::size_t i = 0; i < n; ++i)
                c.alphas.push_back(Exponent(from + static_cast<double>(i) * step));
        } else {
            invalid("alphas must be an array or a {from, to, step} range");
        }
    }
    if (c.mode == Mode::sweep && c.alphas.empty())
        invalid("sweep mode needs a nonempty alphas list");
    if ((c.mode == Mode::solve || c.mode == Mode::grid) && c.alphas.empty())
        c.alphas.push_back(Exponent(1.0));
    for (const auto& a : c.alphas)
        if ((c.mode == Mode::solve || c.mode == Mode::sweep) && a.alpha <= 0)
            invalid("alpha must be > 0 for critical point computations");

    if (j.contains("subspace")) {
        const json& s = j["subspace"];
        if (!s.is_object() || !s.contains("base") || !s.contains("directions") || !s["directions"].is_array())
            invalid("subspace needs base and directions");
        Point base = detail::point_value(s["base"], "subspace.base");
        Eigen::MatrixXd dirs(base.size(), static_cast<Eigen::Index>(s["directions"].size()));
        for (std::size_t k = 0; k < s["directions"].size(); ++k) {
            Point d = detail::point_value(s["directions"][k], "subspace direction");
            if (d.size() != base.size())
                invalid("subspace direction has the wrong dimension");
            dirs.col(static_cast<Eigen::Index>(k)) = d;
        }
        c.subspace = AffineSubspace::from_directions(base, dirs);
        if (c.subspace->dim() == 0)
            invalid("subspace directions are all zero");
        if (!c.sites.empty() && c.sites.front().size() != base.size())
            invalid("subspace and sites live in different dimensions");
        c.subspace_json = s;
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            invalid("seed must be an unsigned integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("limits")) {
        const json& L = j["limits"];
        if (!L.is_object())
            invalid("limits must be an object");
        for (const auto& [k, v] : L.items()) {
            if (k == "seeds")
                c.limits.seeds = static_cast<std::size_t>(detail::number(v, k));
            else if (k == "tolerance")
                c.limits.tolerance = detail::number(v, k);
            else if (k == "max_iterations")
                c.limits.max_iterations = static_cast<std::size_t>(detail::number(v, k));
            else if (k == "retries")
                c.limits.retries = static_cast<unsigned>(detail::number(v, k));
            else if (k == "gamma_resolution")
                c.limits.gamma_resolution = static_cast<int>(detail::number(v, k));
            else
                invalid("unknown limit '" + k + "'");
        }
        if (!(c.limits.tolerance > 0) || c.limits.max_iterations == 0)
            invalid("tolerance and max_iterations must be positive");
    }
    if (j.contains("exact")) {
        if (!j["exact"].is_boolean())
            invalid("exact must be true or false");
        c.exact = j["exact"].get<bool>();
    }
    if (j.contains("l")) {
        if (!j["l"].is_number_integer() || j["l"].get<long>() < 2)
            invalid("l must be an integer >= 2");
        c.l = j["l"].get<long>();
    }
    if (j.contains("three")) {
        const json& t = j["three"];
        if (!t.is_object())
            invalid("three must be an object with zeta1, zeta2, a, b, alpha");
        ThreeChargeParams p;
        for (const char* key : {"zeta1", "zeta2", "a", "b", "alpha"})
            if (!t.contains(key))
                invalid(std::string("three.") + key + " is missing");
        p.zeta1 = detail::rational_value(t["zeta1"], "three.zeta1");
        p.zeta2 = detail::rational_value(t["zeta2"], "three.zeta2");
        p.a = detail::rational_value(t["a"], "three.a");
        p.b = detail::rational_value(t["b"], "three.b");
        p.alpha = detail::rational_value(t["alpha"], "three.alpha");
        try {
            p.validate();
        } catch (const Error& e) {
            invalid(e.what());
        }
        c.three = p;
    }
    if (c.mode == Mode::three && !c.three)
        invalid("three mode needs a 'three' parameter object");
    if (j.contains("window")) {
        const json& w = j["window"];
        if (!w.is_object() || !w.contains("x") || !w.contains("y") || w["x"].size() != 2 || w["y"].size() != 2)
            invalid("window must be {\"x\": [lo, hi], \"y\": [lo, hi]}");
        c.window = {detail::number(w["x"][0], "window"), detail::number(w["x"][1], "window"),
                    detail::number(w["y"][0], "window"), detail::number(w["y"][1], "window")};
        if (!(c.window.xmin < c.window.xmax) || !(c.window.ymin < c.window.ymax))
            invalid("window bounds must satisfy lo < hi");
    }
    if (j.contains("resolution")) {
        const json& r = j["resolution"];
        if (r.is_number_integer()) {
            c.nx = c.ny = r.get<int>();
        } else if (r.is_array() && r.size() == 2 && r[0].is_number_integer() && r[1].is_number_integer()) {
            c.nx = r[0].get<int>();
            c.ny = r[1].get<int>();
        } else {
            invalid("resolution must be an integer or [nx, ny]");
        }
        if (c.nx < 1 || c.ny < 1 || c.nx > 4096 || c.ny > 4096)
            invalid("resolution must be within 1..4096 per axis");
    }
    return c;
}

/// Canonical JSON of one unit of work (a single alpha), defaults included.
inline json unit_inputs(const RunConfig& c, std::optional<Exponent> alpha)
{
    json j;
    j["mode"] = to_string(c.mode);
    if (!c.sites.empty()) {
        j["sites"] = json::array();
        for (const auto& s : c.sites)
            j["sites"].push_back(detail::point_json(s));
        j["charges"] = c.charges;
    }
    if (alpha)
        j["alpha"] = detail::exponent_json(*alpha);
    if (c.subspace_json)
        j["subspace"] = *c.subspace_json;
    j["seed"] = c.seed;
    j["limits"] = {{"seeds", c.limits.seeds},
                   {"tolerance", c.limits.tolerance},
                   {"max_iterations", c.limits.max_iterations},
                   {"retries", c.limits.retries},
                   {"gamma_resolution", c.limits.gamma_resolution}};
    j["exact"] = c.exact;
    if (c.mode == Mode::bounds && c.l)
        j["l"] = c.l;
    if (c.three)
        j["three"] = {{"zeta1", c.three->zeta1.str()},
                      {"zeta2", c.three->zeta2.str()},
                      {"a", c.three->a.str()},
                      {"b", c.three->b.str()},
                      {"alpha", c.three->alpha.str()}};
    return j;
}

// ---------------------------------------------------------------------------
// Per-mode outputs.

namespace detail {

inline json census_json(const MorseCensus& m)
{
    json by = json::object();
    for (auto [j, n] : m.counts)
        by[std::to_string(j)] = n;
    return {{"total", m.total}, {"degenerate", m.degenerate}, {"by_index", by}};
}

inline json effective_json(const EffectiveCensus& e)
{
    json by = json::object();
    for (auto [d, n] : e.counts_by_dim)
        by[std::to_string(d)] = n;
    return {{"total", e.total}, {"unclassified", e.unclassified}, {"by_dim", by}};
}

inline SolverOptions solver_options(const RunConfig& c, unsigned jobs)
{
    SolverOptions o;
    o.seeds = c.limits.seeds;
    o.rng_seed = c.seed;
    o.tolerance = c.limits.tolerance;
    o.max_iterations = c.limits.max_iterations;
    o.retries = c.limits.retries;
    o.jobs = jobs;
    return o;
}

struct UnitResult {
    json outputs = json::object();
    std::string status = "ok"; ///< ok | numerical_failure | counterexample
};

inline bool numerical(Errc e)
{
    switch (e) {
    case Errc::unresolved:
    case Errc::non_regular_value:
    case Errc::degenerate_census:
    case Errc::identity_violation:
    case Errc::reduction_failure:
    case Errc::limits_exceeded:
    case Errc::non_generic_diagram:
    case Errc::non_generic_slice:
    case Errc::degenerate_input:
    case Errc::at_site:
        return true;
    default:
        return false;
    }
}

inline RestrictedConfig line_restriction(const RunConfig& c)
{
    if (c.subspace->dim() != 1)
        throw Error(Errc::unsupported_dimension, "restricted solving supports lines only");
    return restrict_to(ChargeConfig(c.sites, c.charges), *c.subspace);
}

inline UnitResult run_solve(const RunConfig& c, const Exponent& a, unsigned jobs)
{
    UnitResult u;
    if (c.subspace) {
        const auto r = line_restriction(c);
        auto cert = count_1d_certified(r, a);
        json roots = json::array();
        MorseCensus m;
        for (const auto& b : cert.roots) {
            roots.push_back({{"lo", b.lo}, {"hi", b.hi}, {"index", b.index}});
            m.add(b.index);
        }
        u.outputs["restricted"] = true;
        u.outputs["roots"] = roots;
        u.outputs["census"] = census_json(m);
        u.outputs["unresolved"] = cert.unresolved.size();
        u.outputs["search_window"] = {cert.search_lo, cert.search_hi};
        if (!cert.resolved())
            u.status = "numerical_failure";
        if (c.exact) {
            try {
                auto ex = count_1d_exact(r, a);
                u.outputs["exact"] = {{"count", ex.count},
                                      {"degree", ex.degree},
                                      {"nominal_degree", ex.nominal_degree},
                                      {"repeated_roots", ex.repeated_roots},
                                      {"agrees", ex.count == cert.count}};
            } catch (const Error& e) {
                u.outputs["exact"] = {{"error", e.what()}};
            }
        }
        return u;
    }
    const ChargeConfig cfg(c.sites, c.charges);
    auto res = find_critical_points(cfg, a, solver_options(c, jobs));
    json pts = json::array();
    for (const auto& p : res.points)
        pts.push_back({{"x", point_json(p.location)},
                       {"index", p.morse_index},
                       {"degenerate", p.degenerate},
                       {"relative_residual", p.relative_residual}});
    u.outputs["restricted"] = false;
    u.outputs["points"] = pts;
    u.outputs["census"] = census_json(res.census);
    u.outputs["stats"] = {{"seeds", res.stats.seeds},
                          {"converged", res.stats.converged},
                          {"attempts", res.stats.attempts},
                          {"normalized", res.stats.normalized}};
    if (res.identity)
        u.outputs["identity"] = {{"lhs", res.identity->lhs}, {"rhs", res.identity->rhs}, {"holds", res.identity->holds}};
    else
        u.outputs["identity"] = nullptr;
    if (!res.complete())
        u.status = "numerical_failure";
    if (cfg.all_positive()) {
        auto mx = maxwell_check(cfg, a, res);
        json m = {{"total", mx.total},
                  {"bound", mx.bound},
                  {"exceeds_bound", mx.exceeds_bound},
                  {"violations", mx.violations}};
        if (mx.effective_available)
            m["effective"] = effective_json(mx.effective);
        u.outputs["maxwell"] = m;
        // Monitoring: an excess over the effective census (planar, alpha >= 1/2)
        // or over (l-1)^2 at alpha = 1/2 in space is flagged for review.
        if (res.complete() && !mx.violations.empty() && cfg.dimension() == 2 && a.alpha >= 0.5)
            u.status = "counterexample";
        if (res.complete() && mx.exceeds_bound && cfg.dimension() == 3 && std::abs(a.alpha - 0.5) < 1e-12)
            u.status = "counterexample";
    }
    return u;
}

inline UnitResult run_sweep(const RunConfig& c, const Exponent& a, unsigned jobs)
{
    UnitResult u;
    std::vector<SweepRecord> recs;
    if (c.subspace)
        recs = alpha_sweep(line_restriction(c), {a.alpha}, 1);
    else
        recs = alpha_sweep(ChargeConfig(c.sites, c.charges), {a.alpha}, solver_options(c, jobs));
    const auto& r = recs.front();
    u.outputs["census"] = census_json(r.census);
    u.outputs["restricted"] = c.subspace.has_value();
    u.outputs["effective_available"] = r.effective_available;
    if (r.effective_available) {
        u.outputs["effective_total"] = r.effective_total;
        u.outputs["matches_effective"] = r.matches_effective;
    }
    if (!r.ok) {
        u.outputs["error"] = r.error;
        u.status = "numerical_failure";
    }
    return u;
}

inline json cell_json(const VoronoiCell& cell)
{
    json w = nullptr;
    if (cell.witness) {
        w = json::array();
        for (const auto& v : *cell.witness)
            w.push_back(to_double(v));
    }
    return {{"nearest", cell.nearest},
            {"codim", cell.codim},
            {"dim", cell.dim},
            {"classification", to_string(cell.classification)},
            {"witness", w}};
}

inline UnitResult run_voronoi(const RunConfig& c)
{
    UnitResult u;
    if (c.subspace) {
        auto e = effective_census(c.sites, *c.subspace);
        u.outputs["relative"] = true;
        u.outputs["effective"] = effective_json(e);
        return u;
    }
    auto d = build_diagram(c.sites);
    json cells = json::array();
    for (const auto& cell : d.cells)
        cells.push_back(cell_json(cell));
    auto g = is_generic(d);
    u.outputs["relative"] = false;
    u.outputs["cells"] = cells;
    u.outputs["cell_count"] = d.cells.size();
    u.outputs["generic"] = g.generic;
    u.outputs["violations"] = g.violations;
    u.outputs["effective"] = effective_json(effective_census(d));
    u.outputs["config_hash"] = hex64(d.config_hash);
    return u;
}

inline UnitResult run_bounds(const RunConfig& c)
{
    UnitResult u;
    const long l = c.l ? c.l : (c.sites.empty() ? 3 : static_cast<long>(c.sites.size()));
    const long n = c.sites.empty() ? 3 : static_cast<long>(c.sites.front().size());
    u.outputs["l"] = l;
    u.outputs["n"] = n;
    u.outputs["charge_bound"] = charge_bound(l).str();
    u.outputs["charge_bound_alt"] = charge_bound_alt(l).str();
    const auto dd = charge_degree_data(l);
    u.outputs["degree_data"] = {{"degrees", dd.degrees}, {"k", dd.k}};
    u.outputs["maxwell"] = (l - 1) * (l - 1);
    try {
        auto cb = complexity_bounds(l, n);
        json b = json::object();
        if (cb.vertices)
            b["vertices"] = *cb.vertices;
        if (cb.edges)
            b["edges"] = *cb.edges;
        if (cb.faces)
            b["faces"] = *cb.faces;
        if (cb.positive_codim_cells)
            b["positive_codim_cells"] = *cb.positive_codim_cells;
        u.outputs["voronoi_complexity"] = b;
    } catch (const Error& e) {
        u.outputs["voronoi_complexity"] = {{"error", e.what()}};
    }
    if (l == 3) {
        const ThreeChargeParams q = c.three ? *c.three : reference_three_charge_params();
        auto rep = pipeline_count(q);
        u.outputs["three_charge_bound"] = rep.bound();
        u.outputs["three_charge_certified"] = rep.certified;
        if (!rep.certified)
            u.status = "numerical_failure";
    }
    return u;
}

inline UnitResult run_three(const RunConfig& c, unsigned jobs)
{
    UnitResult u;
    const auto& p = *c.three;
    auto rep = pipeline_count(p);
    u.outputs["bound"] = rep.bound();
    u.outputs["certified"] = rep.certified;
    u.outputs["failures"] = rep.failures;
    u.outputs["n1"] = rep.n1;
    u.outputs["n3"] = rep.n3;
    u.outputs["mixed_volume_2x"] = rep.mixed_volume_2x.str();
    u.outputs["subtracted"] = rep.subtracted;
    u.outputs["reduction_constant"] = rep.reduction_constant.str();
    u.outputs["total_degree_R"] = rep.total_degree_R;
    u.outputs["complex_multiplicities"] = rep.complex_multiplicities;
    u.outputs["real_zeros_by_quadrant"] = rep.real_zeros_by_quadrant;
    u.outputs["rectangle_crossings"] = rep.rectangle_crossings;
    if (!rep.certified)
        u.status = "numerical_failure";

    GammaOptions go;
    go.resolution = c.limits.gamma_resolution;
    go.jobs = jobs;
    auto pts = gamma_intersections(p, go);
    auto sol = find_critical_points(p.config(), Exponent(to_double(p.alpha)), solver_options(c, jobs));
    json arr = json::array();
    bool all_matched = sol.points.size() == pts.size();
    for (const auto& g : pts) {
        bool matched = std::any_of(sol.points.begin(), sol.points.end(), [&](const CriticalPoint& cp) {
            return (cp.location - g.xy).norm() < 1e-6;
        });
        all_matched = all_matched && matched;
        arr.push_back({{"f", g.f},
                       {"g", g.g},
                       {"xy", point_json(g.xy)},
                       {"residual", g.residual},
                       {"roundtrip", g.roundtrip},
                       {"solver_match", matched}});
    }
    u.outputs["gamma_points"] = arr;
    u.outputs["gamma_count"] = pts.size();
    u.outputs["solver_count"] = sol.points.size();
    u.outputs["solver_agrees"] = all_matched;
    if (!all_matched || !sol.complete())
        u.status = "numerical_failure";
    return u;
}

} // namespace detail

inline json make_record(const RunConfig& c, std::optional<Exponent> alpha, const detail::UnitResult& u)
{
    json inputs = unit_inputs(c, alpha);
    const std::string digest = detail::hex64(detail::fnv1a64(inputs.dump()));
    json rec;
    rec["run_id"] = digest;
    rec["timestamp"] = detail::utc_timestamp();
    rec["mode"] = to_string(c.mode);
    rec["inputs_digest"] = digest;
    rec["inputs"] = inputs;
    rec["outputs"] = u.outputs;
    rec["status"] = u.status;
    return rec;
}

/// Runs every unit of work; validation problems inside a unit propagate as
/// Error(validation-type codes), numerical ones become failure records.
inline std::vector<json> run_units(const RunConfig& c, unsigned jobs)
{
    std::vector<json> out;
    auto guarded = [&](std::optional<Exponent> a, auto&& fn) {
        detail::UnitResult u;
        try {
            u = fn();
        } catch (const Error& e) {
            if (!detail::numerical(e.code()))
                throw;
            u.outputs = {{"error", e.what()}};
            u.status = "numerical_failure";
        }
        out.push_back(make_record(c, a, u));
    };
    switch (c.mode) {
    case Mode::solve:
        for (const auto& a : c.alphas)
            guarded(a, [&] { return detail::run_solve(c, a, jobs); });
        break;
    case Mode::sweep: {
        // Alphas fan out over the pool; records keep the configured order.
        std::vector<detail::UnitResult> units(c.alphas.size());
        std::vector<std::optional<Error>> errs(c.alphas.size());
        parallel_for(c.alphas.size(), jobs, [&](std::size_t i) {
            try {
                units[i] = detail::run_sweep(c, c.alphas[i], 1);
            } catch (const Error& e) {
                errs[i] = e;
            }
        });
        for (std::size_t i = 0; i < units.size(); ++i) {
            if (errs[i]) {
                if (!detail::numerical(errs[i]->code()))
                    throw *errs[i];
                units[i].outputs = {{"error", errs[i]->what()}};
                units[i].status = "numerical_failure";
            }
            out.push_back(make_record(c, c.alphas[i], units[i]));
        }
        break;
    }
    case Mode::voronoi:
        guarded(std::nullopt, [&] { return detail::run_voronoi(c); });
        break;
    case Mode::bounds:
        guarded(std::nullopt, [&] { return detail::run_bounds(c); });
        break;
    case Mode::three:
        guarded(std::nullopt, [&] { return detail::run_three(c, jobs); });
        break;
    case Mode::grid:
        throw Error(Errc::invalid_argument, "grid mode writes CSV, use emit_grid");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid emission.

/// x,y,V rows in row-major order (y outer); values at sites are left empty.
inline void emit_grid(const RunConfig& c, std::ostream& os)
{
    const ChargeConfig raw(c.sites, c.charges);
    auto [cfg, L] = normalize_dimension(raw);
    if (cfg.dimension() != 2 || L.dim() != 2)
        throw Error(Errc::validation, "grid mode needs a configuration spanning a plane");
    const Exponent a = c.alphas.front();
    os << "x,y,V\n";
    char buf[96];
    for (int iy = 0; iy < c.ny; ++iy) {
        const double y = c.ny == 1 ? 0.5 * (c.window.ymin + c.window.ymax)
                                   : c.window.ymin + (c.window.ymax - c.window.ymin) * iy / (c.ny - 1);
        for (int ix = 0; ix < c.nx; ++ix) {
            const double x = c.nx == 1 ? 0.5 * (c.window.xmin + c.window.xmax)
                                       : c.window.xmin + (c.window.xmax - c.window.xmin) * ix / (c.nx - 1);
            Point p(2);
            p << x, y;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,", x, y);
            os << buf;
            try {
                std::snprintf(buf, sizeof buf, "%.17g", eval_potential(cfg, a, p));
                os << buf;
            } catch (const Error& e) {
                if (e.code() != Errc::at_site)
                    throw;
            }
            os << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Report.

namespace detail {

inline std::string census_cell(const json& census)
{
    if (!census.is_object() || !census.contains("by_index"))
        return "-";
    std::string s;
    for (const auto& [k, v] : census["by_index"].items())
        s += (s.empty() ? "" : " ") + ("i" + k + ":" + std::to_string(v.get<long long>()));
    if (census.value("degenerate", 0) > 0)
        s += " deg:" + std::to_string(census["degenerate"].get<long long>());
    return s.empty() ? "none" : s;
}

inline std::string effective_cell(const json& eff)
{
    if (!eff.is_object() || !eff.contains("by_dim"))
        return "-";
    std::string s;
    for (const auto& [k, v] : eff["by_dim"].items())
        s += (s.empty() ? "" : " ") + ("d" + k + ":" + std::to_string(v.get<long long>()));
    return s.empty() ? "none" : s;
}

inline bool census_equals_effective(const json& census, const json& eff)
{
    if (!census.is_object() || !eff.is_object() || census.value("degenerate", 0) != 0)
        return false;
    if (census.value("total", -1) != eff.value("total", -2))
        return false;
    for (const auto& [k, v] : eff["by_dim"].items())
        if (census["by_index"].value(k, 0) != v.get<long long>())
            return false;
    return true;
}

} // namespace detail

/// Per-configuration table: alpha, census by index, effective census, Maxwell
/// comparison and identity status.  Throws Error(validation) on bad records.
inline void report(std::istream& in, std::ostream& os)
{
    struct Row {
        std::string mode, alpha, census, effective, maxwell, identity, status;
        double alpha_value = 0;
        long long total = -1;
        std::string note;
    };
    std::map<std::string, std::vector<Row>> groups;
    std::vector<std::string> order;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json r;
        try {
            r = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(Errc::validation, "line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!r.is_object() || !r.contains("inputs") || !r.contains("outputs") || !r.contains("mode") ||
            !r.contains("status"))
            throw Error(Errc::validation, "line " + std::to_string(lineno) + ": not a result record");
        const json& in_ = r["inputs"];
        const json& out = r["outputs"];
        json key = {{"sites", in_.value("sites", json())},
                    {"charges", in_.value("charges", json())},
                    {"subspace", in_.value("subspace", json())},
                    {"three", in_.value("three", json())},
                    {"mode", r["mode"]}};
        const std::string k = key.dump();
        if (!groups.count(k))
            order.push_back(k);
        Row row;
        row.mode = r["mode"].get<std::string>();
        row.status = r["status"].get<std::string>();
        if (in_.contains("alpha")) {
            row.alpha = in_["alpha"].is_string() ? in_["alpha"].get<std::string>() : in_["alpha"].dump();
            try {
                row.alpha_value = in_["alpha"].is_string() ? to_double(Rational(in_["alpha"].get<std::string>()))
                                                           : in_["alpha"].get<double>();
            } catch (const std::exception&) {
                throw Error(Errc::validation, "line " + std::to_string(lineno) + ": bad alpha");
            }
        } else {
            row.alpha = "-";
        }
        const json census = out.value("census", json());
        row.census = detail::census_cell(census);
        if (census.is_object())
            row.total = census.value("total", 0LL) + census.value("degenerate", 0LL);
        json eff;
        const bool has_maxwell = out.contains("maxwell") && out["maxwell"].is_object();
        if (has_maxwell && out["maxwell"].contains("effective"))
            eff = out["maxwell"]["effective"];
        else if (out.contains("effective"))
            eff = out["effective"];
        row.effective = eff.is_null() ? (out.contains("effective_total")
                                             ? "total " + std::to_string(out["effective_total"].get<long long>())
                                             : "-")
                                      : detail::effective_cell(eff);
        if (has_maxwell) {
            const auto& m = out["maxwell"];
            const long long tot = m.value("total", 0LL), bnd = m.value("bound", 0LL);
            row.maxwell = std::to_string(tot) + (tot > bnd ? " > " : " <= ") + std::to_string(bnd);
            std::string note = std::to_string(tot) + " critical points; ";
            note += tot > bnd ? "exceeds (l-1)^2=" + std::to_string(bnd) : "within (l-1)^2=" + std::to_string(bnd);
            if (!eff.is_null())
                note += detail::census_equals_effective(census, eff) ? "; consistent with effective census"
                                                                     : "; differs from effective census";
            row.note = note;
        } else if (out.contains("matches_effective")) {
            row.maxwell = "-";
            row.note = out["matches_effective"].get<bool>() ? "matches effective census" : "";
        } else {
            row.maxwell = "-";
        }
        if (out.contains("identity") && out["identity"].is_object())
            row.identity = out["identity"].value("holds", false) ? "holds" : "FAILS";
        else
            row.identity = "-";
        if (row.mode == "bounds") {
            row.census = "charge_bound " + out.value("charge_bound", std::string("-"));
            if (out.contains("three_charge_bound"))
                row.note = "three-charge bound " + std::to_string(out["three_charge_bound"].get<long long>());
        } else if (row.mode == "three") {
            row.census = "gamma " + std::to_string(out.value("gamma_count", 0)) + ", bound " +
                         std::to_string(out.value("bound", 0LL));
        } else if (row.mode == "voronoi") {
            row.census = "cells " + std::to_string(out.value("cell_count", 0));
        }
        groups[k].push_back(row);
    }

    std::size_t gi = 0;
    for (const auto& k : order) {
        auto& rows = groups[k];
        os << "config " << ++gi << " (" << rows.front().mode << ")\n";
        os << std::left << std::setw(10) << "alpha" << std::setw(28) << "census" << std::setw(22) << "effective"
           << std::setw(12) << "maxwell" << std::setw(10) << "identity" << std::setw(18) << "status"
           << "note\n";
        for (const auto& r : rows)
            os << std::left << std::setw(10) << r.alpha << std::setw(28) << r.census << std::setw(22) << r.effective
               << std::setw(12) << r.maxwell << std::setw(10) << r.identity << std::setw(18) << r.status << r.note
               << "\n";
        // Monotonicity in alpha of the total count.
        std::vector<const Row*> byalpha;
        for (const auto& r : rows)
            if (r.alpha != "-" && r.total >= 0)
                byalpha.push_back(&r);
        if (byalpha.size() >= 3) {
            std::stable_sort(byalpha.begin(), byalpha.end(),
                             [](const Row* x, const Row* y) { return x->alpha_value < y->alpha_value; });
            bool up = true, down = true;
            for (std::size_t i = 1; i < byalpha.size(); ++i) {
                up = up && byalpha[i]->total >= byalpha[i - 1]->total;
                down = down && byalpha[i]->total <= byalpha[i - 1]->total;
            }
            os << "count as a function of alpha: " << (up || down ? "monotone" : "not monotone") << "\n";
        }
        os << "\n";
    }
}

} // namespace equilibria::cli
