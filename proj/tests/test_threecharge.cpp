#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "equilibria/equilibria.hpp"

using namespace equilibria;

namespace {

using B = RationalBivariate;

ThreeChargeParams random_params(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> num(1, 40), signed_num(-30, 60), bnum(5, 40);
    std::bernoulli_distribution below(0.5);
    static const Rational alphas[] = {Rational(1, 2), Rational(1), Rational(2)};
    ThreeChargeParams p;
    p.zeta1 = Rational(num(rng), 10);
    p.zeta2 = Rational(num(rng), 10);
    p.a = Rational(signed_num(rng), 30);
    p.b = Rational(bnum(rng), 20) * (below(rng) ? -1 : 1);
    p.alpha = alphas[rng() % 3];
    p.validate();
    return p;
}

ThreeChargeParams equilateral_params(double alpha)
{
    return ThreeChargeParams::from_doubles(1, 1, 0.5, std::sqrt(3.0) / 2, alpha);
}

} // namespace

TEST(Bivariate, ArithmeticAndEvaluation)
{
    B f = B::f(), g = B::g();
    B p = (f + g) * (f - g);
    EXPECT_EQ(p, f * f - g * g);
    EXPECT_EQ(p.total_degree(), 2);
    EXPECT_EQ(p.coeff(1, 1), Rational(0));
    EXPECT_EQ(p(Rational(3), Rational(2)), Rational(5));
    EXPECT_DOUBLE_EQ(p(3.0, 2.0), 5.0);
    EXPECT_EQ((f * f * g).derivative_f(), B(Rational(2)) * f * g);
    EXPECT_TRUE((f * g).derivative_f(2).is_zero());
    EXPECT_EQ(p.divide_exact(f + g), f - g);
    EXPECT_THROW((p + B(Rational(1))).divide_exact(f + g), Error);
    B t = (f * g + B(Rational(2)) * f).translate(Rational(1), Rational(-1));
    EXPECT_EQ(t(Rational(0), Rational(0)), Rational(1));
    EXPECT_EQ(t, (f + B(Rational(1))) * (g + B(Rational(1))));
}

TEST(Bivariate, NewtonPolygonAndHexagon)
{
    B f = B::f(), g = B::g();
    B p = f * f + g * g * g + f * g + B(Rational(1));
    auto np = newton_polygon(p);
    EXPECT_EQ(np.size(), 3u);
    EXPECT_TRUE(np.contains(LatticePoint{1, 1}));
    EXPECT_THROW(newton_polygon(B()), Error);
    auto hex = diagonal_hexagon(2, 6, 0, 4);
    EXPECT_EQ(hex.size(), 6u);
    EXPECT_EQ(hex.doubled_area(), 2 * 12);
}

TEST(Bivariate, ReduceModulo)
{
    B f = B::f(), g = B::g();
    auto X = RationalPolynomial::x();
    RationalPolynomial pf = X * X - Rational(2), pg = X - Rational(3);
    B p = f * f * g - B(Rational(2)) * g + f;
    EXPECT_EQ(reduce_modulo(p, pf, pg), f);
    EXPECT_TRUE(reduce_modulo((f * f - B(Rational(2))) * (g + f), pf, pg).is_zero());
}

TEST(Fulton, KnownMultiplicities)
{
    B x = B::f(), y = B::g();
    EXPECT_EQ(intersection_multiplicity_at_origin(x, y), 1);
    EXPECT_EQ(intersection_multiplicity_at_origin(y - x * x, y), 2);
    EXPECT_EQ(intersection_multiplicity_at_origin(y * y - x * x * x, x * x - y * y * y), 4);
    EXPECT_EQ(intersection_multiplicity_at_origin(y - x * x, y - x * x * x), 2);
    EXPECT_EQ(intersection_multiplicity_at_origin(x + B(Rational(1)), y), 0);
    B r2 = x * x + y * y;
    B F = r2 * r2 + B(Rational(3)) * x * x * y - y * y * y;
    B G = r2 * r2 * r2 - B(Rational(4)) * x * x * y * y;
    EXPECT_EQ(intersection_multiplicity_at_origin(F, G), 14);
    EXPECT_EQ(intersection_multiplicity_at_origin(G, F), 14);
    EXPECT_THROW(intersection_multiplicity_at_origin(x * y, x * (y + x)), Error);
}

TEST(Fulton, TranslatedGaussianPoint)
{
    using GB = GaussianBivariate;
    const GaussianRational i{Rational(0), Rational(1)};
    GB x = GB::f(), y = GB::g();
    // (x - i)^2 + ... meets y tangentially at x = i.
    GB F = (x - GB(i)) * (x - GB(i)) + y, G = y;
    EXPECT_EQ(intersection_multiplicity_at_origin(F.translate(i, GaussianRational{}), G.translate(i, {})), 2);
}

TEST(ThreeCharge, ValidationAndConfig)
{
    EXPECT_THROW(ThreeChargeParams::from_doubles(1, 1, 0.5, 0.0, 1), Error);
    EXPECT_THROW(ThreeChargeParams::from_doubles(-1, 1, 0.5, 1, 1), Error);
    EXPECT_THROW(ThreeChargeParams::from_doubles(1, 1, 0.5, 1, 0), Error);
    try {
        ThreeChargeParams::from_doubles(1, 1, 0.5, 0.0, 1);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::collinear_sites);
    }
    auto cfg = reference_three_charge_params().config();
    EXPECT_EQ(cfg.size(), 3u);
    EXPECT_DOUBLE_EQ(cfg.values[0], 1.5);
    EXPECT_DOUBLE_EQ(cfg.sites[2][1], 0.8);
}

TEST(ThreeCharge, XiStructure)
{
    std::mt19937_64 rng(41);
    for (int t = 0; t < 10; ++t) {
        auto p = random_params(rng);
        auto x = build_xi(p);
        for (const B* xi : {&x.xi2, &x.xi3}) {
            auto q = (*xi - x.xi1).divide_exact(x.sigma);
            EXPECT_LE(q.total_degree(), 1);
            EXPECT_EQ(q * x.sigma, *xi - x.xi1);
        }
        // xi2 is a quadratic in g alone, xi3 one in f alone; neither has real roots.
        EXPECT_EQ(x.xi2.degree_f(), 0);
        EXPECT_EQ(x.xi3.degree_g(), 0);
        auto disc = [](const Rational& c2, const Rational& c1, const Rational& c0) { return c1 * c1 - 4 * c2 * c0; };
        EXPECT_LT(disc(x.xi2.coeff(0, 2), x.xi2.coeff(0, 1), x.xi2.coeff(0, 0)), 0);
        EXPECT_LT(disc(x.xi3.coeff(2, 0), x.xi3.coeff(1, 0), x.xi3.coeff(0, 0)), 0);
        auto z = common_xi_zeros(p, x);
        ASSERT_EQ(z.size(), 2u);
        auto g1 = to_gaussian(x.xi1), g2 = to_gaussian(x.xi2), g3 = to_gaussian(x.xi3);
        for (const auto& c : z) {
            EXPECT_EQ(g1(c.f, c.g), GaussianRational{});
            EXPECT_EQ(g2(c.f, c.g), GaussianRational{});
            EXPECT_EQ(g3(c.f, c.g), GaussianRational{});
        }
        EXPECT_EQ(z[0].f, z[1].f.conj());
        EXPECT_EQ(z[0].g, z[1].g.conj());
    }
}

TEST(ThreeCharge, SymbolicIdentitiesAtRandomDraws)
{
    std::mt19937_64 rng(43);
    for (int t = 0; t < 10; ++t) {
        auto p = random_params(rng);
        QData q;
        ASSERT_NO_THROW(q = build_Q(p)) << "draw " << t;
        EXPECT_TRUE(q.Q1.derivative_f(3).is_zero());
        EXPECT_TRUE(q.Q1.derivative_g(3).is_zero());
        EXPECT_TRUE(q.Q1.derivative_f(2).derivative_g(2).is_zero());
        EXPECT_EQ(q.Q1.coeff(0, 0), Rational(0));
        auto x = build_xi(p);
        const Rational k = (-1 - 2 * p.alpha) / ((p.alpha + 1) * (p.alpha + 1));
        EXPECT_EQ(q.Q, B(k) * x.xi1 * x.xi2 * x.xi3 + B::f() * B::g() * q.Q1);
        EXPECT_TRUE(diagonal_hexagon(2, 6, 0, 4).contains(newton_polygon(q.Q)));

        auto R = build_R(p, q.Q);
        EXPECT_EQ(R.total_degree(), 10);
        EXPECT_TRUE(diagonal_hexagon(2, 10, 0, 6).contains(newton_polygon(R)));
        // dQ ^ eta2 reproduced directly from the cleared form.
        auto e2 = eta2_cleared(p, x);
        EXPECT_EQ(R, q.Q.derivative_f() * e2.S - q.Q.derivative_g() * e2.P);

        auto red = reduce_R(p, q.Q, R);
        EXPECT_EQ(red.R_tilde, R - B(red.c) * red.q * q.Q);
        EXPECT_EQ(red.c, Rational(1) / (p.alpha + 1));
        auto hex = diagonal_hexagon(3, 9, 1, 5);
        EXPECT_TRUE(hex.contains(newton_polygon(red.R_tilde)));
        EXPECT_EQ(mixed_volume_2x(newton_polygon(q.Q), newton_polygon(red.R_tilde)), 28) << "draw " << t;
    }
}

TEST(ThreeCharge, Eta2ZerosAreCommon)
{
    std::mt19937_64 rng(47);
    for (int t = 0; t < 10; ++t) {
        auto p = random_params(rng);
        auto x = build_xi(p);
        auto q = build_Q(p);
        auto R = build_R(p, q.Q);
        auto [pf, pg] = eta2_zero_polys(p, x);
        EXPECT_EQ(pf.degree(), 2);
        EXPECT_EQ(pg.degree(), 2);
        EXPECT_TRUE(reduce_modulo(q.Q, pf, pg).is_zero());
        EXPECT_TRUE(reduce_modulo(R, pf, pg).is_zero());
        // One negative and one positive root each: product of roots below zero.
        EXPECT_LT(pf[0] / pf[2], 0);
        EXPECT_LT(pg[0] / pg[2], 0);
    }
}

TEST(ThreeCharge, ReferencePipeline)
{
    auto rep = pipeline_count(reference_three_charge_params());
    EXPECT_TRUE(rep.certified) << (rep.failures.empty() ? "" : rep.failures.front());
    EXPECT_EQ(rep.mixed_volume_2x, 28);
    EXPECT_EQ(rep.bound(), 12);
    EXPECT_EQ(rep.total_degree_R, 10);
    EXPECT_EQ(rep.reduction_constant, Rational(1, 2));
    ASSERT_EQ(rep.complex_multiplicities.size(), 2u);
    for (int m : rep.complex_multiplicities)
        EXPECT_GE(m, 6);
    EXPECT_EQ(rep.rectangle_crossings, 4);
    for (int quad : {2, 3, 4})
        EXPECT_GE(rep.real_zeros_by_quadrant[static_cast<std::size_t>(quad - 1)], 2);
}

TEST(ThreeCharge, PipelineAtRandomDraws)
{
    std::mt19937_64 rng(53);
    for (int t = 0; t < 8; ++t) {
        auto p = random_params(rng);
        auto rep = pipeline_count(p);
        EXPECT_TRUE(rep.certified) << "draw " << t << ": " << (rep.failures.empty() ? "" : rep.failures.front());
        EXPECT_EQ(rep.bound(), 12);
    }
}

TEST(ThreeCharge, RealZerosRespectBezout)
{
    auto p = reference_three_charge_params();
    auto q = build_Q(p);
    auto R = build_R(p, q.Q);
    auto sols = real_common_zeros(q.Q, R);
    int total = 0;
    for (const auto& s : sols) {
        EXPECT_EQ(s.quadrant, quadrant_of(s.f, s.g));
        auto [qv, qs] = detail::NumericPoly(q.Q).eval(s.f, s.g);
        EXPECT_LT(std::abs(qv), 1e-8 * qs);
        total += s.singular ? 2 : 1;
    }
    EXPECT_LE(total, 28);
}

TEST(Gamma, EquilateralMatchesSolver)
{
    auto p = equilateral_params(1);
    auto pts = gamma_intersections(p);
    ASSERT_EQ(pts.size(), 4u);
    auto solved = find_critical_points(p.config(), 1);
    ASSERT_EQ(solved.points.size(), 4u);
    for (const auto& gp : pts) {
        EXPECT_LT(gp.residual, 1e-10);
        EXPECT_LT(gp.roundtrip, 1e-10);
        double best = 1e9;
        for (const auto& c : solved.points)
            best = std::min(best, (c.location - gp.xy).norm());
        EXPECT_LT(best, 1e-8);
    }
}

TEST(Gamma, ObtuseHasTwo)
{
    auto p = ThreeChargeParams::from_doubles(1, 1, 0.5, 0.25, 1);
    EXPECT_EQ(gamma_intersections(p).size(), 2u);
}

TEST(Gamma, AnalyticJacobian)
{
    auto p = reference_three_charge_params();
    GammaSystem sys(p);
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> w(-4, 4);
    for (int t = 0; t < 50; ++t) {
        double f = std::exp(w(rng)), g = std::exp(w(rng));
        double u = std::log(f), v = std::log(g), h = 1e-6;
        auto val = sys(u, v);
        auto du = sys(u + h, v).G - sys(u - h, v).G, dv = sys(u, v + h).G - sys(u, v - h).G;
        EXPECT_NEAR(val.J(0, 0), du[0] / (2 * h), 1e-5 * std::max(1.0, std::abs(val.J(0, 0))));
        EXPECT_NEAR(val.J(1, 1), dv[1] / (2 * h), 1e-5 * std::max(1.0, std::abs(val.J(1, 1))));
        EXPECT_NEAR(val.J(0, 1), dv[0] / (2 * h), 1e-5 * std::max(1.0, std::abs(val.J(0, 1))));
        EXPECT_NEAR(val.J(1, 0), du[1] / (2 * h), 1e-5 * std::max(1.0, std::abs(val.J(1, 0))));
    }
}

TEST(Gamma, AtMostTwelveOnRandomDraws)
{
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> z(0.2, 3.0), a(-1.0, 2.0), b(0.15, 1.5);
    const double alphas[] = {0.5, 1.0, 2.0, 7.0 / 3.0};
    GammaOptions opt;
    opt.resolution = 1024;
    opt.jobs = default_jobs();
    std::size_t agree = 0, runs = 0;
    for (int t = 0; t < 100; ++t) {
        double al = alphas[t % 4];
        auto p = ThreeChargeParams::from_doubles(z(rng), z(rng), a(rng), b(rng) * (t % 2 ? -1 : 1), al);
        std::vector<GammaPoint> pts;
        try {
            pts = gamma_intersections(p, opt);
        } catch (const Error& e) {
            ASSERT_EQ(e.code(), Errc::non_regular_value) << e.what();
            continue;
        }
        EXPECT_LE(pts.size(), 12u) << "draw " << t;
        EXPECT_EQ(pts.size() % 2, 0u) << "draw " << t;
        auto solved = find_critical_points(p.config(), al);
        ++runs;
        agree += solved.points.size() == pts.size();
    }
    EXPECT_GE(runs, 95u);
    EXPECT_EQ(agree, runs);
}

TEST(Gamma, RectangleCrossings)
{
    std::mt19937_64 rng(67);
    for (int t = 0; t < 5; ++t) {
        auto p = random_params(rng);
        const double U1 = std::min(20.0, 250.0 / (1 + 2 * to_double(p.alpha)));
        EXPECT_EQ(gamma2_rectangle_crossings(p, U1, 300.0, 50000), 4) << "draw " << t;
    }
}
