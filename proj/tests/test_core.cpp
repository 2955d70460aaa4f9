#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "equilibria/equilibria.hpp"

using namespace equilibria;

namespace {

Point pt(std::initializer_list<double> v)
{
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        p[i++] = x;
    return p;
}

ChargeConfig random_config(std::mt19937_64& rng, int l, int n, bool positive)
{
    std::uniform_real_distribution<double> coord(-2.0, 2.0), charge(0.3, 2.0);
    std::bernoulli_distribution flip(0.3);
    std::vector<Point> sites;
    std::vector<double> values;
    for (int i = 0; i < l; ++i) {
        Point p(n);
        for (int k = 0; k < n; ++k)
            p[k] = coord(rng);
        sites.push_back(p);
        values.push_back((!positive && flip(rng) ? -1.0 : 1.0) * charge(rng));
    }
    return {sites, values};
}

Point random_far_point(std::mt19937_64& rng, const ChargeConfig& cfg)
{
    std::uniform_real_distribution<double> coord(-2.5, 2.5);
    for (;;) {
        Point x(cfg.dimension());
        for (Eigen::Index k = 0; k < x.size(); ++k)
            x[k] = coord(rng);
        bool ok = true;
        for (const auto& c : cfg.sites)
            ok = ok && (x - c).norm() > 0.2;
        if (ok)
            return x;
    }
}

} // namespace

TEST(Rational, SnapRecoversSimpleFractions)
{
    EXPECT_EQ(snap_to_rational(0.5), Rational(1, 2));
    EXPECT_EQ(snap_to_rational(1.0 / 3.0), Rational(1, 3));
    EXPECT_EQ(snap_to_rational(-2.75), Rational(-11, 4));
    EXPECT_EQ(floor(Rational(-7, 2)), BigInt(-4));
    EXPECT_EQ(floor(Rational(7, 2)), BigInt(3));
}

TEST(Rational, GaussianArithmetic)
{
    GaussianRational a{Rational(1), Rational(2)}, b{Rational(3), Rational(-1)};
    auto p = a * b;
    EXPECT_EQ(p, (GaussianRational{Rational(5), Rational(5)}));
    EXPECT_EQ(p / b, a);
    EXPECT_EQ(a.norm(), Rational(5));
    EXPECT_EQ(a * a.conj(), (GaussianRational{Rational(5), Rational(0)}));
}

TEST(Linalg, RankDeterminantSolve)
{
    DenseMatrix<Rational> m{{1, 2, 3}, {2, 4, 6}, {1, 0, 1}};
    EXPECT_EQ(matrix_rank(m), 2u);
    EXPECT_EQ(determinant(m), Rational(0));
    DenseMatrix<Rational> a{{2, 1}, {1, 3}};
    EXPECT_EQ(determinant(a), Rational(5));
    auto x = solve_square(a, DenseVector<Rational>{3, 5});
    ASSERT_TRUE(x);
    EXPECT_EQ((*x)[0], Rational(4, 5));
    EXPECT_EQ((*x)[1], Rational(7, 5));
    EXPECT_FALSE(solve_square(m, DenseVector<Rational>{1, 1, 1}));
}

TEST(Lp, OptimalAndUnbounded)
{
    lp::Problem<Rational> p(2);
    p.add({1, 1}, lp::Relation::less_equal, 4);
    p.add({1, 3}, lp::Relation::less_equal, 6);
    p.objective = {3, 2};
    auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::optimal);
    EXPECT_EQ(s.value, Rational(12));

    lp::Problem<Rational> u(2);
    u.add({1, -1}, lp::Relation::less_equal, 1);
    u.objective = {1, 1};
    EXPECT_EQ(lp::solve(u).status, lp::Status::unbounded);
}

TEST(Lp, FarkasCertificateChecks)
{
    // x + y <= 1, x + y >= 3 has no solution.
    lp::Problem<Rational> p(2);
    p.add({1, 1}, lp::Relation::less_equal, 1);
    p.add({1, 1}, lp::Relation::greater_equal, 3);
    auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::infeasible);
    ASSERT_EQ(s.farkas.size(), 2u);
    EXPECT_LE(s.farkas[0], 0);
    EXPECT_GE(s.farkas[1], 0);
    for (std::size_t j = 0; j < 2; ++j)
        EXPECT_LE(s.farkas[0] * p.rows[0].coeffs[j] + s.farkas[1] * p.rows[1].coeffs[j], 0);
    EXPECT_GT(s.farkas[0] * p.rows[0].rhs + s.farkas[1] * p.rows[1].rhs, 0);
}

TEST(Geometry, Circumcenters)
{
    auto c = circumcenter({pt({0, 0}), pt({1, 0}), pt({0, 1})});
    EXPECT_NEAR(c[0], 0.5, 1e-12);
    EXPECT_NEAR(c[1], 0.5, 1e-12);
    const double s = std::sqrt(3.0) / 2;
    c = circumcenter({pt({1, 0}), pt({-0.5, s}), pt({-0.5, -s})});
    EXPECT_NEAR(c.norm(), 0.0, 1e-12);
    c = circumcenter({pt({1, 1, 1}), pt({1, -1, -1}), pt({-1, 1, -1}), pt({-1, -1, 1})});
    EXPECT_NEAR(c.norm(), 0.0, 1e-12);
    EXPECT_THROW(circumcenter({pt({0, 0}), pt({1, 1}), pt({2, 2})}), Error);
}

TEST(Geometry, CircumcenterInvariantUnderIsometry)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Point> pts;
        for (int i = 0; i < 4; ++i)
            pts.push_back(pt({nd(rng), nd(rng), nd(rng)}));
        Eigen::MatrixXd m(3, 3);
        for (int i = 0; i < 9; ++i)
            m(i / 3, i % 3) = nd(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        Eigen::MatrixXd rot = qr.householderQ();
        Point shift = pt({nd(rng), nd(rng), nd(rng)});
        std::vector<Point> moved;
        for (const auto& p : pts)
            moved.push_back(rot * p + shift);
        Point a = rot * circumcenter(pts) + shift, b = circumcenter(moved);
        EXPECT_LT((a - b).norm(), 1e-8 * std::max(1.0, a.norm()));
        for (std::size_t i = 1; i < pts.size(); ++i)
            EXPECT_NEAR((b - moved[i]).squaredNorm(), (b - moved[0]).squaredNorm(),
                        1e-10 * (b - moved[0]).squaredNorm());
    }
}

TEST(Geometry, HullMembershipExamples)
{
    std::vector<Point> tri{pt({0, 0}), pt({1, 0}), pt({0, 1})};
    EXPECT_EQ(hull_membership(pt({0.5, 0.5}), tri).status, HullStatus::boundary);
    const double s = std::sqrt(3.0) / 2;
    std::vector<Point> eq{pt({1, 0}), pt({-0.5, s}), pt({-0.5, -s})};
    EXPECT_EQ(hull_membership(pt({0, 0}), eq).status, HullStatus::interior);
    auto out = hull_membership(pt({2, 2}), eq);
    ASSERT_EQ(out.status, HullStatus::outside);
    EXPECT_THROW(hull_membership(pt({0, 0, 0}), eq), Error);
}

TEST(Geometry, HullMembershipMatchesTriangleOracle)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coord(-4, 4);
    using RP = RationalPoint;
    auto cross = [](const RP& o, const RP& a, const RP& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    auto on_segment = [&](const RP& p, const RP& a, const RP& b) {
        return cross(a, b, p) == 0 && std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
               std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
    };
    int checked = 0;
    while (checked < 300) {
        std::vector<RP> v;
        const int m = 3 + static_cast<int>(rng() % 4);
        for (int i = 0; i < m; ++i)
            v.push_back(RP{Rational(coord(rng)), Rational(coord(rng))});
        bool flat = true;
        for (int i = 2; i < m; ++i)
            flat = flat && cross(v[0], v[1], v[i]) == 0;
        if (flat || v[0] == v[1])
            continue;
        RP p{Rational(coord(rng), 2), Rational(coord(rng), 2)};

        bool in = false;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                for (int k = j + 1; k < m; ++k) {
                    auto d1 = cross(v[i], v[j], p), d2 = cross(v[j], v[k], p), d3 = cross(v[k], v[i], p);
                    bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
                    if (!(neg && pos) && cross(v[i], v[j], v[k]) != 0)
                        in = true;
                }
        bool edge = false;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                if (v[i] == v[j] || !on_segment(p, v[i], v[j]))
                    continue;
                bool left = false, right = false;
                for (int k = 0; k < m; ++k) {
                    left = left || cross(v[i], v[j], v[k]) > 0;
                    right = right || cross(v[i], v[j], v[k]) < 0;
                }
                edge = edge || !(left && right);
            }
        HullStatus expect = !in ? HullStatus::outside : (edge ? HullStatus::boundary : HullStatus::interior);
        auto got = hull_membership<Rational>(p, v);
        EXPECT_EQ(got.status, expect) << "trial " << checked;
        if (got.status == HullStatus::outside) {
            for (const auto& q : v)
                EXPECT_LE(got.normal[0] * q[0] + got.normal[1] * q[1] + got.offset, 0);
            EXPECT_GT(got.normal[0] * p[0] + got.normal[1] * p[1] + got.offset, 0);
        }
        ++checked;
    }
}

TEST(Geometry, ProjectionAndSpan)
{
    auto xaxis = AffineSubspace::from_directions(pt({0, 0}), pt({1, 0}));
    auto p = project_onto(pt({1, 1}), xaxis);
    EXPECT_NEAR(p[0], 1, 1e-12);
    EXPECT_NEAR(p[1], 0, 1e-12);
    Eigen::MatrixXd dirs(3, 2);
    dirs << 1, 0, 0, 1, 0, 0;
    auto plane = AffineSubspace::from_directions(pt({0, 0, 0}), dirs);
    p = project_onto(pt({3, 4, 5}), plane);
    EXPECT_LT((p - pt({3, 4, 0})).norm(), 1e-12);
    EXPECT_LT((project_onto(p, plane) - p).norm(), 1e-12);
    EXPECT_THROW(project_onto(pt({1, 2}), plane), Error);

    EXPECT_EQ(affine_span({pt({0, 0}), pt({1, 0}), pt({3, 0})}).dim(), 1);
    EXPECT_EQ(affine_span({pt({2, 3})}).dim(), 0);
    EXPECT_EQ(affine_span({pt({0, 0}), pt({1, 0}), pt({0, 1})}).dim(), 2);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
        Eigen::MatrixXd d(4, 2);
        for (int i = 0; i < 8; ++i)
            d(i % 4, i / 4) = nd(rng);
        auto L = AffineSubspace::from_directions(pt({nd(rng), nd(rng), nd(rng), nd(rng)}), d);
        EXPECT_LT((L.basis.transpose() * L.basis - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-12);
        Point q = pt({nd(rng), nd(rng), nd(rng), nd(rng)});
        Point r = project_onto(q, L);
        EXPECT_LT((L.basis.transpose() * (q - r)).norm(), 1e-12 * std::max(1.0, q.norm()));
        EXPECT_LE((r - L.base).norm(), (q - L.base).norm() + 1e-12);
    }
}

TEST(Potential, ClosedFormExamples)
{
    ChargeConfig one({pt({0, 0})}, {1});
    EXPECT_DOUBLE_EQ(eval_potential(one, 1, pt({1, 0})), 1.0);
    auto g = gradient(one, 1, pt({1, 0}));
    EXPECT_NEAR(g[0], -2, 1e-14);
    EXPECT_NEAR(g[1], 0, 1e-14);
    ChargeConfig two({pt({-1, 0}), pt({1, 0})}, {1, 1});
    EXPECT_DOUBLE_EQ(eval_potential(two, 1, pt({0, 0})), 2.0);
    EXPECT_DOUBLE_EQ(eval_potential(two, 1, pt({0, 1})), 1.0);
    EXPECT_LT(gradient(two, 2.5, pt({0, 0})).norm(), 1e-14);
    EXPECT_THROW(eval_potential(two, 1, pt({1, 0})), Error);
    EXPECT_THROW(gradient(two, 1, pt({-1, 0})), Error);
}

TEST(Potential, AxisPairHasIndexTwoInSpace)
{
    ChargeConfig cfg({pt({-1, 0, 0}), pt({1, 0, 0})}, {1, 1});
    auto h = hessian(cfg, 1, pt({0, 0, 0}));
    EXPECT_EQ(h.morse_index, 2);
    EXPECT_EQ(h.negative + h.zero + h.positive, 3);
    EXPECT_EQ(h.positive, 1);
}

TEST(Potential, FiniteDifferenceOracle)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ad(0.2, 3.0);
    for (int t = 0; t < 60; ++t) {
        auto cfg = random_config(rng, 2 + t % 4, 2 + t % 2, t % 3 != 0);
        Exponent a(ad(rng));
        Point x = random_far_point(rng, cfg);
        const double h = 1e-6;
        auto g = gradient(cfg, a, x);
        auto H = hessian_matrix(cfg, a, x);
        Eigen::VectorXd fd(x.size());
        Eigen::MatrixXd fdh(x.size(), x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            Point e = Point::Zero(x.size());
            e[k] = h;
            fd[k] = (eval_potential(cfg, a, x + e) - eval_potential(cfg, a, x - e)) / (2 * h);
            fdh.col(k) = (gradient(cfg, a, x + e) - gradient(cfg, a, x - e)) / (2 * h);
        }
        EXPECT_LT((fd - g).norm(), 1e-6 * std::max(1.0, g.norm()));
        EXPECT_LT((fdh - H).norm(), 1e-5 * std::max(1.0, H.norm()));
        EXPECT_LT((H - H.transpose()).norm(), 1e-12 * std::max(1.0, H.norm()));
        Eigen::VectorXd xi = Eigen::VectorXd::Random(x.size());
        double direct = 0;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            Eigen::VectorXd d = x - cfg.sites[i];
            double rho = d.squaredNorm(), dr = 2 * d.dot(xi);
            direct += cfg.values[i] * std::pow(rho, -a.alpha - 2) *
                      (dr * dr - 2 / (a.alpha + 1) * rho * xi.squaredNorm());
        }
        direct *= a.alpha * (a.alpha + 1);
        EXPECT_NEAR(hessian_form(cfg, a, x, xi), direct, 1e-12 * std::max(1.0, std::abs(direct)));
        EXPECT_NEAR(xi.dot(H * xi), direct, 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST(Potential, VInfinityAndRestriction)
{
    const double s = std::sqrt(3.0) / 2;
    ChargeConfig eq({pt({1, 0}), pt({-0.5, s}), pt({-0.5, -s})}, {1, 1, 1});
    EXPECT_NEAR(v_infinity(eq, pt({0, 0})), 1.0, 1e-12);
    EXPECT_EQ(v_infinity(eq, pt({1, 0})), 0.0);
    ChargeConfig line({pt({0}), pt({1})}, {1, 1});
    EXPECT_DOUBLE_EQ(v_infinity(line, pt({0.25})), 0.0625);

    ChargeConfig cfg({pt({0, 1}), pt({1, -2}), pt({3, 0.5})}, {1, 2, -0.5});
    auto L = AffineSubspace::from_directions(pt({0, 0}), pt({1, 0}));
    auto r = restrict_to(cfg, L);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_NEAR(r.offsets_sq[1], 4.0, 1e-14);
    for (double t : {-1.3, 0.4, 2.2}) {
        Point tt = pt({t});
        EXPECT_NEAR(eval_restricted(r, 1.5, tt), eval_potential(cfg, 1.5, L.from_coordinates(tt)), 1e-12);
    }
}

TEST(Potential, ValidationErrors)
{
    EXPECT_THROW(ChargeConfig({pt({0, 0}), pt({0, 0})}, {1, 1}), Error);
    EXPECT_THROW(ChargeConfig({pt({0, 0})}, {0}), Error);
    EXPECT_THROW(ChargeConfig({pt({0, 0}), pt({1})}, {1, 1}), Error);
    EXPECT_THROW(Exponent(-1.0), Error);
    EXPECT_EQ(Exponent::ratio(7, 3).exact(), Rational(7, 3));
    try {
        ChargeConfig({pt({0, 0}), pt({0, 0})}, {1, 1});
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::duplicate_sites);
    }
}

TEST(Interval, EnclosesOperations)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 500; ++t) {
        double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        Interval x(std::min(a, b), std::max(a, b)), y(std::min(c, d), std::max(c, d));
        double px = x.lo() + (x.hi() - x.lo()) * 0.37, py = y.lo() + (y.hi() - y.lo()) * 0.81;
        EXPECT_TRUE((x + y).contains(px + py));
        EXPECT_TRUE((x - y).contains(px - py));
        EXPECT_TRUE((x * y).contains(px * py));
        EXPECT_TRUE(sqr(x).contains(px * px));
        EXPECT_TRUE(exp(x).contains(std::exp(px)));
        if (x.lo() > 0)
            EXPECT_TRUE(log(x).contains(std::log(px)));
    }
    EXPECT_EQ(Interval(1, 2).sign(), 1);
    EXPECT_EQ(Interval(-2, -1).sign(), -1);
    EXPECT_EQ(Interval(-1, 1).sign(), 0);
}

TEST(Polynomial, ArithmeticGcdAndSturm)
{
    auto X = RationalPolynomial::x();
    auto p = (X - Rational(1)) * (X - Rational(2)) * (X + Rational(3));
    EXPECT_EQ(p.degree(), 3);
    EXPECT_EQ(p(Rational(2)), Rational(0));
    auto [q, r] = p.divmod(X - Rational(1));
    EXPECT_TRUE(r.is_zero());
    EXPECT_EQ(q, (X - Rational(2)) * (X + Rational(3)));
    auto g = gcd(p, (X - Rational(2)) * (X * X + Rational(1)));
    EXPECT_EQ(g, X - Rational(2));

    SturmSequence s(p);
    EXPECT_EQ(s.count_real(), 3);
    EXPECT_EQ(s.count(Rational(0), Rational(5)), 2);
    EXPECT_EQ(s.count(Rational(-10), Rational(0)), 1);
    SturmSequence none(X * X + Rational(1));
    EXPECT_EQ(none.count_real(), 0);
    EXPECT_THROW(SturmSequence{RationalPolynomial{}}, Error);
}

TEST(Bounds, ChargeBoundValues)
{
    EXPECT_EQ(charge_bound(3), BigInt(139314069504ll));
    EXPECT_EQ(charge_bound(2), big_pow(4, 4) * big_pow(6, 4));
    EXPECT_EQ(charge_bound_alt(2), 2 * big_pow(4, 4) * big_pow(7, 4));
    auto d = charge_degree_data(3);
    EXPECT_EQ(d.degrees.size(), 5u);
    EXPECT_EQ(d.k, 6);
    EXPECT_THROW(charge_bound(1), Error);
    DegreeData simple{{2, 3}, 0};
    EXPECT_EQ(khovanskii_bound(simple), BigInt(6));
    DegreeData one_exp{{1}, 1};
    EXPECT_EQ(khovanskii_bound(one_exp), BigInt(2));
    DegreeData two_exp{{1, 1}, 2};
    EXPECT_EQ(khovanskii_bound(two_exp), BigInt(18));
    EXPECT_THROW(khovanskii_bound(DegreeData{{0}, 1}), Error);
}

TEST(Bounds, MinkowskiSumMatchesNaive)
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> c(-6, 6);
    for (int t = 0; t < 300; ++t) {
        std::vector<LatticePoint> a, b;
        for (int i = 0; i < 1 + t % 7; ++i)
            a.push_back({c(rng), c(rng)});
        for (int i = 0; i < 1 + t % 5; ++i)
            b.push_back({c(rng), c(rng)});
        auto A = LatticePolygon::hull(a), B = LatticePolygon::hull(b);
        EXPECT_EQ(minkowski_sum(A, B), minkowski_sum_naive(A, B)) << "trial " << t;
        EXPECT_GE(mixed_volume_2x(A, B), 0);
        EXPECT_EQ(mixed_volume_2x(A, B), mixed_volume_2x(B, A));
    }
}

TEST(Bounds, MixedVolumeKnownValues)
{
    // Two generic linear forms: unit simplices, one common root.
    auto s = LatticePolygon::hull({{0, 0}, {1, 0}, {0, 1}});
    EXPECT_EQ(mixed_volume_2x(s, s), 1);
    // Dense degrees 2 and 3: Bezout count 6.
    auto s2 = LatticePolygon::hull({{0, 0}, {2, 0}, {0, 2}});
    auto s3 = LatticePolygon::hull({{0, 0}, {3, 0}, {0, 3}});
    EXPECT_EQ(mixed_volume_2x(s2, s3), 6);
    // Unit squares: bidegree (1,1) systems have 2 roots.
    auto sq = LatticePolygon::hull({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    EXPECT_EQ(mixed_volume_2x(sq, sq), 2);
    auto seg = LatticePolygon::hull({{0, 0}, {2, 0}});
    EXPECT_EQ(mixed_volume_2x(seg, seg), 0);
    EXPECT_EQ(s.doubled_area(), 1);
    EXPECT_TRUE(s2.contains(LatticePoint{1, 1}));
    EXPECT_FALSE(s2.strictly_contains(LatticePoint{1, 1}));
    EXPECT_TRUE(s3.strictly_contains(LatticePoint{1, 1}));
}
