#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pmf/activity.hpp"
#include "pmf/estimators.hpp"

using namespace pmf;

namespace {

// Riemann sum of m(phi) |<d, n(phi)>| over phi: M([[seg]]) for a density
// that does not depend on rho.
double hit_by_quadrature(const ActivityMeasure& act, const Segment& s, int steps = 100000) {
    Point d = s.b - s.a;
    double sum = 0.0;
    for (int i = 0; i < steps; ++i) {
        double phi = kPi * (i + 0.5) / steps;
        sum += act.density(phi, 0.0) * std::abs(dot(d, Point{std::sin(phi), std::cos(phi)}));
    }
    return sum * kPi / steps;
}

double ks_against(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    double d = 0.0, n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    return d;
}

}  // namespace

TEST(Activity, HomogeneousSegmentHazard) {
    EXPECT_NEAR(ActivityMeasure::homogeneous(1.0).measure_hit({{0, 0}, {1, 0}}), 2.0, 1e-12);
    EXPECT_NEAR(ActivityMeasure::homogeneous(3.0).measure_hit({{0, 0}, {0.3, 0.4}}), 3.0, 1e-12);
    EXPECT_EQ(ActivityMeasure::homogeneous(0.0).measure_hit({{0, 0}, {1, 1}}), 0.0);
}

TEST(Activity, HazardAgreesWithQuadrature) {
    auto homog = ActivityMeasure::homogeneous(1.0);
    EXPECT_NEAR(homog.measure_hit({{0, 0}, {1, 0}}), hit_by_quadrature(homog, {{0, 0}, {1, 0}}), 1e-6);
    auto aniso = ActivityMeasure::anisotropic(1.3, 0.6);
    for (double theta : {0.0, 0.4, 1.2, 2.9}) {
        Segment s{{0.1, 0.2}, {0.1 + 0.7 * std::cos(theta), 0.2 + 0.7 * std::sin(theta)}};
        double q = hit_by_quadrature(aniso, s);
        EXPECT_NEAR(aniso.measure_hit(s), q, 1e-6 * q);
    }
    // homogeneous activity equals lambda times the invariant measure
    Segment s{{0, 0}, {0.3, -0.8}};
    EXPECT_NEAR(ActivityMeasure::homogeneous(2.5).measure_hit(s), 2.5 * mu_hit_measure(s).value, 1e-12);
}

TEST(Activity, CustomDensityHazard) {
    auto custom = ActivityMeasure::custom([](double phi, double) { return 1.0 + 0.5 * std::cos(2.0 * phi); }, 1.5);
    auto aniso = ActivityMeasure::anisotropic(1.0, 0.5);
    Segment s{{0, 0}, {0.4, 0.3}};
    EXPECT_NEAR(custom.measure_hit(s), aniso.measure_hit(s), 1e-6 * aniso.measure_hit(s));
}

TEST(Activity, LineProcessMeanCount) {
    auto act = ActivityMeasure::homogeneous(1.0);
    auto sq = ConvexDomain::square({0, 0}, 0.5);
    Rng rng(7);
    const int n = 20000;
    double sum = 0.0, sq_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double c = static_cast<double>(act.sample_line_process(sq, rng).size());
        sum += c;
        sq_sum += c * c;
    }
    double mean = sum / n, se = std::sqrt((sq_sum / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - 2.0), 3.0 * se);
}

TEST(Activity, LineProcessIntensityInRectangle) {
    // count of accepted lines with phi in [0.2, 0.9] hitting the unit disc
    auto act = ActivityMeasure::anisotropic(1.0, 0.8);
    auto disc = ConvexDomain::disc({0, 0}, 1.0);
    Rng rng(17);
    const int n = 20000;
    double sum = 0.0, sq_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double c = 0.0;
        for (const Line& l : act.sample_line_process(disc, rng))
            if (l.phi >= 0.2 && l.phi <= 0.9 && l.rho >= 0.0) c += 1.0;
        sum += c;
        sq_sum += c * c;
    }
    double mean = sum / n, se = std::sqrt((sq_sum / n - mean * mean) / n);
    // integral of lambda (1 + a cos 2 phi) over phi in [0.2, 0.9], rho in [0, 1]
    double expect = (0.9 - 0.2) + 0.8 * 0.5 * (std::sin(1.8) - std::sin(0.4));
    EXPECT_LE(std::abs(mean - expect), 3.0 * se);
}

TEST(Activity, TurnDirectionGapLaw) {
    auto act = ActivityMeasure::homogeneous(1.0);
    Rng rng(19);
    Line incoming(0.8, 0.1);
    Point at = incoming.at(0.2);
    std::vector<double> gaps;
    for (int i = 0; i < 100000; ++i) {
        Line l = act.sample_turn_direction(at, incoming, rng);
        ASSERT_LE(std::abs(l.offset(at)), kGeoEps);
        double d = l.phi - incoming.phi;
        if (d < 0.0) d += kPi;
        gaps.push_back(d);
    }
    EXPECT_LT(ks_against(gaps, [](double x) { return 0.5 * (1.0 - std::cos(x)); }), 0.01);
}

TEST(Activity, VertexPairMarginalUniform) {
    auto act = ActivityMeasure::homogeneous(2.0);
    Rng rng(23);
    std::vector<double> phis;
    for (int i = 0; i < 100000; ++i) {
        auto [l1, l2] = act.sample_vertex_pair({0.3, 0.3}, rng);
        ASSERT_LE(std::abs(l1.offset({0.3, 0.3})), kGeoEps);
        ASSERT_LE(std::abs(l2.offset({0.3, 0.3})), kGeoEps);
        phis.push_back(l1.phi);
    }
    EXPECT_LT(ks_against(phis, [](double x) { return x / kPi; }), 0.01);
}

TEST(Activity, HitRateThroughPointMatchesQuadrature) {
    auto act = ActivityMeasure::anisotropic(1.0, -0.7);
    Point p{0.2, 0.1};
    for (double phi : {0.0, 0.5, 2.0}) {
        double sum = 0.0;
        const int steps = 200000;
        for (int i = 0; i < steps; ++i) {
            double q = kPi * (i + 0.5) / steps;
            sum += act.density(q, 0.0) * std::abs(std::sin(q - phi));
        }
        double expect = sum * kPi / steps;
        EXPECT_NEAR(act.hit_rate(p, phi), expect, 1e-6 * expect);
    }
}

TEST(Activity, IntersectionMeasureClosedForm) {
    EXPECT_NEAR(ActivityMeasure::homogeneous(1.0).intersection_measure(ConvexDomain::square({0, 0}, 1.0)), kPi,
                1e-12);
    EXPECT_NEAR(ActivityMeasure::homogeneous(2.0).intersection_measure(ConvexDomain::disc({0, 0}, 0.5)),
                4.0 * kPi * kPi * 0.25, 1e-12);
}

TEST(Activity, IntersectionMeasureByPairSampling) {
    // half the mass of hitting pairs times the chance that they meet inside
    auto act = ActivityMeasure::anisotropic(1.0, 0.5);
    auto sq = ConvexDomain::square({0, 0}, 1.0);
    Rng rng(29);
    const int n = 400000;
    int meet = 0;
    for (int i = 0; i < n; ++i) {
        Line a = act.sample_hitting_line(sq, rng), b = act.sample_hitting_line(sq, rng);
        auto x = intersect(a, b);
        if (x.point && sq.contains(*x.point, 0.0)) ++meet;
    }
    double p = static_cast<double>(meet) / n, mass = act.hit_mass(sq);
    double est = 0.5 * mass * mass * p, se = 0.5 * mass * mass * std::sqrt(p * (1 - p) / n);
    EXPECT_LE(std::abs(est - act.intersection_measure(sq)), 3.0 * se);
}

TEST(Activity, HitMassIsPerimeterTimesLambda) {
    EXPECT_NEAR(ActivityMeasure::homogeneous(1.5).hit_mass(ConvexDomain::disc({0, 0}, 2.0)), 1.5 * 4.0 * kPi, 1e-12);
    // anisotropic: integral of m(phi) times the width in direction phi; for a disc the width is constant
    EXPECT_NEAR(ActivityMeasure::anisotropic(1.0, 0.9).hit_mass(ConvexDomain::disc({0, 0}, 1.0)), 2.0 * kPi, 1e-6);
}

TEST(Activity, WindowMassByQuadrature) {
    auto aniso = ActivityMeasure::anisotropic(1.0, 0.5);
    Line l(0.6, 0.0);
    double eps = 0.05;
    // 2 eps_x times the integral of lambda (1 + a cos 2 phi) across the angular window
    double expect = 2.0 * eps * (2.0 * eps + 0.25 * (std::sin(2 * (0.6 + eps)) - std::sin(2 * (0.6 - eps))));
    EXPECT_NEAR(window_mass(aniso, l, {0, 0}, eps, eps), expect, 1e-9);
    EXPECT_NEAR(window_mass(ActivityMeasure::homogeneous(2.0), l, {0, 0}, 0.02, 0.03), 2.0 * 0.04 * 0.06, 1e-15);
}

TEST(Activity, QuadratureReportsFailure) {
    EXPECT_THROW(integrate_adaptive([](double x) { return x > 0.5 ? 1.0 / (x - 0.5) : 0.0; }, 0.0, 1.0, 1e-10, 6),
                 QuadratureError);
    EXPECT_NEAR(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, kPi), 2.0, 1e-9);
}
