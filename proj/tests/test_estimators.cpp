#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmf/estimators.hpp"

using namespace pmf;

namespace {

WindowFamily unit_disc() { return WindowFamily::homothety(ConvexDomain::disc({0, 0}, 1.0), {0, 0}); }

MarkerConfig marker_at(Point x, double phi) { return MarkerConfig({{Line::through(x, phi), x}}); }

}  // namespace

TEST(Estimators, EmptyMarkerSetIsExactlyOne) {
    auto r = estimate_phi(MarkerConfig(), ActivityMeasure::homogeneous(1.0), unit_disc(), 10, 1);
    EXPECT_EQ(r.estimate, 1.0);
    EXPECT_EQ(r.se, 0.0);
}

TEST(Estimators, PalmSingleMarker) {
    auto act = ActivityMeasure::homogeneous(1.0);
    for (double phi : {0.2, 1.4}) {
        auto r = estimate_phi(marker_at({0, 0}, phi), act, unit_disc(), 4000, 5);
        EXPECT_GT(r.se, 0.0);
        EXPECT_LE(std::abs(r.estimate - 1.0), 3.0 * r.se + 1e-9) << r.estimate << " +- " << r.se;
    }
}

TEST(Estimators, PalmTwoMarkersGeneralPosition) {
    Point a{-0.2, 0.0}, b{0.2, 0.05};
    MarkerConfig mc({{Line::through(a, 0.7), a}, {Line::through(b, 2.2), b}});
    auto r = estimate_phi(mc, ActivityMeasure::homogeneous(1.0), unit_disc(), 4000, 6);
    EXPECT_LE(std::abs(r.estimate - 1.0), 3.0 * r.se) << r.estimate << " +- " << r.se;
}

TEST(Estimators, SingularMarkersAreRejected) {
    Point a{0, 0}, b{0.3, 0};
    MarkerConfig mc({{Line::through(a, b), a}, {Line::through(b, 1.0), b}});
    ASSERT_TRUE(mc.singular());
    EXPECT_THROW(estimate_phi(mc, ActivityMeasure::homogeneous(1.0), unit_disc(), 10, 1), std::invalid_argument);
}

TEST(Estimators, MarkerHullContainsTheMarkers) {
    Point a{-0.2, 0.0}, b{0.2, 0.05}, c{0.0, 0.3};
    MarkerConfig mc({{Line::through(a, 0.7), a}, {Line::through(b, 2.2), b}, {Line::through(c, 1.1), c}});
    auto h = marker_hull(mc, 0.05);
    for (const auto& m : mc.markers()) EXPECT_LE(h.boundary_distance(m.x), -0.05 + 1e-12);
    EXPECT_THROW(marker_hull(MarkerConfig(), 0.1), std::invalid_argument);
}

TEST(Estimators, ZeroActivityCropIsTheMarkedCount) {
    Point a{-0.2, 0.0}, b{0.2, 0.05};
    MarkerConfig mc({{Line::through(a, 0.7), a}, {Line::through(b, 2.2), b}});
    for (StopRule rule : {StopRule::tangency, StopRule::immediate}) {
        auto r = estimate_crop_expectation(mc, ActivityMeasure::homogeneous(0.0), unit_disc(), rule, 50, 3);
        EXPECT_EQ(r.estimate, static_cast<double>(count_marked(mc, ConvexDomain::disc({0, 0}, 1.0))));
        EXPECT_EQ(r.se, 0.0);
    }
}

TEST(Estimators, CropSingleMarkerIsOne) {
    auto r = estimate_crop_expectation(marker_at({0.1, 0.1}, 0.4), ActivityMeasure::homogeneous(1.0), unit_disc(),
                                       StopRule::tangency, 2000, 8);
    EXPECT_LE(std::abs(r.estimate - 1.0), 3.0 * r.se + 1e-12);
}

TEST(Estimators, ThreadCountDoesNotChangeResults) {
    Point a{-0.2, 0.0}, b{0.2, 0.05};
    MarkerConfig mc({{Line::through(a, 0.7), a}, {Line::through(b, 2.2), b}});
    auto act = ActivityMeasure::homogeneous(1.0);
    auto c1 = estimate_crop_expectation(mc, act, unit_disc(), StopRule::tangency, 300, 9, 1);
    auto c3 = estimate_crop_expectation(mc, act, unit_disc(), StopRule::tangency, 300, 9, 3);
    EXPECT_EQ(c1.estimate, c3.estimate);
    EXPECT_EQ(c1.se, c3.se);
    PhiOptions o1, o3;
    o3.threads = 3;
    auto p1 = estimate_phi(mc, act, unit_disc(), 500, 10, o1);
    auto p3 = estimate_phi(mc, act, unit_disc(), 500, 10, o3);
    EXPECT_EQ(p1.estimate, p3.estimate);
    EXPECT_EQ(p1.se, p3.se);
}

TEST(Estimators, PartitionWithoutActivity) {
    auto r = verify_partition(ActivityMeasure::homogeneous(0.0), ConvexDomain::square({0, 0}, 0.5), 100, 1);
    EXPECT_EQ(r.sum.estimate, 1.0);
    EXPECT_EQ(r.target, 1.0);
    EXPECT_TRUE(r.pass);
}

TEST(Estimators, PartitionIdentityAtHalfActivity) {
    auto act = ActivityMeasure::homogeneous(0.5);
    for (const auto& dom : {ConvexDomain::square({0, 0}, 0.5), ConvexDomain::disc({0, 0}, 0.25)}) {
        auto r = verify_partition(act, dom, 4000, 12);
        EXPECT_NEAR(r.target, std::exp(act.intersection_measure(dom)), 1e-12);
        EXPECT_LE(std::abs(r.difference), 3.0 * r.sum.se) << r.sum.estimate << " vs " << r.target;
        EXPECT_TRUE(r.reliable);
    }
}

TEST(Estimators, KsTwoSample) {
    std::vector<double> a, b, c;
    Rng rng(15);
    for (int i = 0; i < 2000; ++i) {
        a.push_back(rng.uniform());
        b.push_back(rng.uniform());
        c.push_back(rng.uniform() + 0.1);
    }
    EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
    EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
    auto same = ks_two_sample(a, a);
    EXPECT_EQ(same.statistic, 0.0);
    EXPECT_NEAR(same.p_value, 1.0, 1e-12);
    EXPECT_THROW(ks_two_sample({}, a), std::invalid_argument);
}

TEST(Estimators, KsStatisticOnKnownSamples) {
    // empirical CDFs differ by at most 1/2 at x = 2
    auto r = ks_two_sample({1, 2, 3, 4}, {3, 4, 5, 6});
    EXPECT_NEAR(r.statistic, 0.5, 1e-15);
    auto t = ks_two_sample({1, 2}, {3, 4});
    EXPECT_NEAR(t.statistic, 1.0, 1e-15);
}

TEST(Estimators, DualityForOneMarker) {
    auto r = verify_duality(marker_at({0.0, 0.1}, 0.9), ActivityMeasure::homogeneous(1.0), unit_disc(),
                            StopRule::tangency, 2000, 2000, 16);
    EXPECT_TRUE(r.pass) << r.phi.estimate << " vs " << r.crop.estimate << " se " << r.combined_se;
    EXPECT_NEAR(r.difference, r.phi.estimate - r.crop.estimate, 1e-15);
    EXPECT_FALSE(r.phi_half.has_value());
}

TEST(Estimators, WindowMethodReportsHalfEpsilon) {
    PhiOptions o;
    o.method = PhiMethod::window;
    o.eps_x = o.eps_phi = 0.1;
    o.placements = 4;
    auto r = verify_duality(marker_at({0.1, 0.0}, 0.9), ActivityMeasure::homogeneous(1.0), unit_disc(),
                            StopRule::tangency, 400, 200, 17, o, 10.0);
    ASSERT_TRUE(r.phi_half.has_value());
    EXPECT_EQ(r.phi_half->eps_x, 0.05);
    EXPECT_TRUE(r.eps_slope.has_value());
    EXPECT_STREQ(to_string(PhiMethod::window), "window");
}
