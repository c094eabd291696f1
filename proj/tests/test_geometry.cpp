#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pmf/geometry.hpp"
#include "pmf/random.hpp"

using namespace pmf;

namespace {

// Midpoint rule over phi of the projected length of the target; for a
// segment of length L at angle theta the projection is L |sin(phi - theta)|.
double projected_measure(const Segment& s, int steps = 200000) {
    Point d = s.b - s.a;
    double sum = 0.0;
    for (int i = 0; i < steps; ++i) {
        double phi = kPi * (i + 0.5) / steps;
        sum += std::abs(dot(d, Point{std::sin(phi), std::cos(phi)}));
    }
    return sum * kPi / steps;
}

// Reveal time by bisection on window membership.
double bisect_reveal(const WindowFamily& f, Point p) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f.window_at(mid).contains(p, 0.0)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

TEST(Geometry, UnitSegmentHitMeasureIsTwo) {
    auto h = mu_hit_measure(Segment{{0, 0}, {1, 0}});
    EXPECT_NEAR(h.value, 2.0, 2e-9);
    EXPECT_FALSE(h.degenerate);
}

TEST(Geometry, SegmentHitMeasureMatchesQuadrature) {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        Segment s{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, {rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        double closed = mu_hit_measure(s).value;
        EXPECT_NEAR(closed, 2.0 * s.length(), 1e-9 * 2.0 * s.length());
        if (i < 5) EXPECT_NEAR(closed, projected_measure(s), 1e-6 * closed);
    }
}

TEST(Geometry, DiscHitMeasureIsPerimeter) {
    EXPECT_NEAR(mu_hit_measure(ConvexDomain::disc({0.3, -0.2}, 1.0)).value, 2.0 * kPi, 1e-6);
    EXPECT_NEAR(mu_hit_measure(ConvexDomain::square({0, 0}, 0.5)).value, 2.0, 1e-12);
}

TEST(Geometry, PointTargetIsDegenerate) {
    auto h = mu_hit_measure(Segment{{1, 1}, {1, 1}});
    EXPECT_EQ(h.value, 0.0);
    EXPECT_TRUE(h.degenerate);
}

TEST(Geometry, LineChart) {
    Line l(0.7, 0.4);
    EXPECT_NEAR(l.offset(l.foot()), 0.0, 1e-15);
    EXPECT_NEAR(norm(l.foot()), 0.4, 1e-15);
    // turning the normal around flips the sign of the offset
    Line flipped(0.7 + kPi, -0.4);
    EXPECT_TRUE(same_line(l, flipped));
    EXPECT_GE(flipped.phi, 0.0);
    EXPECT_LT(flipped.phi, kPi);
}

TEST(Geometry, IntersectUnitOffsets) {
    auto r = intersect(Line(0.0, 1.0), Line(kPi / 2, 1.0));
    ASSERT_TRUE(r.point);
    EXPECT_NEAR(r.point->x, 1.0, 1e-12);
    EXPECT_NEAR(r.point->y, 1.0, 1e-12);
}

TEST(Geometry, IntersectEqualAndParallel) {
    auto same = intersect(Line(0.3, 0.1), Line(0.3, 0.1));
    EXPECT_FALSE(same.point);
    EXPECT_TRUE(same.colinear);
    auto par = intersect(Line(0.3, 0.1), Line(0.3, 0.5));
    EXPECT_FALSE(par.point);
    EXPECT_FALSE(par.colinear);
}

TEST(Geometry, SeparatesExamples) {
    Line x_axis = Line::through(Point{0, 0}, Point{1, 0});
    EXPECT_FALSE(separates(x_axis, {{0, 1}, {0, -1}}));
    EXPECT_TRUE(separates(x_axis, {{0, 1}, {2, 3}}));
}

TEST(Geometry, SeparatesIgnoresOrderAndInteriorPoints) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Point> pts;
        for (int i = 0; i < 5; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        Line l(rng.uniform(0, kPi), rng.uniform(-1.5, 1.5));
        bool base = separates(l, pts);
        auto shuffled = pts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
        EXPECT_EQ(separates(l, shuffled), base);
        // a convex combination stays inside the hull
        shuffled.push_back(0.25 * pts[0] + 0.25 * pts[1] + 0.5 * pts[2]);
        EXPECT_EQ(separates(l, shuffled), base);
    }
}

TEST(Geometry, HomothetyAnchorOnSquare) {
    auto f = WindowFamily::homothety(ConvexDomain::square({0, 0}, 1.0), {0.5, 0.5});
    Line vertical = Line::through(Point{0.25, 0.0}, Point{0.25, 1.0});
    Anchor a = f.anchor(vertical);
    // the whole piece of the line with |y - 0.5| <= 0.25 appears at t = 0.5
    EXPECT_NEAR(a.point.x, 0.25, 1e-12);
    EXPECT_LE(std::abs(a.point.y - 0.5), 0.25 + 1e-12);
    EXPECT_NEAR(a.time, 0.5, 1e-12);
    EXPECT_NEAR(f.reveal_time({0.25, 0.5}), 0.5, 1e-12);
}

TEST(Geometry, RevealTimeAgreesWithBisection) {
    Rng rng(3);
    std::vector<WindowFamily> fams = {
        WindowFamily::homothety(ConvexDomain::disc({0, 0}, 1.0), {0.2, -0.1}),
        WindowFamily::concentric_disc(ConvexDomain::disc({0.1, 0.1}, 0.8)),
        WindowFamily::homothety(ConvexDomain::polygon({{0, 0}, {2, 0}, {2.5, 1}, {0.5, 1.5}}), {1.0, 0.6}),
    };
    for (const auto& f : fams) {
        for (int i = 0; i < 50; ++i) {
            Point p = f.base().sample_uniform(rng);
            EXPECT_NEAR(f.reveal_time(p), bisect_reveal(f, p), 1e-9);
            Line l = Line::through(p, rng.uniform(0, kPi));
            Anchor a = f.anchor(l);
            EXPECT_NEAR(f.reveal_time(a.point), a.time, 1e-12);
            EXPECT_NEAR(bisect_reveal(f, a.point), a.time, 1e-9);
            EXPECT_LE(a.time, f.reveal_time(p) + 1e-12);
        }
    }
}

TEST(Geometry, PointAtInvertsRevealTime) {
    auto f = WindowFamily::homothety(ConvexDomain::disc({0, 0}, 1.0), {0.3, 0.1});
    Line l(1.1, 0.2);
    Anchor a = f.anchor(l);
    for (double t : {a.time + 0.05, 0.6, 0.95}) {
        for (int side : {-1, 1}) {
            Point p = f.point_at(l, side, t);
            EXPECT_NEAR(f.reveal_time(p), t, 1e-9);
            EXPECT_NEAR(l.offset(p), 0.0, 1e-9);
        }
    }
}

TEST(Geometry, RevealTimeOutsideDomainThrows) {
    auto f = WindowFamily::homothety(ConvexDomain::disc({0, 0}, 1.0), {0, 0});
    EXPECT_THROW(f.reveal_time({2.0, 0.0}), GeometryError);
}

TEST(Geometry, ChordMissesAndTangents) {
    auto d = ConvexDomain::disc({0, 0}, 1.0);
    EXPECT_FALSE(d.chord(Line(0.2, 1.5)));
    EXPECT_FALSE(d.chord(Line(0.2, 1.0)));
    auto c = d.chord(Line(0.2, 0.6));
    ASSERT_TRUE(c);
    EXPECT_NEAR(c->length(), 2.0 * std::sqrt(1.0 - 0.36), 1e-12);
}

TEST(Geometry, PolygonMustBeConvex) {
    EXPECT_THROW(ConvexDomain::polygon({{0, 0}, {1, 0}, {0.2, 0.2}, {0, 1}}), GeometryError);
    EXPECT_THROW(ConvexDomain::polygon({{0, 0}, {1, 0}, {2, 0}, {0, 1}}), GeometryError);
    // clockwise input is reordered
    auto cw = ConvexDomain::polygon({{0, 0}, {0, 1}, {1, 0}});
    EXPECT_GT(cross(cw.vertices()[1] - cw.vertices()[0], cw.vertices()[2] - cw.vertices()[1]), 0.0);
}
