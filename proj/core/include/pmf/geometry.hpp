#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pmf {

class Rng;

/// Coincidence, parallelism and concurrency tolerance (length units).
inline constexpr double kGeoEps = 1e-9;

inline constexpr double kPi = std::numbers::pi;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    Point& operator+=(Point o) { x += o.x; y += o.y; return *this; }
    Point& operator-=(Point o) { x -= o.x; y -= o.y; return *this; }
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Reduces an angle to [0, pi).
double wrap_angle(double phi);

/// Distance between two line angles on the circle of directions [0, pi).
double angle_gap(double phi1, double phi2);

/// A straight line in (phi, rho) chart coordinates: the point
/// (rho sin phi, rho cos phi) is its foot from the origin, so the unit
/// normal is (sin phi, cos phi) and the line is {p : <p, n> = rho}.
struct Line {
    double phi = 0.0;
    double rho = 0.0;

    Line() = default;
    Line(double phi_, double rho_);

    /// The line through p whose chart angle is phi.
    static Line through(Point p, double phi);
    /// The line through two distinct points.
    static Line through(Point a, Point b);

    Point normal() const { return {std::sin(phi), std::cos(phi)}; }
    Point direction() const { return {std::cos(phi), -std::sin(phi)}; }
    Point foot() const { return rho * normal(); }

    /// Signed distance of p from the line along the normal.
    double offset(Point p) const { return dot(p, normal()) - rho; }
    /// Arc-length coordinate of the projection of p, measured from foot().
    double param(Point p) const { return dot(p - foot(), direction()); }
    Point at(double u) const { return foot() + u * direction(); }

    bool contains(Point p, double tol = kGeoEps) const { return std::abs(offset(p)) <= tol; }
};

/// Lines are equal when their charts agree within tolerance; lines with phi
/// near 0 and near pi are identified with a flipped offset.
bool same_line(const Line& a, const Line& b, double tol = kGeoEps);

struct Segment {
    Point a;
    Point b;

    double length() const { return distance(a, b); }
    Line line() const { return Line::through(a, b); }
    Point midpoint() const { return 0.5 * (a + b); }
};

/// Distance from p to the closed segment s.
double distance_to_segment(Point p, const Segment& s);

struct LineIntersection {
    std::optional<Point> point;
    bool colinear = false;
};

/// Intersection of two lines; absent when parallel within tolerance.
LineIntersection intersect(const Line& l1, const Line& l2);

/// Proper or touching intersection of two closed segments.
std::optional<Point> intersect(const Segment& s1, const Segment& s2);

/// True iff the line misses the convex hull of the given points.
bool separates(const Line& l, const std::vector<Point>& hull_points, double tol = kGeoEps);

/// Parameter interval [u0, u1] along Line::param of a chord.
struct Chord {
    double u0 = 0.0;
    double u1 = 0.0;
    double length() const { return u1 - u0; }
};

/// Open bounded convex window: a disc or a convex polygon with vertices in
/// counter-clockwise order.
class ConvexDomain {
public:
    enum class Shape { disc, polygon };

    static ConvexDomain disc(Point center, double radius);
    static ConvexDomain polygon(std::vector<Point> ccw_vertices);
    static ConvexDomain square(Point lower_left, double side);

    Shape shape() const { return shape_; }
    Point center() const { return center_; }
    double radius() const { return radius_; }
    const std::vector<Point>& vertices() const { return vertices_; }

    bool contains(Point p, double tol = kGeoEps) const;
    /// Signed distance from p to the boundary; negative inside.
    double boundary_distance(Point p) const;
    bool on_boundary(Point p, double tol = 1e-7) const { return std::abs(boundary_distance(p)) <= tol; }

    /// Chord of the closed domain cut by l; absent for misses and chords
    /// shorter than kGeoEps (tangencies).
    std::optional<Chord> chord(const Line& l) const;
    /// Clips a segment to the closed domain.
    std::optional<Segment> clip(const Segment& s) const;

    /// Range of rho for lines with angle phi hitting the domain.
    std::pair<double, double> support(double phi) const;
    double width(double phi) const;

    double perimeter() const;
    double area() const;
    /// Smallest enclosing disc is not required; any enclosing disc suffices.
    std::pair<Point, double> bounding_disc() const;
    Point sample_uniform(Rng& rng) const;

    /// The image under p -> origin + t (p - origin).
    ConvexDomain scaled(Point origin, double t) const;

private:
    Shape shape_ = Shape::disc;
    Point center_;
    double radius_ = 0.0;
    std::vector<Point> vertices_;
};

struct HitMeasure {
    double value = 0.0;
    bool degenerate = false;
};

/// mu of the set of lines hitting a segment: twice its length.
HitMeasure mu_hit_measure(const Segment& s);
/// mu of the set of lines hitting a convex domain: its perimeter.
HitMeasure mu_hit_measure(const ConvexDomain& d);

struct Anchor {
    Point point;
    double time = 0.0;
};

/// Growing window family (D_t), t in [0, 1], with closed-form reveal times.
///  - homothety:      D_t = origin + t (closure(D) - origin)
///  - concentric disc: D_t = disc(center, t R), base must be a disc and
///                      origin its center
class WindowFamily {
public:
    enum class Kind { homothety, concentric_disc };

    static WindowFamily homothety(ConvexDomain base, Point origin);
    static WindowFamily concentric_disc(ConvexDomain base);

    Kind kind() const { return kind_; }
    const ConvexDomain& base() const { return base_; }
    Point origin() const { return origin_; }

    ConvexDomain window_at(double t) const;
    /// inf{t : p in D_t}.
    double reveal_time(Point p) const;
    /// First point of l revealed by the family and its reveal time.
    Anchor anchor(const Line& l) const;
    /// Point of l on the given side of its anchor (+1 along
    /// Line::direction, -1 against it) whose reveal time is t.
    Point point_at(const Line& l, int side, double t) const;
    Point point_at(const Line& l, const Anchor& a, int side, double t) const;

private:
    WindowFamily(Kind kind, ConvexDomain base, Point origin);

    Kind kind_;
    ConvexDomain base_;
    Point origin_;
    // homothety on a polygon: outward normals and origin-to-edge distances
    std::vector<Point> normals_;
    std::vector<double> heights_;
};

}  // namespace pmf
