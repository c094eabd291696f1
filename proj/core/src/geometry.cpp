#include "pmf/geometry.hpp"

#include <algorithm>
#include <limits>

#include "pmf/random.hpp"

namespace pmf {

double wrap_angle(double phi) {
    double r = std::fmod(phi, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r -= kPi;
    return r;
}

double angle_gap(double phi1, double phi2) {
    double d = std::abs(wrap_angle(phi1) - wrap_angle(phi2));
    return std::min(d, kPi - d);
}

Line::Line(double phi_, double rho_) {
    if (!std::isfinite(phi_) || !std::isfinite(rho_)) throw GeometryError("non-finite line parameters");
    double p = std::fmod(phi_, 2.0 * kPi);
    if (p < 0.0) p += 2.0 * kPi;
    double r = rho_;
    if (p >= kPi) {
        p -= kPi;
        r = -r;
    }
    if (p >= kPi) p = 0.0;
    phi = p;
    rho = r;
}

Line Line::through(Point p, double phi) {
    Line l(phi, 0.0);
    l.rho = dot(p, l.normal());
    return l;
}

Line Line::through(Point a, Point b) {
    Point d = b - a;
    if (norm(d) <= kGeoEps) throw GeometryError("line through coincident points");
    // direction is (cos phi, -sin phi)
    return through(a, std::atan2(-d.y, d.x));
}

bool same_line(const Line& a, const Line& b, double tol) {
    if (std::abs(a.phi - b.phi) <= tol) return std::abs(a.rho - b.rho) <= tol;
    if (std::abs(a.phi - b.phi) >= kPi - tol) return std::abs(a.rho + b.rho) <= tol;
    return false;
}

double distance_to_segment(Point p, const Segment& s) {
    Point d = s.b - s.a;
    double len2 = dot(d, d);
    if (len2 == 0.0) return distance(p, s.a);
    double u = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return distance(p, s.a + u * d);
}

LineIntersection intersect(const Line& l1, const Line& l2) {
    LineIntersection out;
    Point n1 = l1.normal();
    Point n2 = l2.normal();
    double det = cross(n1, n2);
    if (std::abs(det) <= kGeoEps) {
        out.colinear = same_line(l1, l2);
        return out;
    }
    out.point = Point{(l1.rho * n2.y - l2.rho * n1.y) / det, (n1.x * l2.rho - n2.x * l1.rho) / det};
    return out;
}

std::optional<Point> intersect(const Segment& s1, const Segment& s2) {
    Point r = s1.b - s1.a;
    Point q = s2.b - s2.a;
    double den = cross(r, q);
    Point w = s2.a - s1.a;
    if (std::abs(den) <= kGeoEps * (norm(r) + norm(q))) {
        // parallel; report a shared point when colinear and overlapping
        if (std::abs(cross(w, r)) > kGeoEps * norm(r)) return std::nullopt;
        double rr = dot(r, r);
        double t0 = dot(w, r) / rr;
        double t1 = t0 + dot(q, r) / rr;
        double lo = std::max(0.0, std::min(t0, t1));
        double hi = std::min(1.0, std::max(t0, t1));
        if (lo > hi + kGeoEps) return std::nullopt;
        return s1.a + lo * r;
    }
    double t = cross(w, q) / den;
    double u = cross(w, r) / den;
    double tol_t = kGeoEps / std::max(norm(r), kGeoEps);
    double tol_u = kGeoEps / std::max(norm(q), kGeoEps);
    if (t < -tol_t || t > 1.0 + tol_t || u < -tol_u || u > 1.0 + tol_u) return std::nullopt;
    return s1.a + t * r;
}

bool separates(const Line& l, const std::vector<Point>& hull_points, double tol) {
    bool pos = false;
    bool neg = false;
    for (Point p : hull_points) {
        double o = l.offset(p);
        if (std::abs(o) <= tol) return false;
        if (o > 0) pos = true; else neg = true;
        if (pos && neg) return false;
    }
    return true;
}

// ---------------------------------------------------------------- domain

ConvexDomain ConvexDomain::disc(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw GeometryError("disc radius must be positive");
    ConvexDomain d;
    d.shape_ = Shape::disc;
    d.center_ = center;
    d.radius_ = radius;
    return d;
}

ConvexDomain ConvexDomain::polygon(std::vector<Point> v) {
    if (v.size() < 3) throw GeometryError("polygon needs at least three vertices");
    const std::size_t n = v.size();
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) area2 += cross(v[i], v[(i + 1) % n]);
    if (area2 < 0.0) std::reverse(v.begin(), v.end());
    for (std::size_t i = 0; i < n; ++i) {
        Point a = v[i], b = v[(i + 1) % n], c = v[(i + 2) % n];
        if (norm(b - a) <= kGeoEps) throw GeometryError("polygon has repeated vertices");
        if (cross(b - a, c - b) <= kGeoEps) throw GeometryError("polygon vertices not in strictly convex position");
    }
    ConvexDomain d;
    d.shape_ = Shape::polygon;
    d.vertices_ = std::move(v);
    Point c{};
    for (Point p : d.vertices_) c += p;
    d.center_ = (1.0 / static_cast<double>(n)) * c;
    double r = 0.0;
    for (Point p : d.vertices_) r = std::max(r, distance(p, d.center_));
    d.radius_ = r;
    return d;
}

ConvexDomain ConvexDomain::square(Point ll, double side) {
    return polygon({ll, {ll.x + side, ll.y}, {ll.x + side, ll.y + side}, {ll.x, ll.y + side}});
}

double ConvexDomain::boundary_distance(Point p) const {
    if (shape_ == Shape::disc) return distance(p, center_) - radius_;
    const std::size_t n = vertices_.size();
    double worst = -std::numeric_limits<double>::infinity();
    bool outside = false;
    double out_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        Point a = vertices_[i], b = vertices_[(i + 1) % n];
        Point e = b - a;
        double s = cross(e, p - a) / norm(e);  // positive inside
        worst = std::max(worst, -s);
        if (s < 0) outside = true;
        out_dist = std::min(out_dist, distance_to_segment(p, {a, b}));
    }
    return outside ? out_dist : worst;
}

bool ConvexDomain::contains(Point p, double tol) const { return boundary_distance(p) <= tol; }

std::optional<Chord> ConvexDomain::chord(const Line& l) const {
    Chord c;
    if (shape_ == Shape::disc) {
        double off = l.offset(center_);
        double h2 = radius_ * radius_ - off * off;
        if (h2 <= 0.0) return std::nullopt;
        double h = std::sqrt(h2);
        double u = l.param(center_);
        c = {u - h, u + h};
    } else {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        Point d = l.direction();
        Point f = l.foot();
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point a = vertices_[i], b = vertices_[(i + 1) % n];
            Point e = b - a;
            // inside: cross(e, p - a) >= 0 with p = f + u d
            double c0 = cross(e, f - a);
            double c1 = cross(e, d);
            if (std::abs(c1) <= 1e-15) {
                if (c0 < 0.0) return std::nullopt;
                continue;
            }
            double u = -c0 / c1;
            if (c1 > 0) lo = std::max(lo, u); else hi = std::min(hi, u);
        }
        if (!(hi > lo)) return std::nullopt;
        c = {lo, hi};
    }
    if (c.length() < kGeoEps) return std::nullopt;
    return c;
}

std::optional<Segment> ConvexDomain::clip(const Segment& s) const {
    if (s.length() <= kGeoEps) {
        if (contains(s.a)) return s;
        return std::nullopt;
    }
    Line l = s.line();
    auto c = chord(l);
    if (!c) return std::nullopt;
    double ua = l.param(s.a), ub = l.param(s.b);
    bool flip = ua > ub;
    double lo = std::max(std::min(ua, ub), c->u0);
    double hi = std::min(std::max(ua, ub), c->u1);
    if (hi < lo) return std::nullopt;
    Segment out{l.at(lo), l.at(hi)};
    if (flip) std::swap(out.a, out.b);
    return out;
}

std::pair<double, double> ConvexDomain::support(double phi) const {
    Point n{std::sin(phi), std::cos(phi)};
    if (shape_ == Shape::disc) {
        double c = dot(center_, n);
        return {c - radius_, c + radius_};
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Point p : vertices_) {
        double v = dot(p, n);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

double ConvexDomain::width(double phi) const {
    auto [lo, hi] = support(phi);
    return hi - lo;
}

double ConvexDomain::perimeter() const {
    if (shape_ == Shape::disc) return 2.0 * kPi * radius_;
    double s = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) s += distance(vertices_[i], vertices_[(i + 1) % n]);
    return s;
}

double ConvexDomain::area() const {
    if (shape_ == Shape::disc) return kPi * radius_ * radius_;
    double s = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(vertices_[i], vertices_[(i + 1) % n]);
    return 0.5 * s;
}

std::pair<Point, double> ConvexDomain::bounding_disc() const { return {center_, radius_}; }

Point ConvexDomain::sample_uniform(Rng& rng) const {
    if (shape_ == Shape::disc) {
        double r = radius_ * std::sqrt(rng.uniform());
        double a = 2.0 * kPi * rng.uniform();
        return {center_.x + r * std::cos(a), center_.y + r * std::sin(a)};
    }
    for (;;) {
        Point p{center_.x + rng.uniform(-radius_, radius_), center_.y + rng.uniform(-radius_, radius_)};
        if (contains(p, 0.0)) return p;
    }
}

ConvexDomain ConvexDomain::scaled(Point origin, double t) const {
    if (shape_ == Shape::disc) {
        ConvexDomain d = *this;
        d.center_ = origin + t * (center_ - origin);
        d.radius_ = t * radius_;
        return d;
    }
    ConvexDomain d = *this;
    for (Point& p : d.vertices_) p = origin + t * (p - origin);
    d.center_ = origin + t * (center_ - origin);
    d.radius_ = t * radius_;
    return d;
}

HitMeasure mu_hit_measure(const Segment& s) {
    double len = s.length();
    if (len <= kGeoEps) return {0.0, true};
    return {2.0 * len, false};
}

HitMeasure mu_hit_measure(const ConvexDomain& d) { return {d.perimeter(), false}; }

// ---------------------------------------------------------------- windows

WindowFamily::WindowFamily(Kind kind, ConvexDomain base, Point origin)
    : kind_(kind), base_(std::move(base)), origin_(origin) {
    if (base_.boundary_distance(origin_) >= -kGeoEps) throw GeometryError("window origin must be interior to the domain");
    if (base_.shape() == ConvexDomain::Shape::polygon) {
        const auto& v = base_.vertices();
        const std::size_t n = v.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point e = v[(i + 1) % n] - v[i];
            Point nrm = (1.0 / norm(e)) * Point{e.y, -e.x};  // outward for ccw
            normals_.push_back(nrm);
            heights_.push_back(dot(v[i] - origin_, nrm));
        }
    }
}

WindowFamily WindowFamily::homothety(ConvexDomain base, Point origin) {
    return WindowFamily(Kind::homothety, std::move(base), origin);
}

WindowFamily WindowFamily::concentric_disc(ConvexDomain base) {
    if (base.shape() != ConvexDomain::Shape::disc) throw GeometryError("concentric family requires a disc domain");
    Point c = base.center();
    return WindowFamily(Kind::concentric_disc, std::move(base), c);
}

ConvexDomain WindowFamily::window_at(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw GeometryError("window time outside [0,1]");
    return base_.scaled(origin_, t);
}

double WindowFamily::reveal_time(Point p) const {
    double t = 0.0;
    if (base_.shape() == ConvexDomain::Shape::disc) {
        // homothety and concentric coincide when origin is the centre
        Point q = p - origin_;
        double qq = dot(q, q);
        if (qq == 0.0) return 0.0;
        Point w = origin_ - base_.center();
        double R = base_.radius();
        double wq = dot(w, q);
        double disc = wq * wq - qq * (dot(w, w) - R * R);
        double v = (-wq + std::sqrt(std::max(disc, 0.0))) / qq;
        t = 1.0 / v;
    } else {
        Point q = p - origin_;
        for (std::size_t i = 0; i < normals_.size(); ++i) t = std::max(t, dot(q, normals_[i]) / heights_[i]);
    }
    if (t > 1.0 + 1e-9) throw GeometryError("point outside the closed domain");
    return std::min(t, 1.0);
}

Anchor WindowFamily::anchor(const Line& l) const {
    if (!base_.chord(l)) throw GeometryError("line misses the domain or is tangent to it");
    if (base_.shape() == ConvexDomain::Shape::disc) {
        Point n = l.normal();
        Point c = base_.center();
        double R = base_.radius();
        double a = dot(n, origin_) - l.rho;
        double b = dot(n, c - origin_);
        double tau = 0.0;
        if (a > 0.0) tau = a / (R - b);
        else if (a < 0.0) tau = -a / (R + b);
        Point ct = origin_ + tau * (c - origin_);
        Point p = l.at(l.param(ct));
        return {p, tau};
    }
    // minimise max_i (alpha_i + beta_i u) over u along the line
    std::vector<double> alpha, beta;
    Point f = l.foot(), d = l.direction();
    for (std::size_t i = 0; i < normals_.size(); ++i) {
        alpha.push_back(dot(f - origin_, normals_[i]) / heights_[i]);
        beta.push_back(dot(d, normals_[i]) / heights_[i]);
    }
    auto g = [&](double u) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < alpha.size(); ++i) m = std::max(m, alpha[i] + beta[i] * u);
        return m;
    };
    double best_u = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        for (std::size_t j = i + 1; j < alpha.size(); ++j) {
            if (std::abs(beta[i] - beta[j]) < 1e-15) continue;
            double u = (alpha[j] - alpha[i]) / (beta[i] - beta[j]);
            double v = g(u);
            if (v < best) {
                best = v;
                best_u = u;
            }
        }
    }
    Point p = l.at(best_u);
    return {p, std::max(0.0, best)};
}

Point WindowFamily::point_at(const Line& l, int side, double t) const {
    return point_at(l, anchor(l), side, t);
}

Point WindowFamily::point_at(const Line& l, const Anchor& a, int side, double t) const {
    if (t <= a.time) return a.point;
    auto c = window_at(std::min(t, 1.0)).chord(l);
    if (!c) return a.point;
    return l.at(side > 0 ? c->u1 : c->u0);
}

}  // namespace pmf
