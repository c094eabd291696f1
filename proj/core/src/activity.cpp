#include "pmf/activity.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <sstream>

namespace pmf {

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                          unsigned max_depth) {
    if (a == b) return 0.0;
    double err = 0.0;
    double l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth, rel_tol, &err, &l1);
    if (!std::isfinite(v) || (err > rel_tol * std::max(l1, 1e-300) && err > 1e-14)) {
        std::ostringstream os;
        os << "quadrature did not converge on [" << a << ", " << b << "]: value " << v << ", error estimate " << err
           << ", L1 " << l1;
        throw QuadratureError(os.str());
    }
    return v;
}

namespace {

// Adaptive quadrature over the pieces between sorted cut points.
double integrate_pieces(const std::function<double(double)>& f, std::vector<double> cuts, double rel_tol) {
    std::sort(cuts.begin(), cuts.end());
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] - cuts[i] > 1e-12 * (1.0 + std::abs(cuts[i]))) v += integrate_adaptive(f, cuts[i], cuts[i + 1], rel_tol);
    return v;
}

// Angles in [0, pi] at which the support function of a polygon has a kink:
// the normal is perpendicular to an edge.
std::vector<double> kink_angles(const ConvexDomain& dom) {
    std::vector<double> out = {0.0, kPi};
    const auto& v = dom.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point d = v[(i + 1) % v.size()] - v[i];
        out.push_back(wrap_angle(std::atan2(-d.y, d.x)));
    }
    return out;
}

}  // namespace

double sample_sine_gap(Rng& rng) {
    for (;;) {
        double d = std::acos(1.0 - 2.0 * rng.uniform());
        if (d > 1e-12 && d < kPi - 1e-12) return d;
    }
}

ActivityMeasure ActivityMeasure::homogeneous(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("activity lambda must be >= 0");
    ActivityMeasure m;
    m.kind_ = Kind::homogeneous;
    m.lambda_ = lambda;
    m.m_max_ = lambda;
    return m;
}

ActivityMeasure ActivityMeasure::anisotropic(double lambda, double a) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("activity lambda must be >= 0");
    if (!(std::abs(a) <= 1.0)) throw std::invalid_argument("anisotropy must satisfy |a| <= 1");
    ActivityMeasure m;
    m.kind_ = Kind::anisotropic;
    m.lambda_ = lambda;
    m.a_ = a;
    m.m_max_ = lambda * (1.0 + std::abs(a));
    return m;
}

ActivityMeasure ActivityMeasure::custom(Density d, double m_max) {
    if (!d) throw std::invalid_argument("custom activity needs a density");
    if (!(m_max >= 0.0) || !std::isfinite(m_max)) throw std::invalid_argument("custom activity bound must be >= 0");
    ActivityMeasure m;
    m.kind_ = Kind::custom;
    m.custom_ = std::move(d);
    m.m_max_ = m_max;
    return m;
}

double ActivityMeasure::density(double phi, double rho) const {
    switch (kind_) {
        case Kind::homogeneous: return lambda_;
        case Kind::anisotropic: return lambda_ * (1.0 + a_ * std::cos(2.0 * phi));
        case Kind::custom: break;
    }
    double v = custom_(phi, rho);
    if (v < 0.0 || v > m_max_ * (1.0 + 1e-12)) throw SamplingError("custom density outside [0, m_max]");
    return v;
}

double ActivityMeasure::measure_hit(const Segment& s) const {
    double len = s.length();
    if (len <= kGeoEps || m_max_ == 0.0) return 0.0;
    if (kind_ == Kind::homogeneous) return 2.0 * lambda_ * len;
    Point d = s.b - s.a;
    if (kind_ == Kind::anisotropic) {
        double theta = std::atan2(d.y, d.x);
        return lambda_ * len * (2.0 - 2.0 * a_ / 3.0 * std::cos(2.0 * theta));
    }
    // |d . n(phi)| vanishes at phi0, where the lines are parallel to the segment
    double phi0 = wrap_angle(std::atan2(-d.y, d.x));
    auto outer = [&](double phi) {
        Point n{std::sin(phi), std::cos(phi)};
        double ra = dot(s.a, n), rb = dot(s.b, n);
        if (kind_ == Kind::anisotropic) return density(phi, 0.0) * std::abs(rb - ra);
        double lo = std::min(ra, rb), hi = std::max(ra, rb);
        if (hi - lo <= 0.0) return 0.0;
        return integrate_adaptive([&](double r) { return density(phi, r); }, lo, hi, 1e-8);
    };
    double v = 0.0;
    if (phi0 > 0.0) v += integrate_adaptive(outer, 0.0, phi0);
    if (phi0 < kPi) v += integrate_adaptive(outer, phi0, kPi);
    return v;
}

double ActivityMeasure::hit_rate(Point p, double phi) const {
    if (m_max_ == 0.0) return 0.0;
    if (kind_ == Kind::homogeneous) return 2.0 * lambda_;
    auto f = [&](double q) {
        Line l = Line::through(p, q);
        return density(l) * std::abs(std::sin(q - phi));
    };
    return integrate_adaptive(f, phi, phi + kPi);
}

std::vector<Line> ActivityMeasure::sample_line_process(const ConvexDomain& dom, Rng& rng) const {
    std::vector<Line> out;
    if (m_max_ == 0.0) return out;
    auto [c, R] = dom.bounding_disc();
    // lines hitting the bounding disc have mu-mass 2 pi R
    std::uint64_t n = rng.poisson(m_max_ * 2.0 * kPi * R);
    for (std::uint64_t i = 0; i < n; ++i) {
        double phi = kPi * rng.uniform();
        Point nrm{std::sin(phi), std::cos(phi)};
        double rho = dot(c, nrm) + rng.uniform(-R, R);
        double keep = rng.uniform();
        Line l(phi, rho);
        if (!dom.chord(l)) continue;
        if (kind_ != Kind::homogeneous && keep * m_max_ >= density(l)) continue;
        out.push_back(l);
    }
    return out;
}

Line ActivityMeasure::sample_hitting_line(const ConvexDomain& dom, Rng& rng) const {
    if (m_max_ == 0.0) throw SamplingError("zero activity: no line to draw");
    auto [c, R] = dom.bounding_disc();
    for (int i = 0; i < kMaxRejections; ++i) {
        double phi = kPi * rng.uniform();
        Point nrm{std::sin(phi), std::cos(phi)};
        double rho = dot(c, nrm) + rng.uniform(-R, R);
        double keep = rng.uniform();
        Line l(phi, rho);
        if (!dom.chord(l)) continue;
        if (kind_ != Kind::homogeneous && keep * m_max_ >= density(l)) continue;
        return l;
    }
    throw SamplingError("line sampler exhausted its rejection budget");
}

Line ActivityMeasure::sample_turn_direction(Point at, const Line& incoming, Rng& rng) const {
    if (m_max_ == 0.0) throw SamplingError("zero activity: no direction through the point");
    for (int i = 0; i < kMaxRejections; ++i) {
        double phi = incoming.phi + sample_sine_gap(rng);
        Line l = Line::through(at, phi);
        if (kind_ == Kind::homogeneous || rng.uniform() * m_max_ < density(l)) return l;
    }
    throw SamplingError("direction sampler exhausted its rejection budget");
}

std::pair<Line, Line> ActivityMeasure::sample_vertex_pair(Point at, Rng& rng) const {
    if (m_max_ == 0.0) throw SamplingError("zero activity: no line pair through the point");
    for (int i = 0; i < kMaxRejections; ++i) {
        double phi1 = kPi * rng.uniform();
        double phi2 = phi1 + sample_sine_gap(rng);
        Line l1 = Line::through(at, phi1);
        Line l2 = Line::through(at, phi2);
        if (kind_ == Kind::homogeneous) return {l1, l2};
        if (rng.uniform() * m_max_ * m_max_ < density(l1) * density(l2)) return {l1, l2};
    }
    throw SamplingError("vertex pair sampler exhausted its rejection budget");
}

double ActivityMeasure::intersection_measure(const ConvexDomain& dom) const {
    if (m_max_ == 0.0) return 0.0;
    if (kind_ == Kind::homogeneous) return lambda_ * lambda_ * kPi * dom.area();
    if (kind_ == Kind::anisotropic) return lambda_ * lambda_ * kPi * dom.area() * (1.0 - a_ * a_ / 6.0);
    auto outer = [&](double phi) {
        auto [lo, hi] = dom.support(phi);
        auto inner = [&](double rho) {
            Line l(phi, rho);
            auto c = dom.chord(l);
            if (!c) return 0.0;
            return density(l) * measure_hit(Segment{l.at(c->u0), l.at(c->u1)});
        };
        std::vector<double> cuts = {lo, hi};
        Point n{std::sin(phi), std::cos(phi)};
        for (Point v : dom.vertices()) cuts.push_back(std::clamp(dot(v, n), lo, hi));
        return integrate_pieces(inner, cuts, 1e-7);
    };
    return 0.5 * integrate_pieces(outer, kink_angles(dom), 1e-6);
}

double ActivityMeasure::hit_mass(const ConvexDomain& dom) const {
    if (m_max_ == 0.0) return 0.0;
    if (kind_ == Kind::homogeneous) return lambda_ * dom.perimeter();
    auto outer = [&](double phi) {
        auto [lo, hi] = dom.support(phi);
        if (kind_ == Kind::anisotropic) return density(phi, 0.0) * (hi - lo);
        return integrate_adaptive([&](double r) { return density(phi, r); }, lo, hi, 1e-8);
    };
    return integrate_pieces(outer, kink_angles(dom), 1e-6);
}

}  // namespace pmf
