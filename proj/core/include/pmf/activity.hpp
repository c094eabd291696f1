#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmf/geometry.hpp"
#include "pmf/random.hpp"

namespace pmf {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Activity measure M = m * mu on the space of lines, with m in lines per
/// unit (phi, rho) area.
class ActivityMeasure {
public:
    enum class Kind { homogeneous, anisotropic, custom };
    using Density = std::function<double(double phi, double rho)>;

    static ActivityMeasure homogeneous(double lambda);
    /// m(phi, rho) = lambda (1 + a cos 2 phi), |a| <= 1.
    static ActivityMeasure anisotropic(double lambda, double a);
    /// Arbitrary continuous density bounded by m_max where it is used.
    static ActivityMeasure custom(Density m, double m_max);

    Kind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    double anisotropy() const { return a_; }
    double m_max() const { return m_max_; }
    bool is_zero() const { return m_max_ == 0.0; }
    /// Density independent of rho (homogeneous and anisotropic kinds).
    bool translation_invariant() const { return kind_ != Kind::custom; }

    double density(double phi, double rho) const;
    double density(const Line& l) const { return density(l.phi, l.rho); }

    /// M of the set of lines hitting the segment.
    double measure_hit(const Segment& s) const;
    /// Hit intensity per unit length along a line of angle phi through p:
    /// the integral of m(l') |sin(phi' - phi)| over lines l' through p.
    double hit_rate(Point p, double phi) const;

    /// Poisson line process with intensity M restricted to lines hitting dom.
    std::vector<Line> sample_line_process(const ConvexDomain& dom, Rng& rng) const;
    /// Line through `at` with angle density proportional to
    /// m(l') |sin(phi' - phi_in)|.
    /// One line of M restricted to the lines hitting `dom`, normalised.
    Line sample_hitting_line(const ConvexDomain& dom, Rng& rng) const;

    Line sample_turn_direction(Point at, const Line& incoming, Rng& rng) const;
    /// Two lines through `at` with joint angle density proportional to
    /// m(l1) m(l2) |sin(phi1 - phi2)|.
    std::pair<Line, Line> sample_vertex_pair(Point at, Rng& rng) const;

    /// Half the M x M mass of line pairs meeting inside dom.
    double intersection_measure(const ConvexDomain& dom) const;
    /// Mass of lines hitting dom.
    double hit_mass(const ConvexDomain& dom) const;

    /// Maximum number of rejection rounds before a sampler reports failure.
    static constexpr int kMaxRejections = 100000;

private:
    Kind kind_ = Kind::homogeneous;
    double lambda_ = 0.0;
    double a_ = 0.0;
    double m_max_ = 0.0;
    Density custom_;
};

/// Adaptive Gauss-Kronrod quadrature with relative tolerance `rel_tol`;
/// throws QuadratureError when the error estimate stays above tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-6,
                          unsigned max_depth = 20);

/// Gap between a line and a direction drawn through the same point:
/// density |sin d| / 2 on [0, pi).
double sample_sine_gap(Rng& rng);

}  // namespace pmf
