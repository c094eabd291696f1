#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmf/activity.hpp"
#include "pmf/geometry.hpp"

namespace pmf {

enum class Lineage { line_birth, vertex_birth, directional_update };

struct FieldEdge {
    Segment seg;
    Line line;
    Lineage lineage = Lineage::line_birth;
};

struct FieldVertex {
    Point p;
    int degree = 0;
};

struct FieldSample {
    FieldSample(ConvexDomain d, WindowFamily f) : domain(std::move(d)), family(std::move(f)) {}

    std::vector<FieldEdge> edges;
    std::vector<FieldVertex> vertices;
    std::uint64_t seed = 0;
    ConvexDomain domain;
    WindowFamily family;
    /// Draws discarded because a measure-zero coincidence was hit numerically.
    int degenerate_resamples = 0;
};

struct AdmissibilityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

struct FieldStats {
    std::size_t line_births = 0;
    std::size_t vertex_births = 0;
    std::size_t turns = 0;
    std::size_t collisions = 0;
};

/// Event-driven graphical construction of the consistent field on the base
/// domain of a window family. Holds precomputed intensities so repeated
/// draws are cheap.
class FieldSampler {
public:
    FieldSampler(ActivityMeasure act, WindowFamily family);

    FieldSample sample(Rng& rng, FieldStats* stats = nullptr) const;
    FieldSample sample(std::uint64_t seed, FieldStats* stats = nullptr) const;

    const ActivityMeasure& activity() const { return act_; }
    const WindowFamily& family() const { return family_; }
    double vertex_birth_mean() const { return vertex_mean_; }

    /// Resampling budget for numerically degenerate draws.
    static constexpr int kMaxResamples = 64;

private:
    bool run(Rng& rng, FieldSample& out, FieldStats& stats) const;

    ActivityMeasure act_;
    WindowFamily family_;
    double vertex_mean_ = 0.0;
};

FieldSample sample_field(const ActivityMeasure& act, const WindowFamily& f, Rng& rng);

/// Checks the admissibility conditions: non-crossing edges, interior
/// vertices of degree 2, boundary vertices of degree 1, no colinear edges,
/// everything inside the closed domain.
AdmissibilityReport check_admissible(const FieldSample& s, double tol = 1e-7);

/// Finite-window surrogate of the edge correlation event for one marker.
bool marker_hit(const FieldSample& s, const Line& l, Point x, double eps_x, double eps_phi);

/// Edges of the sample clipped to a subdomain (pieces shorter than tol dropped).
std::vector<Segment> restrict_to(const FieldSample& s, const ConvexDomain& sub, double tol = 1e-9);

/// Number of edges crossing a probe segment.
std::size_t count_crossings(const FieldSample& s, const Segment& probe);

}  // namespace pmf
