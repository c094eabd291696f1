#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pmf/activity.hpp"
#include "pmf/geometry.hpp"
#include "pmf/markers.hpp"

namespace pmf {

class EnumerationCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One interval per line in Line::param coordinates, or unused.
struct LineInterval {
    bool used = false;
    double a = 0.0;
    double b = 0.0;
};

struct ArrangementConfig {
    std::vector<int> used_lines;
    std::vector<Segment> edges;  // parallel to used_lines
    double hamiltonian = 0.0;
};

/// Lines clipped to a window with their pairwise crossings inside it.
class LineArrangement {
public:
    /// Throws GeometryError for colinear lines, three lines through one
    /// point, or a line missing the window.
    LineArrangement(std::vector<Line> lines, ConvexDomain dom);

    std::size_t size() const { return lines_.size(); }
    const std::vector<Line>& lines() const { return lines_; }
    const ConvexDomain& domain() const { return dom_; }
    const Chord& chord(std::size_t i) const { return chords_[i]; }
    /// Param on line i of its crossing with line j inside the window.
    std::optional<double> crossing(std::size_t i, std::size_t j) const;

    /// Visits every admissible interval assignment. With all_used, every
    /// line must carry an interval. `cover[i]`, when set, is a param range
    /// the interval of line i must contain (and forces the line to be used).
    void enumerate(bool all_used, const std::vector<std::optional<Chord>>& cover,
                   const std::function<void(const std::vector<LineInterval>&)>& visit) const;

    ArrangementConfig realise(const std::vector<LineInterval>& iv, const ActivityMeasure& act) const;

private:
    std::vector<Line> lines_;
    ConvexDomain dom_;
    std::vector<Chord> chords_;
    std::vector<std::vector<double>> cross_;  // NaN when no crossing inside
};

/// All admissible configurations on the line set, the empty one included.
std::vector<ArrangementConfig> enumerate_admissible(const std::vector<Line>& lines, const ConvexDomain& dom,
                                                    const ActivityMeasure& act = ActivityMeasure::homogeneous(1.0));

/// Number of configurations on the marker lines in which every edge covers
/// a marker and every marker is covered.
std::size_t count_marked(const MarkerConfig& mc, const ConvexDomain& dom);

inline constexpr std::size_t kPartitionLineCap = 24;
inline constexpr std::size_t kSweepLineLimit = 32;
inline constexpr std::size_t kSweepStateCap = std::size_t{1} << 22;

/// Sum of Boltzmann weights over configurations using every given line,
/// by a sweep across the window carrying the on/off state of each line.
/// `work`, when given, is incremented by the number of sweep states visited.
double exact_partition_sum(const std::vector<Line>& lines, const ConvexDomain& dom, const ActivityMeasure& act,
                           std::size_t cap = kPartitionLineCap, std::size_t* work = nullptr);

/// Sum of Boltzmann weights over configurations using every line in which
/// the interval on each constrained line covers its marker params.
double marked_partition_sum(const std::vector<Line>& lines, const std::vector<std::optional<Chord>>& cover,
                            const ConvexDomain& dom, const ActivityMeasure& act, std::size_t cap,
                            std::size_t* work = nullptr);

}  // namespace pmf
