#pragma once

#include <utility>
#include <vector>

#include "pmf/geometry.hpp"

namespace pmf {

struct EdgeMarker {
    Line line;
    Point x;
};

/// Ordered edge-marker collection with its position classification.
/// Markers sharing a line are coupled; distinct lines are numbered in order
/// of first appearance.
class MarkerConfig {
public:
    MarkerConfig() = default;
    /// Validates: points on their lines, no repeated marker, no three
    /// distinct marker lines through one point.
    explicit MarkerConfig(std::vector<EdgeMarker> markers, double tol = 1e-9);

    const std::vector<EdgeMarker>& markers() const { return markers_; }
    const EdgeMarker& operator[](std::size_t i) const { return markers_[i]; }
    std::size_t size() const { return markers_.size(); }
    bool empty() const { return markers_.empty(); }

    bool general() const { return !singular_ && !degenerate_; }
    bool singular() const { return singular_; }
    bool degenerate() const { return degenerate_; }
    const std::vector<std::pair<int, int>>& couplings() const { return couplings_; }

    int line_index(std::size_t marker) const { return line_of_[marker]; }
    const std::vector<Line>& distinct_lines() const { return lines_; }
    std::vector<int> markers_on(int line) const;

private:
    std::vector<EdgeMarker> markers_;
    std::vector<Line> lines_;
    std::vector<int> line_of_;
    std::vector<std::pair<int, int>> couplings_;
    bool singular_ = false;
    bool degenerate_ = false;
};

}  // namespace pmf
