#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pmf/web_sampler.hpp"

namespace pmf {

class CropCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CropNode {
    enum class Kind { V, T, I };
    Kind kind;
    Point p;
};

struct CropGraph {
    std::vector<int> selected;  // the terminal set Y
    std::vector<Segment> edges;
    std::vector<int> edge_stroke;  // parallel to edges
    std::vector<CropNode> nodes;
    bool complete = false;
    bool minimal = false;
    bool normal = false;
    int branchings = 0;
};

/// Replays the growth of the branches ending at the terminals Y, stopping
/// branches at their first meeting.
CropGraph build_crop_graph(const PolygonalWeb& w, const std::vector<int>& Y);

/// Indicator that Y is complete and minimal with a normal crop graph.
bool crop_indicator(const PolygonalWeb& w, const std::vector<int>& Y);

inline constexpr std::size_t kSubsetCap = 22;
inline constexpr std::size_t kGraphStateCap = std::size_t{1} << 20;

/// Signed sum over all terminal subsets.
std::int64_t crop_subset_sum(const PolygonalWeb& w, std::size_t cap = kSubsetCap);

/// Signed sum over normal crop graphs, by a forward pass over the
/// construction log that carries the live branch collections.
std::int64_t crop_graph_sum(const PolygonalWeb& w, std::size_t state_cap = kGraphStateCap);

}  // namespace pmf
