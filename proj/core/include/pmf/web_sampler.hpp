#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmf/activity.hpp"
#include "pmf/geometry.hpp"
#include "pmf/markers.hpp"

namespace pmf {

enum class StopRule { tangency, immediate };

enum class StrokeKind { germ, spontaneous, forced };

enum class EndCause { terminated, tangency, separated, frozen, merged_pair, merged_germ };

const char* to_string(StopRule r);
const char* to_string(StrokeKind k);
const char* to_string(EndCause c);

/// A straight piece of the web between its start and its terminal. Each
/// stroke ends exactly once, so strokes are in one-to-one correspondence
/// with terminals; a branch is the chain of strokes from a root to one of
/// them.
struct Stroke {
    int id = -1;
    int root = -1;    // marker index
    int parent = -1;  // -1 for the germ stroke of a marker
    StrokeKind kind = StrokeKind::germ;
    std::uint64_t line_key = 0;
    Line line;
    int side = 1;  // carrier side relative to the anchor of the line
    Point start;
    double t_start = 1.0;
    Point end;
    double t_end = 0.0;
    EndCause cause = EndCause::terminated;
    std::vector<int> forcers;  // strokes along the same line that forced this one
    int partner = -1;          // coalescence partner for merged ends
    std::vector<int> children;
};

/// Chronological record of the construction, in window time t descending.
struct WebLogEntry {
    enum class Kind { meet, end, start, activate };
    Kind kind = Kind::end;
    double t = 0.0;
    int a = -1;
    int b = -1;
    /// Separation decided before any event, at the initial time.
    bool initial = false;
};

struct WebNode {
    enum class Kind { T, I, X };
    Kind kind;
    Point p;
};

struct PolygonalWeb {
    PolygonalWeb(MarkerConfig mc, WindowFamily f) : markers(std::move(mc)), family(std::move(f)) {}

    MarkerConfig markers;
    WindowFamily family;
    StopRule stop_rule = StopRule::tangency;
    std::uint64_t seed = 0;
    std::vector<Stroke> strokes;  // strokes[j] is the germ stroke of marker j
    std::vector<WebLogEntry> log;

    std::size_t k() const { return markers.size(); }
    std::size_t terminal_count() const { return strokes.size(); }
    /// Stroke ids from the root of `terminal` down to it.
    std::vector<int> branch(int terminal) const;
    /// Root, turning points and terminal of a branch.
    std::vector<Point> branch_polyline(int terminal) const;
    std::vector<WebNode> nodes() const;
};

/// Samples the web with kill and turn randomness taken from a carrier bank
/// keyed by `seed`; the result is a deterministic function of its inputs.
PolygonalWeb sample_web(const ActivityMeasure& act, const WindowFamily& f, const MarkerConfig& mc, StopRule rule,
                        std::uint64_t seed);

/// The deterministic web with no spontaneous turns or kills.
PolygonalWeb zero_activity_web(const WindowFamily& f, const MarkerConfig& mc, StopRule rule = StopRule::tangency);

struct WebCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Structural invariants: m >= k, forcers colinear with their forced
/// strokes, merged ends paired, no V-shaped nodes.
WebCheck check_web(const PolygonalWeb& w);

/// Size limits past which sample_web gives up with SamplingError.
inline constexpr std::size_t kMaxWebStrokes = 200000;
inline constexpr std::size_t kMaxWebLog = 2000000;

}  // namespace pmf
