#include "pmf/arrangement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace pmf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class At { out, interior, end };

At state(const LineInterval& iv, double u) {
    if (!iv.used) return At::out;
    if (std::abs(u - iv.a) <= kGeoEps || std::abs(u - iv.b) <= kGeoEps) return At::end;
    if (u > iv.a && u < iv.b) return At::interior;
    return At::out;
}

bool compatible(At x, At y) {
    if (x == At::end || y == At::end) return x == y;
    return !(x == At::interior && y == At::interior);
}

}  // namespace

LineArrangement::LineArrangement(std::vector<Line> lines, ConvexDomain dom)
    : lines_(std::move(lines)), dom_(std::move(dom)) {
    const std::size_t n = lines_.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto c = dom_.chord(lines_[i]);
        if (!c) throw GeometryError("arrangement line " + std::to_string(i) + " misses the window");
        chords_.push_back(*c);
    }
    cross_.assign(n, std::vector<double>(n, kNaN));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (same_line(lines_[i], lines_[j], kGeoEps))
                throw GeometryError("arrangement lines " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
            auto x = intersect(lines_[i], lines_[j]);
            if (!x.point) continue;
            double ui = lines_[i].param(*x.point), uj = lines_[j].param(*x.point);
            if (ui <= chords_[i].u0 + kGeoEps || ui >= chords_[i].u1 - kGeoEps) continue;
            if (uj <= chords_[j].u0 + kGeoEps || uj >= chords_[j].u1 - kGeoEps) continue;
            for (std::size_t m = 0; m < n; ++m)
                if (m != i && m != j && lines_[m].contains(*x.point, kGeoEps))
                    throw GeometryError("three arrangement lines meet at one point");
            cross_[i][j] = ui;
            cross_[j][i] = uj;
        }
    }
}

std::optional<double> LineArrangement::crossing(std::size_t i, std::size_t j) const {
    double u = cross_[i][j];
    if (std::isnan(u)) return std::nullopt;
    return u;
}

void LineArrangement::enumerate(bool all_used, const std::vector<std::optional<Chord>>& cover,
                                const std::function<void(const std::vector<LineInterval>&)>& visit) const {
    const std::size_t n = lines_.size();
    // candidate intervals per line
    std::vector<std::vector<LineInterval>> options(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool forced = all_used || (i < cover.size() && cover[i]);
        if (!forced) options[i].push_back(LineInterval{});
        std::vector<double> ends{chords_[i].u0, chords_[i].u1};
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isnan(cross_[i][j])) ends.push_back(cross_[i][j]);
        std::sort(ends.begin(), ends.end());
        for (std::size_t p = 0; p < ends.size(); ++p) {
            for (std::size_t q = p + 1; q < ends.size(); ++q) {
                LineInterval iv{true, ends[p], ends[q]};
                if (i < cover.size() && cover[i] && (iv.a >= cover[i]->u0 || iv.b <= cover[i]->u1)) continue;
                options[i].push_back(iv);
            }
        }
    }
    std::vector<LineInterval> cur(n);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == n) {
            visit(cur);
            return;
        }
        for (const LineInterval& iv : options[i]) {
            bool ok = true;
            for (std::size_t j = 0; j < i && ok; ++j) {
                if (std::isnan(cross_[i][j])) continue;
                ok = compatible(state(iv, cross_[i][j]), state(cur[j], cross_[j][i]));
            }
            if (!ok) continue;
            cur[i] = iv;
            rec(i + 1);
        }
        cur[i] = LineInterval{};
    };
    rec(0);
}

ArrangementConfig LineArrangement::realise(const std::vector<LineInterval>& iv, const ActivityMeasure& act) const {
    ArrangementConfig c;
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (!iv[i].used) continue;
        Segment s{lines_[i].at(iv[i].a), lines_[i].at(iv[i].b)};
        c.used_lines.push_back(static_cast<int>(i));
        c.edges.push_back(s);
        c.hamiltonian += act.measure_hit(s);
    }
    return c;
}

std::vector<ArrangementConfig> enumerate_admissible(const std::vector<Line>& lines, const ConvexDomain& dom,
                                                    const ActivityMeasure& act) {
    LineArrangement arr(lines, dom);
    std::vector<ArrangementConfig> out;
    arr.enumerate(false, {}, [&](const std::vector<LineInterval>& iv) { out.push_back(arr.realise(iv, act)); });
    return out;
}

std::size_t count_marked(const MarkerConfig& mc, const ConvexDomain& dom) {
    for (const auto& m : mc.markers())
        if (!dom.contains(m.x)) throw GeometryError("marker outside the window");
    const auto& lines = mc.distinct_lines();
    LineArrangement arr(lines, dom);
    std::vector<std::optional<Chord>> cover(lines.size());
    for (std::size_t i = 0; i < mc.size(); ++i) {
        int li = mc.line_index(i);
        double u = lines[li].param(mc[i].x);
        if (!cover[li]) cover[li] = Chord{u, u};
        cover[li]->u0 = std::min(cover[li]->u0, u);
        cover[li]->u1 = std::max(cover[li]->u1, u);
    }
    std::size_t n = 0;
    arr.enumerate(true, cover, [&](const std::vector<LineInterval>&) { ++n; });
    return n;
}

namespace {

// Line states along the sweep, two bits per line.
constexpr std::uint64_t kBefore = 0, kIn = 1, kAfter = 2;

std::uint64_t get(std::uint64_t s, std::size_t i) { return (s >> (2 * i)) & 3; }
std::uint64_t set(std::uint64_t s, std::size_t i, std::uint64_t v) {
    return (s & ~(std::uint64_t{3} << (2 * i))) | (v << (2 * i));
}

struct SweepEvent {
    enum Kind { enter, leave, cross, marker } kind;
    double key;
    int i;
    int j;
    Point p;
};

}  // namespace

double marked_partition_sum(const std::vector<Line>& lines, const std::vector<std::optional<Chord>>& cover,
                            const ConvexDomain& dom, const ActivityMeasure& act, std::size_t cap,
                            std::size_t* work) {
    if (lines.size() > cap || lines.size() > kSweepLineLimit) {
        std::ostringstream os;
        os << "partition sum refused: " << lines.size() << " lines exceed the cap of "
           << std::min(cap, kSweepLineLimit);
        throw EnumerationCapError(os.str());
    }
    if (lines.empty()) return 1.0;
    LineArrangement arr(lines, dom);
    const std::size_t n = lines.size();

    // a sweep direction no input is likely to align with
    const Point dir{std::cos(0.6180339887), std::sin(0.6180339887)};
    std::vector<SweepEvent> ev;
    for (std::size_t i = 0; i < n; ++i) {
        const Chord& c = arr.chord(i);
        Point a = lines[i].at(c.u0), b = lines[i].at(c.u1);
        if (dot(a, dir) > dot(b, dir)) std::swap(a, b);
        ev.push_back({SweepEvent::enter, dot(a, dir), static_cast<int>(i), -1, a});
        ev.push_back({SweepEvent::leave, dot(b, dir), static_cast<int>(i), -1, b});
        if (i < cover.size() && cover[i]) {
            for (double u : {cover[i]->u0, cover[i]->u1}) {
                Point q = lines[i].at(u);
                ev.push_back({SweepEvent::marker, dot(q, dir), static_cast<int>(i), -1, q});
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (auto u = arr.crossing(i, j)) {
                Point q = lines[i].at(*u);
                ev.push_back({SweepEvent::cross, dot(q, dir), static_cast<int>(i), static_cast<int>(j), q});
            }
        }
    }
    std::stable_sort(ev.begin(), ev.end(), [](const SweepEvent& x, const SweepEvent& y) { return x.key < y.key; });

    // crossings still ahead of the sweep on each line; a line that has not
    // started by its last crossing can only stay unused
    std::vector<int> ahead(n, 0);
    for (const SweepEvent& e : ev)
        if (e.kind == SweepEvent::cross) {
            ++ahead[e.i];
            ++ahead[e.j];
        }

    std::vector<Point> last(n);
    auto piece = [&](int i, Point q) {
        double w = std::exp(-act.measure_hit(Segment{last[i], q}));
        last[i] = q;
        return w;
    };

    std::unordered_map<std::uint64_t, double> cur{{0, 1.0}}, next;
    for (const SweepEvent& e : ev) {
        next.clear();
        auto add = [&](std::uint64_t s, double w) { next[s] += w; };
        switch (e.kind) {
            case SweepEvent::enter:
                last[e.i] = e.p;
                for (const auto& [s, w] : cur) {
                    if (ahead[e.i] > 0) add(s, w);
                    add(set(s, e.i, kIn), w);
                }
                break;
            case SweepEvent::leave: {
                const double wi = piece(e.i, e.p);
                for (const auto& [s, w] : cur) {
                    std::uint64_t st = get(s, e.i);
                    if (st == kBefore) continue;
                    add(set(s, e.i, kBefore), st == kIn ? w * wi : w);
                }
                break;
            }
            case SweepEvent::marker: {
                const double wi = piece(e.i, e.p);
                for (const auto& [s, w] : cur)
                    if (get(s, e.i) == kIn) add(s, w * wi);
                break;
            }
            case SweepEvent::cross: {
                const double wi = piece(e.i, e.p), wj = piece(e.j, e.p);
                const bool live_i = --ahead[e.i] > 0, live_j = --ahead[e.j] > 0;
                for (const auto& [s, w] : cur) {
                    const std::uint64_t si = get(s, e.i), sj = get(s, e.j);
                    double v = w * (si == kIn ? wi : 1.0) * (sj == kIn ? wj : 1.0);
                    // out/out, out/interior, interior/out
                    if ((si != kIn || sj != kIn) && (si != kBefore || live_i) && (sj != kBefore || live_j)) add(s, v);
                    // a corner: both intervals end here, or both start
                    if (si != kAfter && sj != kAfter) {
                        if (si == sj) {
                            std::uint64_t to = si == kIn ? kAfter : kIn;
                            add(set(set(s, e.i, to), e.j, to), v);
                        } else {
                            // one ends while the other starts
                            add(set(set(s, e.i, si == kIn ? kAfter : kIn), e.j, sj == kIn ? kAfter : kIn), v);
                        }
                    }
                }
                break;
            }
        }
        cur.swap(next);
        if (work) *work += cur.size();
        if (cur.size() > kSweepStateCap) throw EnumerationCapError("partition sweep exceeded its state cap");
    }
    double z = 0.0;
    for (const auto& [s, w] : cur) z += w;
    return z;
}

double exact_partition_sum(const std::vector<Line>& lines, const ConvexDomain& dom, const ActivityMeasure& act,
                           std::size_t cap, std::size_t* work) {
    return marked_partition_sum(lines, {}, dom, act, cap, work);
}

}  // namespace pmf
