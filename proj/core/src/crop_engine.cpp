#include "pmf/crop_engine.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>
#include <unordered_map>

namespace pmf {

namespace {

using Kind = WebLogEntry::Kind;

struct Item {
    Kind kind;
    double t;
    int a;
    int b;
};

// Dense line ids, and the timeline used by the subset replay: the
// construction log with meetings recomputed from stroke geometry.
struct Plan {
    std::vector<int> line;  // per stroke
    std::vector<Item> items;
    std::vector<std::vector<int>> by_root;
};

std::vector<int> dense_lines(const PolygonalWeb& w) {
    std::unordered_map<std::uint64_t, int> ids;
    std::vector<int> out;
    for (const Stroke& s : w.strokes) out.push_back(ids.emplace(s.line_key, static_cast<int>(ids.size())).first->second);
    return out;
}

Plan make_plan(const PolygonalWeb& w) {
    Plan p;
    p.line = dense_lines(w);
    const std::size_t m = w.strokes.size();
    p.by_root.resize(w.k());
    for (const Stroke& s : w.strokes) p.by_root[s.root].push_back(s.id);

    std::unordered_map<std::uint64_t, double> anchor_u;
    auto ua = [&](const Stroke& s) {
        auto it = anchor_u.find(s.line_key);
        if (it != anchor_u.end()) return it->second;
        double u = s.line.param(w.family.anchor(s.line).point);
        anchor_u.emplace(s.line_key, u);
        return u;
    };
    auto on_side = [&](const Stroke& s, Point z) {
        double d = s.line.param(z) - ua(s);
        return s.side > 0 ? d > 1e-12 : d < -1e-12;
    };
    auto active_at = [](const Stroke& s, double t) { return t < s.t_start - 1e-12 && t > s.t_end + 1e-12; };

    std::vector<Item> meets;
    for (std::size_t i = 0; i < m; ++i) {
        const Stroke& a = w.strokes[i];
        if (a.cause == EndCause::frozen || a.t_start <= a.t_end) continue;
        for (std::size_t j = i + 1; j < m; ++j) {
            const Stroke& b = w.strokes[j];
            if (b.cause == EndCause::frozen || b.t_start <= b.t_end || p.line[i] == p.line[j]) continue;
            auto x = intersect(a.line, b.line);
            if (!x.point || w.family.base().boundary_distance(*x.point) > 1e-12) continue;
            if (!on_side(a, *x.point) || !on_side(b, *x.point)) continue;
            double t = std::min(1.0, w.family.reveal_time(*x.point));
            if (active_at(a, t) && active_at(b, t)) meets.push_back(Item{Kind::meet, t, a.id, b.id});
        }
    }
    std::stable_sort(meets.begin(), meets.end(), [](const Item& x, const Item& y) { return x.t > y.t; });
    std::size_t mi = 0;
    for (const WebLogEntry& e : w.log) {
        if (e.kind == Kind::meet) continue;
        while (mi < meets.size() && meets[mi].t >= e.t - 1e-12) p.items.push_back(meets[mi++]);
        p.items.push_back(Item{e.kind, e.t, e.a, e.b});
    }
    while (mi < meets.size()) p.items.push_back(meets[mi++]);
    return p;
}

struct Status {
    bool complete = true;
    bool minimal = true;
    bool normal = true;
};

// One configuration of the marker process, driven by the choice of
// terminals Y. With `early` set, returns at the first failure.
Status replay(const PolygonalWeb& w, const Plan& p, const std::vector<char>& inY, bool early, CropGraph* g) {
    const std::size_t m = w.strokes.size();
    const std::size_t k = w.k();
    Status st;

    std::vector<char> sel(m, 0);
    for (std::size_t s = 0; s < m; ++s)
        if (inY[s])
            for (int c = static_cast<int>(s); c >= 0 && !sel[c]; c = w.strokes[c].parent) sel[c] = 1;
    for (std::size_t j = 0; j < k; ++j)
        if (!sel[j]) st.complete = false;
    if (!st.complete && early) return st;

    // latest selected child of a selected stroke outside Y ends that stroke
    std::vector<int> last_child(m, -1);
    for (std::size_t s = 0; s < m; ++s) {
        if (!sel[s] || inY[s]) continue;
        for (int c : w.strokes[s].children)
            if (sel[c]) last_child[s] = c;
    }

    std::vector<char> alive(m, 0), pending(k, 0);
    std::vector<int> count(m + k + 1, 0);  // markers per dense line
    for (std::size_t j = 0; j < k; ++j)
        if (sel[j]) {
            pending[j] = 1;
            ++count[p.line[j]];
        }
    std::vector<Point> from(m);
    auto cut = [&](int s, Point at) {
        alive[s] = 0;
        --count[p.line[s]];
        if (g && distance(from[s], at) > 1e-12) {
            g->edges.push_back(Segment{from[s], at});
            g->edge_stroke.push_back(s);
        }
    };
    auto reject = [&]() {
        st.normal = false;
        return early;
    };

    for (const Item& it : p.items) {
        switch (it.kind) {
            case Kind::meet: {
                if (!alive[it.a] || !alive[it.b]) break;
                if ((count[p.line[it.a]] > 1 || count[p.line[it.b]] > 1) && reject()) return st;
                auto x = intersect(w.strokes[it.a].line, w.strokes[it.b].line);
                Point z = x.point ? *x.point : w.strokes[it.a].end;
                cut(it.a, z);
                cut(it.b, z);
                if (g) g->nodes.push_back({CropNode::Kind::V, z});
                break;
            }
            case Kind::activate: {
                if (!sel[it.a]) break;
                pending[it.a] = 0;
                alive[it.a] = 1;
                from[it.a] = w.strokes[it.a].start;
                break;
            }
            case Kind::start: {
                const int c = it.a, par = it.b;
                if (!sel[c]) break;
                if (!alive[par]) {
                    st.minimal = false;
                    if (early) return st;
                    break;
                }
                const Stroke& cs = w.strokes[c];
                if (cs.kind == StrokeKind::forced && count[p.line[c]] == 0 && reject()) return st;
                bool continues = inY[par] || last_child[par] != c;
                if (!continues && count[p.line[par]] > 1 && reject()) return st;
                alive[c] = 1;
                ++count[p.line[c]];
                from[c] = cs.start;
                if (continues) {
                    if (g) g->nodes.push_back({CropNode::Kind::T, cs.start});
                } else {
                    cut(par, cs.start);
                }
                break;
            }
            case Kind::end: {
                const int s = it.a;
                const Stroke& ss = w.strokes[s];
                if (ss.cause == EndCause::frozen) {
                    if (s < static_cast<int>(k) && pending[s]) {
                        if (count[p.line[s]] > 1 && reject()) return st;
                        pending[s] = 0;
                        --count[p.line[s]];
                        if (g) g->nodes.push_back({CropNode::Kind::I, ss.start});
                    }
                    break;
                }
                if (!alive[s]) break;
                bool breaks = ss.cause == EndCause::terminated || ss.cause == EndCause::separated;
                if (breaks && count[p.line[s]] > 1 && reject()) return st;
                cut(s, ss.end);
                if (g && (ss.cause == EndCause::terminated || ss.cause == EndCause::separated ||
                          ss.cause == EndCause::tangency))
                    g->nodes.push_back({CropNode::Kind::I, ss.end});
                break;
            }
        }
    }
    return st;
}

int popcount_of(const std::vector<char>& v) {
    int n = 0;
    for (char c : v) n += c != 0;
    return n;
}

}  // namespace

CropGraph build_crop_graph(const PolygonalWeb& w, const std::vector<int>& Y) {
    Plan p = make_plan(w);
    std::vector<char> inY(w.strokes.size(), 0);
    for (int y : Y) {
        if (y < 0 || y >= static_cast<int>(w.strokes.size())) throw std::out_of_range("terminal id out of range");
        inY[y] = 1;
    }
    CropGraph g;
    g.selected = Y;
    Status st = replay(w, p, inY, false, &g);
    g.complete = st.complete;
    g.minimal = st.minimal;
    g.normal = st.normal;
    g.branchings = popcount_of(inY) - static_cast<int>(w.k());
    return g;
}

bool crop_indicator(const PolygonalWeb& w, const std::vector<int>& Y) {
    Plan p = make_plan(w);
    std::vector<char> inY(w.strokes.size(), 0);
    for (int y : Y) inY.at(y) = 1;
    Status st = replay(w, p, inY, true, nullptr);
    return st.complete && st.minimal && st.normal;
}

std::int64_t crop_subset_sum(const PolygonalWeb& w, std::size_t cap) {
    const std::size_t m = w.strokes.size();
    if (m > cap) {
        std::ostringstream os;
        os << "subset enumeration refused: " << m << " terminals exceed the cap of " << cap
           << "; use crop_graph_sum";
        throw CropCapError(os.str());
    }
    Plan p = make_plan(w);
    const int k = static_cast<int>(w.k());
    std::vector<std::uint64_t> root_mask(w.k(), 0);
    for (std::size_t s = 0; s < m; ++s) root_mask[w.strokes[s].root] |= std::uint64_t{1} << s;

    std::int64_t total = 0;
    std::vector<char> inY(m);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        bool complete = true;
        for (std::uint64_t r : root_mask)
            if (!(mask & r)) complete = false;
        if (!complete) continue;
        for (std::size_t s = 0; s < m; ++s) inY[s] = (mask >> s) & 1;
        Status st = replay(w, p, inY, true, nullptr);
        if (!(st.complete && st.minimal && st.normal)) continue;
        int card = std::popcount(mask);
        total += ((card - k) % 2 == 0) ? 1 : -1;
    }
    return total;
}

std::int64_t crop_graph_sum(const PolygonalWeb& w, std::size_t state_cap) {
    const std::size_t k = w.k();
    const std::vector<int> line = dense_lines(w);

    struct State {
        std::vector<int> live;  // sorted stroke ids
        std::uint64_t pending = 0;
        bool operator<(const State& o) const { return pending != o.pending ? pending < o.pending : live < o.live; }
    };
    std::map<State, std::int64_t> states;
    State init;
    for (std::size_t j = 0; j < k; ++j) init.pending |= std::uint64_t{1} << j;
    states[init] = 1;

    auto has = [](const State& s, int id) { return std::binary_search(s.live.begin(), s.live.end(), id); };
    auto markers_on = [&](const State& s, int l) {
        int n = 0;
        for (int id : s.live) n += line[id] == l;
        for (std::size_t j = 0; j < k; ++j)
            if ((s.pending >> j) & 1) n += line[j] == l;
        return n;
    };
    auto without = [](State s, int id) {
        s.live.erase(std::lower_bound(s.live.begin(), s.live.end(), id));
        return s;
    };
    auto with = [](State s, int id) {
        s.live.insert(std::lower_bound(s.live.begin(), s.live.end(), id), id);
        return s;
    };

    for (const WebLogEntry& e : w.log) {
        std::map<State, std::int64_t> next;
        auto add = [&](const State& s, std::int64_t wt) {
            if (wt == 0) return;
            auto& slot = next[s];
            slot += wt;
        };
        for (const auto& [s, wt] : states) {
            switch (e.kind) {
                case Kind::meet: {
                    if (!has(s, e.a) || !has(s, e.b)) { add(s, wt); break; }
                    if (markers_on(s, line[e.a]) > 1 || markers_on(s, line[e.b]) > 1) break;
                    add(without(without(s, e.a), e.b), wt);
                    break;
                }
                case Kind::activate: {
                    if (!((s.pending >> e.a) & 1)) { add(s, wt); break; }
                    State n = with(s, e.a);
                    n.pending &= ~(std::uint64_t{1} << e.a);
                    add(n, wt);
                    break;
                }
                case Kind::start: {
                    const int c = e.a, par = e.b;
                    add(s, wt);  // unmodified
                    if (!has(s, par)) break;
                    if (w.strokes[c].kind == StrokeKind::forced && markers_on(s, line[c]) == 0) break;
                    if (markers_on(s, line[par]) == 1) add(with(without(s, par), c), wt);  // turn
                    add(with(s, c), -wt);                                                 // branch
                    break;
                }
                case Kind::end: {
                    const Stroke& st = w.strokes[e.a];
                    if (st.cause == EndCause::frozen) {
                        if (!((s.pending >> e.a) & 1)) { add(s, wt); break; }
                        if (markers_on(s, line[e.a]) > 1) break;
                        State n = s;
                        n.pending &= ~(std::uint64_t{1} << e.a);
                        add(n, wt);
                        break;
                    }
                    if (!has(s, e.a)) { add(s, wt); break; }
                    bool breaks = st.cause == EndCause::terminated || st.cause == EndCause::separated;
                    if (breaks && markers_on(s, line[e.a]) > 1) break;
                    add(without(s, e.a), wt);
                    break;
                }
            }
        }
        for (auto it = next.begin(); it != next.end();) it = it->second == 0 ? next.erase(it) : std::next(it);
        states.swap(next);
        if (states.size() > state_cap) {
            std::ostringstream os;
            os << "crop graph enumeration exceeded " << state_cap << " live collections";
            throw CropCapError(os.str());
        }
    }
    std::int64_t total = 0;
    for (const auto& [s, wt] : states) {
        if (!s.live.empty() || s.pending) throw std::logic_error("crop graph pass ended with live branches");
        total += wt;
    }
    return total;
}

}  // namespace pmf
