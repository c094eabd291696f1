#include "pmf/edge_marker_process.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <unordered_map>

#include "pmf/carrier_bank.hpp"
#include "pmf/crop_engine.hpp"

namespace pmf {

namespace {

enum EventType : int { ev_pair = 0, ev_carrier = 1, ev_tangency = 2, ev_activate = 3 };

struct Event {
    double t;
    int type;
    std::uint64_t seq;
    int a;
    int b;
    int idx;
    Point z;
};

struct Earlier {
    bool operator()(const Event& x, const Event& y) const {
        if (x.t != y.t) return x.t < y.t;
        if (x.type != y.type) return x.type > y.type;
        return x.seq > y.seq;
    }
};

// A marker configuration: carriers holding a marker (with repetition) and
// the germs not yet revealed.
struct Config {
    std::vector<int> on;
    std::uint64_t pending = 0;
    bool operator<(const Config& o) const { return pending != o.pending ? pending < o.pending : on < o.on; }
};

using Population = std::map<Config, std::int64_t>;

struct Separation {
    double t;
    bool germ;
    int germ_index;
    std::uint64_t key;
    int side;
};

class Process {
public:
    Process(const ActivityMeasure& act, const WindowFamily& f, const MarkerConfig& mc, StopRule rule,
            std::uint64_t seed)
        : f_(f), dom_(f.base()), mc_(mc), rule_(rule), bank_(act, f, seed) {}

    std::int64_t run(const PolygonalWeb* schedule) {
        const std::size_t k = mc_.size();
        for (std::size_t i = 0; i < mc_.distinct_lines().size(); ++i) line_id(i, mc_.distinct_lines()[i], -1, 1.0);
        Config init;
        for (std::size_t j = 0; j < k; ++j) {
            int l = mc_.line_index(j);
            germ_line_.push_back(l);
            germ_side_.push_back(side_of(l, mc_[j].x));
            init.pending |= std::uint64_t{1} << j;
            push(f_.reveal_time(mc_[j].x), ev_activate, static_cast<int>(j), -1, -1, mc_[j].x);
        }
        pop_[init] = 1;
        if (rule_ == StopRule::immediate) load_separations(*schedule);

        std::size_t next_sep = 0;
        while (next_sep < seps_.size() && seps_[next_sep].t >= 1.0) separate(seps_[next_sep++]);
        while (!queue_.empty()) {
            Event e = queue_.top();
            while (next_sep < seps_.size() && e.t < seps_[next_sep].t) separate(seps_[next_sep++]);
            queue_.pop();
            now_ = e.t;
            switch (e.type) {
                case ev_pair: pair(e); break;
                case ev_carrier: carrier_event(e); break;
                case ev_tangency: tangency(e.a); break;
                case ev_activate: activate(e.a); break;
            }
            schedule_touched();
            if (pop_.size() > kMarkerStateCap) throw CropCapError("marker process exceeded its configuration cap");
        }
        while (next_sep < seps_.size()) separate(seps_[next_sep++]);

        std::int64_t total = 0;
        for (const auto& [c, w] : pop_)
            if (c.on.empty() && c.pending == 0) total += w;
        return total;
    }

private:
    struct LineRec {
        std::uint64_t key;
        Line line;
        Anchor anchor;
        double ua;
        int parent;
    };
    struct Carrier {
        int line;
        int side;
        int queued = -1;
    };

    void push(double t, int type, int a, int b, int idx, Point z = {}) {
        queue_.push(Event{t, type, seq_++, a, b, idx, z});
    }

    int line_id(std::uint64_t key, const Line& l, int parent, double t0) {
        auto it = by_key_.find(key);
        if (it != by_key_.end()) return it->second;
        Anchor a = f_.anchor(l);
        lines_.push_back(LineRec{key, l, a, l.param(a.point), parent});
        int id = static_cast<int>(lines_.size()) - 1;
        by_key_.emplace(key, id);
        for (int m = 0; m < id; ++m) {
            if (lines_[m].parent == id || parent == m) continue;
            auto x = intersect(l, lines_[m].line);
            if (!x.point || dom_.boundary_distance(*x.point) > 1e-12) continue;
            double tz = std::min(1.0, f_.reveal_time(*x.point));
            if (tz < t0 - 1e-12) push(tz, ev_pair, m, id, -1, *x.point);
        }
        if (a.time < t0) push(a.time, ev_tangency, id, -1, -1, a.point);
        return id;
    }

    int side_of(int line, Point p) const { return lines_[line].line.param(p) > lines_[line].ua ? 1 : -1; }

    int carrier(int line, int side) {
        auto key = std::make_pair(line, side);
        auto it = cindex_.find(key);
        if (it != cindex_.end()) return it->second;
        carriers_.push_back(Carrier{line, side});
        int id = static_cast<int>(carriers_.size()) - 1;
        cindex_.emplace(key, id);
        return id;
    }

    std::optional<int> find_carrier(int line, int side) const {
        auto it = cindex_.find(std::make_pair(line, side));
        if (it == cindex_.end()) return std::nullopt;
        return it->second;
    }

    static int count(const Config& c, int cid) {
        auto r = std::equal_range(c.on.begin(), c.on.end(), cid);
        return static_cast<int>(r.second - r.first);
    }

    int markers_on(const Config& c, int line) const {
        int n = 0;
        for (int cid : c.on) n += carriers_[cid].line == line;
        for (std::size_t j = 0; j < germ_line_.size(); ++j)
            if ((c.pending >> j) & 1) n += germ_line_[j] == line;
        return n;
    }

    Config add(Config c, int cid) {
        c.on.insert(std::upper_bound(c.on.begin(), c.on.end(), cid), cid);
        touched_.push_back(cid);
        return c;
    }

    static Config remove_one(Config c, int cid) {
        c.on.erase(std::lower_bound(c.on.begin(), c.on.end(), cid));
        return c;
    }

    static Config remove_all(Config c, int cid) {
        auto r = std::equal_range(c.on.begin(), c.on.end(), cid);
        c.on.erase(r.first, r.second);
        return c;
    }

    static void put(Population& p, const Config& c, std::int64_t w) {
        if (w == 0) return;
        auto it = p.emplace(c, 0).first;
        it->second += w;
        if (it->second == 0) p.erase(it);
    }

    // Each of the n markers on `from` may move to `to`: unchanged, turn
    // (the marker leaves, allowed when it is alone on its line) or branch
    // (both, with a sign change). Forced moves need another marker on the
    // target line.
    void offspring(Population& next, const Config& c, std::int64_t w, int n, int from, int to, bool forced) {
        Population cur{{c, w}};
        for (int i = 0; i < n; ++i) {
            Population step;
            for (const auto& [d, v] : cur) {
                put(step, d, v);
                if (forced && markers_on(d, carriers_[to].line) == 0) continue;
                if (markers_on(d, carriers_[from].line) == 1) put(step, add(remove_one(d, from), to), v);
                put(step, add(d, to), -v);
            }
            cur.swap(step);
        }
        for (const auto& [d, v] : cur) put(next, d, v);
    }

    // Markers on `cid` leave; a marker whose line still carries others
    // would break a coupling, and its configuration is discarded.
    void retire(int cid, bool breaks) {
        Population next;
        for (const auto& [c, w] : pop_) {
            if (count(c, cid) == 0) {
                put(next, c, w);
                continue;
            }
            if (breaks && markers_on(c, carriers_[cid].line) > 1) continue;
            put(next, remove_all(c, cid), w);
        }
        pop_.swap(next);
    }

    void pair(const Event& e) {
        const int l1 = e.a, l2 = e.b;
        const int s1 = side_of(l1, e.z), s2 = side_of(l2, e.z);
        const int c1 = carrier(l1, s1), c2 = carrier(l2, s2);
        Population next;
        for (const auto& [c, w] : pop_) {
            if (count(c, c1) == 0 || count(c, c2) == 0) {
                put(next, c, w);
                continue;
            }
            if (markers_on(c, l1) > 1 || markers_on(c, l2) > 1) continue;
            put(next, remove_one(remove_one(c, c1), c2), w);
        }
        Population forced;
        for (const auto& [c, w] : next) {
            if (int n = count(c, c1)) {
                offspring(forced, c, w, n, c1, c2, true);
            } else if (int n2 = count(c, c2)) {
                offspring(forced, c, w, n2, c2, c1, true);
            } else {
                put(forced, c, w);
            }
        }
        pop_.swap(forced);
    }

    bool present(int cid) const {
        for (const auto& [c, w] : pop_)
            if (count(c, cid) > 0) return true;
        return false;
    }

    void schedule_from(int cid, int from) {
        const Carrier c = carriers_[cid];
        const auto& ev = bank_.events(lines_[c.line].key, lines_[c.line].line, c.side);
        carriers_[cid].queued = -1;
        for (int i = from; i < static_cast<int>(ev.size()); ++i) {
            if (ev[i].t < now_ - 1e-13) {
                carriers_[cid].queued = i;
                push(ev[i].t, ev_carrier, cid, -1, i, ev[i].p);
                return;
            }
        }
    }

    void schedule_touched() {
        std::sort(touched_.begin(), touched_.end());
        touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
        for (int cid : touched_)
            if (carriers_[cid].queued < 0 && present(cid)) schedule_from(cid, 0);
        touched_.clear();
    }

    void carrier_event(const Event& e) {
        const int cid = e.a;
        if (!present(cid)) {
            carriers_[cid].queued = -1;
            return;
        }
        if (carriers_[cid].queued != e.idx) return;
        const Carrier c = carriers_[cid];
        const CarrierEvent ev = bank_.events(lines_[c.line].key, lines_[c.line].line, c.side)[e.idx];
        if (ev.kill) {
            retire(cid, true);
            carriers_[cid].queued = -1;
            return;
        }
        int nl = line_id(CarrierBank::turn_key(lines_[c.line].key, c.side, e.idx), ev.turn, c.line, e.t);
        const int to = carrier(nl, side_of(nl, ev.p));
        Population next;
        for (const auto& [cf, w] : pop_) {
            if (int n = count(cf, cid)) {
                offspring(next, cf, w, n, cid, to, false);
            } else {
                put(next, cf, w);
            }
        }
        pop_.swap(next);
        schedule_from(cid, e.idx + 1);
    }

    void tangency(int line) {
        if (auto p = find_carrier(line, 1)) retire(*p, false);
        if (auto m = find_carrier(line, -1)) retire(*m, false);
    }

    void activate(int j) {
        const int cid = carrier(germ_line_[j], germ_side_[j]);
        const std::uint64_t bit = std::uint64_t{1} << j;
        Population next;
        for (const auto& [c, w] : pop_) {
            Config d = remove_all(c, cid);
            if (d.pending & bit) {
                d.pending &= ~bit;
                d = add(d, cid);
            }
            put(next, d, w);
        }
        pop_.swap(next);
    }

    void load_separations(const PolygonalWeb& w) {
        for (const WebLogEntry& e : w.log) {
            if (e.kind != WebLogEntry::Kind::end) continue;
            const Stroke& s = w.strokes[e.a];
            if (s.cause == EndCause::frozen) {
                seps_.push_back(Separation{e.initial ? 1.0 : e.t, true, s.id, s.line_key, s.side});
            } else if (s.cause == EndCause::separated) {
                Separation sp{e.initial ? 1.0 : e.t, false, -1, s.line_key, s.side};
                if (seps_.empty() || seps_.back().germ || seps_.back().key != sp.key || seps_.back().side != sp.side ||
                    seps_.back().t != sp.t)
                    seps_.push_back(sp);
            }
        }
    }

    void separate(const Separation& s) {
        if (s.germ) {
            const std::uint64_t bit = std::uint64_t{1} << s.germ_index;
            Population next;
            for (const auto& [c, w] : pop_) {
                if (!(c.pending & bit)) {
                    put(next, c, w);
                    continue;
                }
                if (markers_on(c, germ_line_[s.germ_index]) > 1) continue;
                Config d = c;
                d.pending &= ~bit;
                put(next, d, w);
            }
            pop_.swap(next);
            return;
        }
        auto it = by_key_.find(s.key);
        if (it == by_key_.end()) return;
        if (auto cid = find_carrier(it->second, s.side)) retire(*cid, true);
    }

    const WindowFamily& f_;
    const ConvexDomain& dom_;
    const MarkerConfig& mc_;
    StopRule rule_;
    CarrierBank bank_;

    std::vector<LineRec> lines_;
    std::unordered_map<std::uint64_t, int> by_key_;
    std::vector<Carrier> carriers_;
    std::map<std::pair<int, int>, int> cindex_;
    std::vector<int> germ_line_;
    std::vector<int> germ_side_;
    std::vector<Separation> seps_;
    std::vector<int> touched_;
    Population pop_;
    std::priority_queue<Event, std::vector<Event>, Earlier> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 1.0;
};

}  // namespace

std::int64_t signed_marker_terminal(const ActivityMeasure& act, const WindowFamily& f, const MarkerConfig& mc,
                                    StopRule rule, std::uint64_t seed, const PolygonalWeb* schedule) {
    if (mc.size() > 64) throw std::invalid_argument("at most 64 markers are supported");
    std::optional<PolygonalWeb> own;
    if (rule == StopRule::immediate && !schedule) {
        own.emplace(sample_web(act, f, mc, rule, seed));
        schedule = &*own;
    }
    Process p(act, f, mc, rule, seed);
    return p.run(schedule);
}

}  // namespace pmf
