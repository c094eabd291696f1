#include "pmf/web_sampler.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

#include "pmf/carrier_bank.hpp"

namespace pmf {

const char* to_string(StopRule r) { return r == StopRule::tangency ? "tangency" : "immediate"; }

const char* to_string(StrokeKind k) {
    switch (k) {
        case StrokeKind::germ: return "germ";
        case StrokeKind::spontaneous: return "spontaneous";
        case StrokeKind::forced: return "forced";
    }
    return "?";
}

const char* to_string(EndCause c) {
    switch (c) {
        case EndCause::terminated: return "terminated";
        case EndCause::tangency: return "tangency";
        case EndCause::separated: return "separated";
        case EndCause::frozen: return "frozen";
        case EndCause::merged_pair: return "merged_pair";
        case EndCause::merged_germ: return "merged_germ";
    }
    return "?";
}

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
    // the queue pops the largest window time first
    bool operator()(const Event& x, const Event& y) const {
        if (x.t != y.t) return x.t < y.t;
        if (x.type != y.type) return x.type > y.type;
        return x.seq > y.seq;
    }
};

struct LineRec {
    std::uint64_t key = 0;
    Line line;
    Anchor anchor;
    double ua = 0.0;
    int parent = -1;
    int pending = 0;  // germs on this line not yet active or frozen
};

struct Carrier {
    int line = -1;
    int side = 1;
    std::vector<int> active;
    int queued = -1;
};

enum class GermState { pending, active, frozen };

class Builder {
public:
    Builder(const ActivityMeasure& act, const WindowFamily& f, const MarkerConfig& mc, StopRule rule, std::uint64_t seed,
            PolygonalWeb& out)
        : f_(f), dom_(f.base()), mc_(mc), rule_(rule), bank_(act, f, seed), w_(out) {}

    void run() {
        const std::size_t k = mc_.size();
        for (std::size_t i = 0; i < mc_.distinct_lines().size(); ++i) register_line(i, mc_.distinct_lines()[i], -1, 1.0);
        for (std::size_t j = 0; j < k; ++j) {
            const EdgeMarker& m = mc_[j];
            if (!dom_.contains(m.x, 1e-12)) throw GeometryError("marker " + std::to_string(j) + " outside the domain");
            int li = mc_.line_index(j);
            const LineRec& L = lines_[li];
            double u = L.line.param(m.x);
            if (std::abs(u - L.ua) <= kGeoEps)
                throw GeometryError("marker " + std::to_string(j) + " sits at the anchor of its line");
            Stroke s;
            s.id = static_cast<int>(j);
            s.root = static_cast<int>(j);
            s.kind = StrokeKind::germ;
            s.line_key = L.key;
            s.line = L.line;
            s.side = u > L.ua ? 1 : -1;
            s.start = s.end = m.x;
            s.t_start = f_.reveal_time(m.x);
            w_.strokes.push_back(s);
            germ_.push_back(GermState::pending);
            ++lines_[li].pending;
            push(s.t_start, ev_activate, static_cast<int>(j), -1, -1, m.x);
        }
        now_ = 1.0;
        if (rule_ == StopRule::immediate) separate(1.0, true);
        while (!queue_.empty()) {
            Event e = queue_.top();
            queue_.pop();
            now_ = e.t;
            switch (e.type) {
                case ev_pair: pair(e); break;
                case ev_carrier: carrier_event(e); break;
                case ev_tangency: tangency(e.a, e.t); break;
                case ev_activate: activate(e.a, e.t); break;
            }
            if (rule_ == StopRule::immediate) separate(e.t, false);
        }
        for (const Carrier& c : carriers_)
            if (!c.active.empty()) throw SamplingError("web construction left a carrier active");
        for (GermState g : germ_)
            if (g == GermState::pending) throw SamplingError("web construction left a germ pending");
    }

private:
    void push(double t, int type, int a, int b, int idx, Point z = {}) {
        queue_.push(Event{t, type, seq_++, a, b, idx, z});
    }

    int register_line(std::uint64_t key, const Line& l, int parent, double t0) {
        LineRec r;
        r.key = key;
        r.line = l;
        r.anchor = f_.anchor(l);
        r.ua = l.param(r.anchor.point);
        r.parent = parent;
        lines_.push_back(r);
        int id = static_cast<int>(lines_.size()) - 1;
        for (int m = 0; m < id; ++m) {
            if (lines_[m].parent == id || r.parent == m) continue;
            auto x = intersect(l, lines_[m].line);
            if (!x.point || dom_.boundary_distance(*x.point) > 1e-12) continue;
            double tz = std::min(1.0, f_.reveal_time(*x.point));
            if (tz < t0 - 1e-12) push(tz, ev_pair, m, id, -1, *x.point);
        }
        if (r.anchor.time < t0) push(r.anchor.time, ev_tangency, id, -1, -1, r.anchor.point);
        return id;
    }

    int side_of(int line, Point p) const { return lines_[line].line.param(p) > lines_[line].ua ? 1 : -1; }

    int carrier(int line, int side) {
        auto key = std::make_pair(line, side);
        auto it = cindex_.find(key);
        if (it != cindex_.end()) return it->second;
        Carrier c;
        c.line = line;
        c.side = side;
        carriers_.push_back(c);
        int id = static_cast<int>(carriers_.size()) - 1;
        cindex_.emplace(key, id);
        return id;
    }

    const Carrier* find_carrier(int line, int side) const {
        auto it = cindex_.find(std::make_pair(line, side));
        return it == cindex_.end() ? nullptr : &carriers_[it->second];
    }

    const std::vector<CarrierEvent>& events_of(const Carrier& c) {
        const LineRec& L = lines_[c.line];
        return bank_.events(L.key, L.line, c.side);
    }

    void schedule_from(int cid, int from) {
        const auto& ev = events_of(carriers_[cid]);
        Carrier& c = carriers_[cid];
        c.queued = -1;
        for (int i = from; i < static_cast<int>(ev.size()); ++i) {
            if (ev[i].t < now_ - 1e-13) {
                c.queued = i;
                push(ev[i].t, ev_carrier, cid, -1, i, ev[i].p);
                return;
            }
        }
    }

    void attach(int sid, int cid) {
        carriers_[cid].active.push_back(sid);
        if (carriers_[cid].queued < 0) schedule_from(cid, 0);
    }

    void log(WebLogEntry::Kind kind, double t, int a, int b = -1, bool initial = false) {
        if (w_.log.size() >= kMaxWebLog)
            throw SamplingError("web log exceeded " + std::to_string(kMaxWebLog) + " entries");
        w_.log.push_back(WebLogEntry{kind, t, a, b, initial});
    }

    void end_stroke(int sid, double t, Point p, EndCause cause, int partner = -1, bool initial = false) {
        Stroke& s = w_.strokes[sid];
        int cid = carrier(lines_index(s), s.side);
        auto& act = carriers_[cid].active;
        act.erase(std::remove(act.begin(), act.end(), sid), act.end());
        s.end = p;
        s.t_end = t;
        s.cause = cause;
        s.partner = partner;
        log(WebLogEntry::Kind::end, t, sid, -1, initial);
    }

    int lines_index(const Stroke& s) const { return line_of_stroke_.at(s.id); }

    int child(int parent, StrokeKind kind, int line, int side, Point p, double t) {
        if (w_.strokes.size() >= kMaxWebStrokes)
            throw SamplingError("web exceeded " + std::to_string(kMaxWebStrokes) + " strokes");
        Stroke s;
        s.id = static_cast<int>(w_.strokes.size());
        s.root = w_.strokes[parent].root;
        s.parent = parent;
        s.kind = kind;
        s.line_key = lines_[line].key;
        s.line = lines_[line].line;
        s.side = side;
        s.start = p;
        s.t_start = t;
        w_.strokes.push_back(s);
        w_.strokes[parent].children.push_back(s.id);
        line_of_stroke_[s.id] = line;
        log(WebLogEntry::Kind::start, t, s.id, parent);
        attach(s.id, carrier(line, side));
        return s.id;
    }

    bool presence_elsewhere(int line, int side) const {
        if (lines_[line].pending > 0) return true;
        const Carrier* o = find_carrier(line, -side);
        return o && !o->active.empty();
    }

    std::vector<int> forcers_on(int line, int side) const {
        std::vector<int> out;
        if (const Carrier* o = find_carrier(line, -side)) out = o->active;
        for (std::size_t j = 0; j < germ_.size(); ++j)
            if (germ_[j] == GermState::pending && line_of_stroke_.at(static_cast<int>(j)) == line)
                out.push_back(static_cast<int>(j));
        return out;
    }

    void pair(const Event& e) {
        const int l1 = e.a, l2 = e.b;
        const int s1 = side_of(l1, e.z), s2 = side_of(l2, e.z);
        const Carrier* ca = find_carrier(l1, s1);
        const Carrier* cb = find_carrier(l2, s2);
        std::vector<int> A = ca ? ca->active : std::vector<int>{};
        std::vector<int> B = cb ? cb->active : std::vector<int>{};
        if (A.empty() && B.empty()) return;
        for (int a : A)
            for (int b : B) log(WebLogEntry::Kind::meet, e.t, a, b);
        bool force_b = !A.empty() && presence_elsewhere(l2, s2);
        bool force_a = !B.empty() && presence_elsewhere(l1, s1);
        std::vector<int> fb = force_b ? forcers_on(l2, s2) : std::vector<int>{};
        std::vector<int> fa = force_a ? forcers_on(l1, s1) : std::vector<int>{};
        if (force_b)
            for (int a : A) w_.strokes[child(a, StrokeKind::forced, l2, s2, e.z, e.t)].forcers = fb;
        if (force_a)
            for (int b : B) w_.strokes[child(b, StrokeKind::forced, l1, s1, e.z, e.t)].forcers = fa;
    }

    void carrier_event(const Event& e) {
        const int cid = e.a;
        if (carriers_[cid].active.empty()) {
            carriers_[cid].queued = -1;
            return;
        }
        if (carriers_[cid].queued != e.idx) return;
        const CarrierEvent ev = events_of(carriers_[cid])[e.idx];
        const std::vector<int> on = carriers_[cid].active;
        const int line = carriers_[cid].line, side = carriers_[cid].side;
        if (ev.kill) {
            for (int s : on) end_stroke(s, e.t, ev.p, EndCause::terminated);
            carriers_[cid].queued = -1;
            return;
        }
        int nl = register_line(CarrierBank::turn_key(lines_[line].key, side, e.idx), ev.turn, line, e.t);
        int ns = side_of(nl, ev.p);
        for (int s : on) child(s, StrokeKind::spontaneous, nl, ns, ev.p, e.t);
        schedule_from(cid, e.idx + 1);
    }

    void tangency(int line, double t) {
        const Point p = lines_[line].anchor.point;
        const Carrier* cp = find_carrier(line, 1);
        const Carrier* cm = find_carrier(line, -1);
        std::vector<int> P = cp ? cp->active : std::vector<int>{};
        std::vector<int> M = cm ? cm->active : std::vector<int>{};
        if (!P.empty() && !M.empty()) {
            for (int s : P) end_stroke(s, t, p, EndCause::merged_pair, M.front());
            for (int s : M) end_stroke(s, t, p, EndCause::merged_pair, P.front());
            return;
        }
        for (int s : P) end_stroke(s, t, p, EndCause::tangency);
        for (int s : M) end_stroke(s, t, p, EndCause::tangency);
    }

    void activate(int j, double t) {
        if (germ_[j] != GermState::pending) return;
        Stroke& g = w_.strokes[j];
        int line = line_of_stroke_.at(j);
        int cid = carrier(line, g.side);
        const std::vector<int> on = carriers_[cid].active;
        for (int s : on) end_stroke(s, t, g.start, EndCause::merged_germ, j);
        germ_[j] = GermState::active;
        --lines_[line].pending;
        w_.strokes[j].t_start = t;
        log(WebLogEntry::Kind::activate, t, j);
        attach(j, cid);
    }

    void separate(double t, bool initial) {
        for (;;) {
            std::vector<int> live;
            std::vector<Point> tips;
            for (int c = 0; c < static_cast<int>(carriers_.size()); ++c) {
                if (carriers_[c].active.empty()) continue;
                const LineRec& L = lines_[carriers_[c].line];
                live.push_back(c);
                tips.push_back(f_.point_at(L.line, L.anchor, carriers_[c].side, t));
            }
            std::vector<int> pend;
            for (std::size_t j = 0; j < germ_.size(); ++j)
                if (germ_[j] == GermState::pending) pend.push_back(static_cast<int>(j));

            std::vector<int> cut_c, cut_g;
            std::vector<Point> others;
            for (std::size_t i = 0; i < live.size(); ++i) {
                others.clear();
                for (std::size_t o = 0; o < live.size(); ++o)
                    if (o != i) others.push_back(tips[o]);
                for (int j : pend) others.push_back(w_.strokes[j].start);
                if (separates(lines_[carriers_[live[i]].line].line, others)) cut_c.push_back(static_cast<int>(i));
            }
            for (int j : pend) {
                others = tips;
                for (int o : pend)
                    if (o != j) others.push_back(w_.strokes[o].start);
                if (separates(w_.strokes[j].line, others)) cut_g.push_back(j);
            }
            if (cut_c.empty() && cut_g.empty()) return;
            for (int i : cut_c) {
                const std::vector<int> on = carriers_[live[i]].active;
                for (int s : on) end_stroke(s, t, tips[i], EndCause::separated, -1, initial);
            }
            for (int j : cut_g) {
                germ_[j] = GermState::frozen;
                --lines_[line_of_stroke_.at(j)].pending;
                Stroke& g = w_.strokes[j];
                g.t_start = t;
                g.t_end = t;
                g.end = g.start;
                g.cause = EndCause::frozen;
                log(WebLogEntry::Kind::end, t, j, -1, initial);
            }
        }
    }

    const WindowFamily& f_;
    const ConvexDomain& dom_;
    const MarkerConfig& mc_;
    StopRule rule_;
    CarrierBank bank_;
    PolygonalWeb& w_;

    std::vector<LineRec> lines_;
    std::vector<Carrier> carriers_;
    std::map<std::pair<int, int>, int> cindex_;
    std::map<int, int> line_of_stroke_;
    std::vector<GermState> germ_;
    std::priority_queue<Event, std::vector<Event>, Earlier> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 1.0;

public:
    void bind_germ_lines() {
        for (std::size_t j = 0; j < mc_.size(); ++j) line_of_stroke_[static_cast<int>(j)] = mc_.line_index(j);
    }
};

}  // namespace

std::vector<int> PolygonalWeb::branch(int terminal) const {
    std::vector<int> chain;
    for (int s = terminal; s >= 0; s = strokes[s].parent) chain.push_back(s);
    std::reverse(chain.begin(), chain.end());
    return chain;
}

std::vector<Point> PolygonalWeb::branch_polyline(int terminal) const {
    std::vector<Point> pts;
    for (int s : branch(terminal)) pts.push_back(strokes[s].start);
    pts.push_back(strokes[terminal].end);
    return pts;
}

std::vector<WebNode> PolygonalWeb::nodes() const {
    std::vector<WebNode> out;
    for (const Stroke& s : strokes) {
        if (s.parent >= 0) out.push_back({WebNode::Kind::T, s.start});
        out.push_back({WebNode::Kind::I, s.end});
    }
    for (const WebLogEntry& e : log) {
        if (e.kind != WebLogEntry::Kind::meet) continue;
        auto x = intersect(strokes[e.a].line, strokes[e.b].line);
        if (x.point) out.push_back({WebNode::Kind::X, *x.point});
    }
    return out;
}

PolygonalWeb sample_web(const ActivityMeasure& act, const WindowFamily& f, const MarkerConfig& mc, StopRule rule,
                        std::uint64_t seed) {
    if (mc.size() > 64) throw std::invalid_argument("at most 64 markers are supported");
    PolygonalWeb w(mc, f);
    w.stop_rule = rule;
    w.seed = seed;
    Builder b(act, f, mc, rule, seed, w);
    b.bind_germ_lines();
    b.run();
    return w;
}

PolygonalWeb zero_activity_web(const WindowFamily& f, const MarkerConfig& mc, StopRule rule) {
    return sample_web(ActivityMeasure::homogeneous(0.0), f, mc, rule, 0);
}

WebCheck check_web(const PolygonalWeb& w) {
    WebCheck r;
    auto fail = [&](const std::string& m) {
        r.ok = false;
        r.violations.push_back(m);
    };
    if (w.strokes.size() < w.k()) fail("fewer terminals than markers");
    for (const Stroke& s : w.strokes) {
        std::string id = "stroke " + std::to_string(s.id);
        if (s.kind == StrokeKind::forced) {
            if (s.forcers.empty()) fail(id + " is forced without a forcer");
            for (int o : s.forcers)
                if (w.strokes[o].line_key != s.line_key || !same_line(w.strokes[o].line, s.line, 1e-9))
                    fail(id + " is not colinear with its forcer");
        }
        if (s.parent >= 0 && std::abs(w.family.reveal_time(s.start) - s.t_start) > 1e-9)
            fail(id + " starts off the window boundary");
        if (s.cause == EndCause::merged_pair) {
            if (s.partner < 0 || w.strokes[s.partner].cause != EndCause::merged_pair ||
                distance(w.strokes[s.partner].end, s.end) > 1e-9)
                fail(id + " has an unmatched coalescence");
        }
        if (s.cause == EndCause::merged_germ && (s.partner < 0 || w.strokes[s.partner].line_key != s.line_key))
            fail(id + " merges into a germ on another line");
    }
    // V-shaped nodes: two terminals on different lines at one point
    for (std::size_t i = 0; i < w.strokes.size(); ++i)
        for (std::size_t j = i + 1; j < w.strokes.size(); ++j) {
            const Stroke& a = w.strokes[i];
            const Stroke& b = w.strokes[j];
            if (a.line_key != b.line_key && a.cause != EndCause::frozen && b.cause != EndCause::frozen &&
                distance(a.end, b.end) <= 1e-9)
                fail("V-shaped node at strokes " + std::to_string(i) + " and " + std::to_string(j));
        }
    return r;
}

}  // namespace pmf
