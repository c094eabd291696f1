#include "pmf/field_sampler.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace pmf {

namespace {

enum EventKind : int { ev_collision = 0, ev_boundary = 1, ev_turn = 2, ev_birth = 3 };

struct Event {
    double t;
    int kind;
    std::uint64_t seq;
    int a;  // ray, or birth index
    int b;  // second ray for collisions
    unsigned va;
    unsigned vb;
    Point z;
};

struct EventLater {
    bool operator()(const Event& x, const Event& y) const {
        if (x.t != y.t) return x.t > y.t;
        if (x.kind != y.kind) return x.kind > y.kind;
        return x.seq > y.seq;
    }
};

struct LineInfo {
    Line line;
    Anchor anchor;
    double u_lo = 0.0;  // chord in the closed domain
    double u_hi = 0.0;
    double u_anchor = 0.0;
};

struct Ray {
    int line = -1;
    int side = 1;
    int edge = -1;
    bool end_b = true;
    Point start;
    double u_start = 0.0;
    double u_reach = 0.0;  // next turn point or the boundary
    bool alive = true;
    unsigned version = 0;
};

struct Birth {
    bool vertex = false;
    int line = -1;  // line birth
    int l1 = -1, l2 = -1;
    Point z;
};

struct Builder {
    const ActivityMeasure& act;
    const WindowFamily& fam;
    Rng& rng;
    FieldSample& out;
    FieldStats& stats;

    std::vector<LineInfo> lines;
    std::vector<Ray> rays;
    std::vector<Birth> births;
    std::priority_queue<Event, std::vector<Event>, EventLater> queue;
    std::uint64_t seq = 0;
    double now = 0.0;

    int add_line(const Line& l) {
        auto c = fam.base().chord(l);
        if (!c) return -1;
        LineInfo li;
        li.line = l;
        li.anchor = fam.anchor(l);
        li.u_lo = c->u0;
        li.u_hi = c->u1;
        li.u_anchor = l.param(li.anchor.point);
        lines.push_back(li);
        return static_cast<int>(lines.size()) - 1;
    }

    void push(double t, int kind, int a, int b, Point z = {}) {
        unsigned va = a >= 0 && kind != ev_birth ? rays[a].version : 0;
        unsigned vb = b >= 0 ? rays[b].version : 0;
        queue.push(Event{t, kind, seq++, a, b, va, vb, z});
    }

    int side_of(int line, Point p) const {
        const LineInfo& li = lines[line];
        return li.line.param(p) >= li.u_anchor ? 1 : -1;
    }

    int new_edge(int line, Point start, Lineage lin) {
        out.edges.push_back(FieldEdge{{start, start}, lines[line].line, lin});
        return static_cast<int>(out.edges.size()) - 1;
    }

    void set_tip(const Ray& r, Point p) {
        FieldEdge& e = out.edges[r.edge];
        if (r.end_b) e.seg.b = p; else e.seg.a = p;
    }

    int new_ray(int line, int side, int edge, bool end_b, Point start) {
        Ray r;
        r.line = line;
        r.side = side;
        r.edge = edge;
        r.end_b = end_b;
        r.start = start;
        r.u_start = lines[line].line.param(start);
        rays.push_back(r);
        int id = static_cast<int>(rays.size()) - 1;
        schedule_turn(id, start);
        schedule_collisions(id, r.u_start, kGeoEps);
        return id;
    }

    void schedule_turn(int id, Point from) {
        Ray& r = rays[id];
        const LineInfo& li = lines[r.line];
        r.u_reach = r.side > 0 ? li.u_hi : li.u_lo;
        if (act.m_max() == 0.0) return;
        double s = rng.exponential(2.0 * act.m_max());
        double u = li.line.param(from) + r.side * s;
        if (r.side * (r.u_reach - u) <= 0.0) return;  // reaches the boundary first
        r.u_reach = u;
        Point q = li.line.at(u);
        push(fam.reveal_time(q), ev_turn, id, -1, q);
    }

    // Collisions of the stretch of ray id beyond u_from with the reach of every live ray.
    void schedule_collisions(int id, double u_from, double margin) {
        const Ray& r = rays[id];
        const Line& rl = lines[r.line].line;
        for (int j = 0; j < static_cast<int>(rays.size()); ++j) {
            if (j == id || !rays[j].alive || rays[j].line == r.line) continue;
            const Ray& o = rays[j];
            auto x = intersect(rl, lines[o.line].line);
            if (!x.point) continue;
            Point z = *x.point;
            double u = rl.param(z);
            if (r.side * (u - u_from) <= margin || r.side * (r.u_reach - u) < 0.0) continue;
            if (!within(o, z)) continue;
            double t = fam.reveal_time(z);
            if (t <= now) continue;
            push(t, ev_collision, id, j, z);
        }
    }

    bool within(const Ray& r, Point z) const {
        double u = lines[r.line].line.param(z);
        return r.side * (u - r.u_start) > kGeoEps && r.side * (r.u_reach - u) >= 0.0;
    }

    void add_vertex(Point p, int degree) { out.vertices.push_back(FieldVertex{p, degree}); }

    void kill(int id, Point at) {
        Ray& r = rays[id];
        r.alive = false;
        ++r.version;
        set_tip(r, at);
    }

    void turn(int id, Point q) {
        const Ray& r = rays[id];
        Line incoming = lines[r.line].line;
        // proposal at the envelope rate; accept against the local density
        double phi = incoming.phi + sample_sine_gap(rng);
        Line nl = Line::through(q, phi);
        if (act.kind() != ActivityMeasure::Kind::homogeneous && rng.uniform() * act.m_max() >= act.density(nl)) {
            extend(id, q);
            return;
        }
        int li = add_line(nl);
        if (li < 0) {
            extend(id, q);
            return;
        }
        kill(id, q);
        add_vertex(q, 2);
        ++stats.turns;
        int side = side_of(li, q);
        int e = new_edge(li, q, Lineage::directional_update);
        new_ray(li, side, e, true, q);
    }

    void extend(int id, Point q) {
        schedule_turn(id, q);
        schedule_collisions(id, lines[rays[id].line].line.param(q), 0.0);
    }

    void birth(const Birth& b) {
        if (!b.vertex) {
            const LineInfo& li = lines[b.line];
            int e = new_edge(b.line, li.anchor.point, Lineage::line_birth);
            new_ray(b.line, -1, e, false, li.anchor.point);
            new_ray(b.line, 1, e, true, li.anchor.point);
            ++stats.line_births;
            return;
        }
        add_vertex(b.z, 2);
        int e1 = new_edge(b.l1, b.z, Lineage::vertex_birth);
        int e2 = new_edge(b.l2, b.z, Lineage::vertex_birth);
        new_ray(b.l1, side_of(b.l1, b.z), e1, true, b.z);
        new_ray(b.l2, side_of(b.l2, b.z), e2, true, b.z);
        ++stats.vertex_births;
    }

    void finish() {
        for (int id = 0; id < static_cast<int>(rays.size()); ++id) {
            Ray& r = rays[id];
            if (!r.alive) continue;
            const LineInfo& li = lines[r.line];
            Point p = li.line.at(r.side > 0 ? li.u_hi : li.u_lo);
            kill(id, p);
            add_vertex(p, 1);
        }
    }
};

}  // namespace

FieldSampler::FieldSampler(ActivityMeasure act, WindowFamily family) : act_(std::move(act)), family_(std::move(family)) {
    const ConvexDomain& d = family_.base();
    switch (act_.kind()) {
        case ActivityMeasure::Kind::homogeneous:
        case ActivityMeasure::Kind::anisotropic:
            vertex_mean_ = act_.intersection_measure(d);
            break;
        case ActivityMeasure::Kind::custom:
            vertex_mean_ = act_.m_max() * act_.m_max() * kPi * d.area();
            break;
    }
}

bool FieldSampler::run(Rng& rng, FieldSample& out, FieldStats& stats) const {
    Builder b{act_, family_, rng, out, stats, {}, {}, {}, {}, 0, 0.0};
    const ConvexDomain& dom = family_.base();

    for (const Line& l : act_.sample_line_process(dom, rng)) {
        int li = b.add_line(l);
        if (li < 0) continue;
        Birth br;
        br.line = li;
        b.births.push_back(br);
        b.push(b.lines[li].anchor.time, ev_birth, static_cast<int>(b.births.size()) - 1, -1);
    }
    if (act_.m_max() > 0.0) {
        std::uint64_t n = rng.poisson(vertex_mean_);
        for (std::uint64_t i = 0; i < n; ++i) {
            Point z = dom.sample_uniform(rng);
            Line l1, l2;
            if (act_.kind() == ActivityMeasure::Kind::custom) {
                double phi1 = kPi * rng.uniform();
                double phi2 = phi1 + sample_sine_gap(rng);
                l1 = Line::through(z, phi1);
                l2 = Line::through(z, phi2);
                double m2 = act_.m_max() * act_.m_max();
                if (rng.uniform() * m2 >= act_.density(l1) * act_.density(l2)) continue;
            } else {
                std::tie(l1, l2) = act_.sample_vertex_pair(z, rng);
            }
            Birth br;
            br.vertex = true;
            br.z = z;
            br.l1 = b.add_line(l1);
            br.l2 = b.add_line(l2);
            if (br.l1 < 0 || br.l2 < 0) continue;
            b.births.push_back(br);
            b.push(family_.reveal_time(z), ev_birth, static_cast<int>(b.births.size()) - 1, -1);
        }
    }

    while (!b.queue.empty()) {
        Event e = b.queue.top();
        b.queue.pop();
        b.now = e.t;
        switch (e.kind) {
            case ev_birth:
                b.birth(b.births[e.a]);
                break;
            case ev_turn:
                if (!b.rays[e.a].alive || b.rays[e.a].version != e.va) break;
                b.turn(e.a, e.z);
                break;
            case ev_collision: {
                Ray& r1 = b.rays[e.a];
                Ray& r2 = b.rays[e.b];
                if (!r1.alive || !r2.alive || r1.version != e.va || r2.version != e.vb) break;
                b.kill(e.a, e.z);
                b.kill(e.b, e.z);
                b.add_vertex(e.z, 2);
                ++stats.collisions;
                break;
            }
            default:
                break;
        }
    }
    b.finish();
    return check_admissible(out).ok;
}

FieldSample FieldSampler::sample(Rng& rng, FieldStats* stats) const {
    FieldSample out(family_.base(), family_);
    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        out.edges.clear();
        out.vertices.clear();
        FieldStats st;
        if (run(rng, out, st)) {
            out.degenerate_resamples = attempt;
            if (stats) *stats = st;
            return out;
        }
    }
    std::ostringstream os;
    os << "field sampler: degenerate draws exceeded the resampling budget\n";
    for (const auto& v : check_admissible(out).violations) os << "  " << v << "\n";
    throw SamplingError(os.str());
}

FieldSample FieldSampler::sample(std::uint64_t seed, FieldStats* stats) const {
    Rng rng(seed);
    FieldSample s = sample(rng, stats);
    s.seed = seed;
    return s;
}

FieldSample sample_field(const ActivityMeasure& act, const WindowFamily& f, Rng& rng) {
    return FieldSampler(act, f).sample(rng);
}

AdmissibilityReport check_admissible(const FieldSample& s, double tol) {
    AdmissibilityReport rep;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };
    const auto& E = s.edges;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (E[i].seg.length() <= kGeoEps) fail("edge " + std::to_string(i) + " has zero length");
        if (!s.domain.contains(E[i].seg.a, tol) || !s.domain.contains(E[i].seg.b, tol))
            fail("edge " + std::to_string(i) + " leaves the domain");
    }
    auto is_end = [&](Point p, const Segment& e) { return distance(p, e.a) <= tol || distance(p, e.b) <= tol; };
    std::vector<Line> lines;
    lines.reserve(E.size());
    for (const auto& e : E) lines.push_back(Line::through(e.seg.a, e.seg.b));
    for (std::size_t i = 0; i < E.size(); ++i)
        for (std::size_t j = i + 1; j < E.size(); ++j)
            if (same_line(lines[i], lines[j], 1e-8))
                fail("edges " + std::to_string(i) + " and " + std::to_string(j) + " are colinear");
    // crossings, swept over x so only overlapping boxes are tested
    std::vector<std::size_t> by_x(E.size());
    for (std::size_t i = 0; i < E.size(); ++i) by_x[i] = i;
    auto lo_x = [&](std::size_t i) { return std::min(E[i].seg.a.x, E[i].seg.b.x); };
    auto hi_x = [&](std::size_t i) { return std::max(E[i].seg.a.x, E[i].seg.b.x); };
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t i, std::size_t j) { return lo_x(i) < lo_x(j); });
    for (std::size_t p = 0; p < by_x.size(); ++p) {
        std::size_t i = by_x[p];
        double ylo = std::min(E[i].seg.a.y, E[i].seg.b.y), yhi = std::max(E[i].seg.a.y, E[i].seg.b.y);
        for (std::size_t q = p + 1; q < by_x.size() && lo_x(by_x[q]) <= hi_x(i) + tol; ++q) {
            std::size_t j = by_x[q];
            if (std::max(E[j].seg.a.y, E[j].seg.b.y) < ylo - tol || std::min(E[j].seg.a.y, E[j].seg.b.y) > yhi + tol)
                continue;
            if (same_line(lines[i], lines[j], 1e-8)) continue;
            auto x = intersect(E[i].seg, E[j].seg);
            if (!x) continue;
            if (!(is_end(*x, E[i].seg) && is_end(*x, E[j].seg)))
                fail("edges " + std::to_string(std::min(i, j)) + " and " + std::to_string(std::max(i, j)) + " intersect");
        }
    }
    // cluster endpoints and check degrees
    std::vector<Point> ends;
    for (const auto& e : E) {
        ends.push_back(e.seg.a);
        ends.push_back(e.seg.b);
    }
    std::vector<std::size_t> order(ends.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return ends[i].x < ends[j].x; });
    std::vector<int> node_of(ends.size(), -1);
    std::vector<Point> nodes;
    std::vector<int> degree;
    for (std::size_t p = 0; p < order.size(); ++p) {
        std::size_t i = order[p];
        for (std::size_t q = p; q-- > 0 && ends[i].x - ends[order[q]].x <= tol;) {
            if (distance(ends[i], ends[order[q]]) <= tol) {
                node_of[i] = node_of[order[q]];
                break;
            }
        }
        if (node_of[i] < 0) {
            node_of[i] = static_cast<int>(nodes.size());
            nodes.push_back(ends[i]);
            degree.push_back(0);
        }
        ++degree[node_of[i]];
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        bool boundary = s.domain.on_boundary(nodes[k], tol);
        int want = boundary ? 1 : 2;
        if (degree[k] != want) {
            std::ostringstream os;
            os << (boundary ? "boundary" : "interior") << " vertex (" << nodes[k].x << ", " << nodes[k].y << ") has degree "
               << degree[k];
            fail(os.str());
        }
    }
    return rep;
}

bool marker_hit(const FieldSample& s, const Line& l, Point x, double eps_x, double eps_phi) {
    for (const auto& e : s.edges) {
        if (angle_gap(e.line.phi, l.phi) > eps_phi) continue;
        if (distance_to_segment(x, e.seg) <= eps_x) return true;
    }
    return false;
}

std::vector<Segment> restrict_to(const FieldSample& s, const ConvexDomain& sub, double tol) {
    std::vector<Segment> out;
    for (const auto& e : s.edges) {
        auto c = sub.clip(e.seg);
        if (c && c->length() > tol) out.push_back(*c);
    }
    return out;
}

std::size_t count_crossings(const FieldSample& s, const Segment& probe) {
    std::size_t n = 0;
    for (const auto& e : s.edges)
        if (intersect(e.seg, probe)) ++n;
    return n;
}

}  // namespace pmf
