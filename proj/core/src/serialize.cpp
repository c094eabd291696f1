#include "pmf/serialize.hpp"

#include <cstdio>
#include <sstream>
#include <vector>

namespace pmf {

namespace {

constexpr const char* kFieldMagic = "pmf-field 1";
constexpr const char* kWebMagic = "pmf-web 1";

std::string pt(Point p) { return format_real(p.x) + " " + format_real(p.y); }

std::string line_text(const Line& l) { return format_real(l.phi) + " " + format_real(l.rho); }

void write_domain(std::ostream& out, const ConvexDomain& d) {
    if (d.shape() == ConvexDomain::Shape::disc) {
        out << "domain disc " << pt(d.center()) << ' ' << format_real(d.radius()) << '\n';
    } else {
        out << "domain polygon " << d.vertices().size();
        for (Point v : d.vertices()) out << ' ' << pt(v);
        out << '\n';
    }
}

void write_family(std::ostream& out, const WindowFamily& f) {
    if (f.kind() == WindowFamily::Kind::concentric_disc) {
        out << "family concentric\n";
    } else {
        out << "family homothety " << pt(f.origin()) << '\n';
    }
}

// Reads typed records and reports the line of any mismatch.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::istringstream& next(const std::string& tag) {
        std::string text;
        if (!std::getline(in_, text)) fail("unexpected end of input, expected '" + tag + "'");
        ++line_;
        cur_.clear();
        cur_.str(text);
        std::string got;
        cur_ >> got;
        if (got != tag) fail("expected '" + tag + "', found '" + got + "'");
        return cur_;
    }

    void magic(const std::string& m) {
        std::string text;
        if (!std::getline(in_, text)) fail("empty input");
        ++line_;
        if (text != m) fail("expected header '" + m + "'");
    }

    template <class T>
    T get() {
        T v{};
        if (!(cur_ >> v)) fail("malformed record");
        return v;
    }
    double real() { return get<double>(); }
    Point point() {
        double x = real();
        return {x, real()};
    }
    std::string word() { return get<std::string>(); }

    void done() {
        std::string extra;
        if (cur_ >> extra) fail("trailing data '" + extra + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError("line " + std::to_string(line_) + ": " + msg);
    }

private:
    std::istream& in_;
    std::istringstream cur_;
    int line_ = 0;
};

// Kept verbatim: re-normalising a rounded angle near pi would flip it.
Line read_line(Reader& r) {
    Line l;
    l.phi = r.real();
    l.rho = r.real();
    return l;
}

ConvexDomain read_domain(Reader& r) {
    r.next("domain");
    std::string kind = r.word();
    if (kind == "disc") {
        Point c = r.point();
        double R = r.real();
        r.done();
        return ConvexDomain::disc(c, R);
    }
    if (kind != "polygon") r.fail("unknown domain kind '" + kind + "'");
    auto n = r.get<std::size_t>();
    std::vector<Point> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(r.point());
    r.done();
    return ConvexDomain::polygon(v);
}

WindowFamily read_family(Reader& r, const ConvexDomain& d) {
    r.next("family");
    std::string kind = r.word();
    if (kind == "concentric") {
        r.done();
        return WindowFamily::concentric_disc(d);
    }
    if (kind != "homothety") r.fail("unknown family kind '" + kind + "'");
    Point o = r.point();
    r.done();
    return WindowFamily::homothety(d, o);
}

template <class E, std::size_t N>
E parse_enum(Reader& r, const std::string& s, const E (&all)[N]) {
    for (E e : all)
        if (s == to_string(e)) return e;
    r.fail("unknown value '" + s + "'");
}

const char* lineage_name(Lineage l) {
    switch (l) {
        case Lineage::line_birth: return "line_birth";
        case Lineage::vertex_birth: return "vertex_birth";
        case Lineage::directional_update: return "directional_update";
    }
    return "?";
}

const char* log_name(WebLogEntry::Kind k) {
    switch (k) {
        case WebLogEntry::Kind::meet: return "meet";
        case WebLogEntry::Kind::end: return "end";
        case WebLogEntry::Kind::start: return "start";
        case WebLogEntry::Kind::activate: return "activate";
    }
    return "?";
}

void write_ids(std::ostream& out, const std::vector<int>& ids) {
    out << ' ' << ids.size();
    for (int i : ids) out << ' ' << i;
}

std::vector<int> read_ids(Reader& r) {
    auto n = r.get<std::size_t>();
    std::vector<int> v(n);
    for (auto& i : v) i = r.get<int>();
    return v;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    if (std::string(buf) == "-0") return "0";
    return buf;
}

void write_field(std::ostream& out, const FieldSample& s) {
    out << kFieldMagic << '\n';
    out << "seed " << s.seed << '\n';
    write_domain(out, s.domain);
    write_family(out, s.family);
    out << "resamples " << s.degenerate_resamples << '\n';
    out << "edges " << s.edges.size() << '\n';
    for (const auto& e : s.edges)
        out << "edge " << pt(e.seg.a) << ' ' << pt(e.seg.b) << ' ' << line_text(e.line) << ' '
            << lineage_name(e.lineage) << '\n';
    out << "vertices " << s.vertices.size() << '\n';
    for (const auto& v : s.vertices) out << "vertex " << pt(v.p) << ' ' << v.degree << '\n';
}

FieldSample read_field(std::istream& in) {
    Reader r(in);
    r.magic(kFieldMagic);
    r.next("seed");
    auto seed = r.get<std::uint64_t>();
    r.done();
    ConvexDomain d = read_domain(r);
    WindowFamily f = read_family(r, d);
    FieldSample s(d, f);
    s.seed = seed;
    r.next("resamples");
    s.degenerate_resamples = r.get<int>();
    r.done();
    r.next("edges");
    auto ne = r.get<std::size_t>();
    r.done();
    for (std::size_t i = 0; i < ne; ++i) {
        r.next("edge");
        FieldEdge e;
        e.seg.a = r.point();
        e.seg.b = r.point();
        e.line = read_line(r);
        std::string lin = r.word();
        if (lin == "line_birth") {
            e.lineage = Lineage::line_birth;
        } else if (lin == "vertex_birth") {
            e.lineage = Lineage::vertex_birth;
        } else if (lin == "directional_update") {
            e.lineage = Lineage::directional_update;
        } else {
            r.fail("unknown lineage '" + lin + "'");
        }
        r.done();
        s.edges.push_back(e);
    }
    r.next("vertices");
    auto nv = r.get<std::size_t>();
    r.done();
    for (std::size_t i = 0; i < nv; ++i) {
        r.next("vertex");
        FieldVertex v;
        v.p = r.point();
        v.degree = r.get<int>();
        r.done();
        s.vertices.push_back(v);
    }
    return s;
}

void write_web(std::ostream& out, const PolygonalWeb& w) {
    out << kWebMagic << '\n';
    out << "seed " << w.seed << '\n';
    out << "stop_rule " << to_string(w.stop_rule) << '\n';
    write_domain(out, w.family.base());
    write_family(out, w.family);
    out << "markers " << w.markers.size() << '\n';
    for (const auto& m : w.markers.markers()) out << "marker " << line_text(m.line) << ' ' << pt(m.x) << '\n';
    out << "strokes " << w.strokes.size() << '\n';
    for (const auto& s : w.strokes) {
        out << "stroke " << s.id << ' ' << s.root << ' ' << s.parent << ' ' << to_string(s.kind) << ' ' << s.line_key
            << ' ' << line_text(s.line) << ' ' << s.side << ' ' << pt(s.start) << ' ' << format_real(s.t_start) << ' '
            << pt(s.end) << ' ' << format_real(s.t_end) << ' ' << to_string(s.cause) << ' ' << s.partner;
        write_ids(out, s.forcers);
        write_ids(out, s.children);
        out << '\n';
    }
    out << "log " << w.log.size() << '\n';
    for (const auto& e : w.log)
        out << "event " << log_name(e.kind) << ' ' << format_real(e.t) << ' ' << e.a << ' ' << e.b << ' '
            << (e.initial ? 1 : 0) << '\n';
}

PolygonalWeb read_web(std::istream& in) {
    static constexpr StrokeKind kinds[] = {StrokeKind::germ, StrokeKind::spontaneous, StrokeKind::forced};
    static constexpr EndCause causes[] = {EndCause::terminated, EndCause::tangency,   EndCause::separated,
                                          EndCause::frozen,     EndCause::merged_pair, EndCause::merged_germ};
    static constexpr StopRule rules[] = {StopRule::tangency, StopRule::immediate};
    Reader r(in);
    r.magic(kWebMagic);
    r.next("seed");
    auto seed = r.get<std::uint64_t>();
    r.done();
    r.next("stop_rule");
    StopRule rule = parse_enum(r, r.word(), rules);
    r.done();
    ConvexDomain d = read_domain(r);
    WindowFamily f = read_family(r, d);
    r.next("markers");
    auto k = r.get<std::size_t>();
    r.done();
    std::vector<EdgeMarker> ms;
    for (std::size_t i = 0; i < k; ++i) {
        r.next("marker");
        Line l = read_line(r);
        ms.push_back({l, r.point()});
        r.done();
    }
    PolygonalWeb w(MarkerConfig(ms), f);
    w.seed = seed;
    w.stop_rule = rule;
    r.next("strokes");
    auto m = r.get<std::size_t>();
    r.done();
    for (std::size_t i = 0; i < m; ++i) {
        r.next("stroke");
        Stroke s;
        s.id = r.get<int>();
        s.root = r.get<int>();
        s.parent = r.get<int>();
        s.kind = parse_enum(r, r.word(), kinds);
        s.line_key = r.get<std::uint64_t>();
        s.line = read_line(r);
        s.side = r.get<int>();
        s.start = r.point();
        s.t_start = r.real();
        s.end = r.point();
        s.t_end = r.real();
        s.cause = parse_enum(r, r.word(), causes);
        s.partner = r.get<int>();
        s.forcers = read_ids(r);
        s.children = read_ids(r);
        r.done();
        if (s.id != static_cast<int>(i)) r.fail("stroke ids must be consecutive");
        w.strokes.push_back(s);
    }
    r.next("log");
    auto nl = r.get<std::size_t>();
    r.done();
    for (std::size_t i = 0; i < nl; ++i) {
        r.next("event");
        WebLogEntry e;
        std::string kind = r.word();
        if (kind == "meet") {
            e.kind = WebLogEntry::Kind::meet;
        } else if (kind == "end") {
            e.kind = WebLogEntry::Kind::end;
        } else if (kind == "start") {
            e.kind = WebLogEntry::Kind::start;
        } else if (kind == "activate") {
            e.kind = WebLogEntry::Kind::activate;
        } else {
            r.fail("unknown event kind '" + kind + "'");
        }
        e.t = r.real();
        e.a = r.get<int>();
        e.b = r.get<int>();
        e.initial = r.get<int>() != 0;
        r.done();
        w.log.push_back(e);
    }
    return w;
}

}  // namespace pmf
