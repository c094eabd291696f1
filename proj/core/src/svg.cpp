#include "pmf/svg.hpp"

#include <cstdio>
#include <string>

#include "pmf/serialize.hpp"

namespace pmf {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

// Maps domain coordinates to pixels, y pointing up.
class Canvas {
public:
    Canvas(std::ostream& out, const ConvexDomain& d, const SvgStyle& st) : out_(out), st_(st) {
        auto [c, r] = d.bounding_disc();
        c_ = c;
        scale_ = 0.5 * st.size / (r * 1.05);
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(st.size) << "\" height=\""
             << num(st.size) << "\" viewBox=\"0 0 " << num(st.size) << ' ' << num(st.size) << "\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (d.shape() == ConvexDomain::Shape::disc) {
            Point p = map(d.center());
            out_ << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y) << "\" r=\"" << num(d.radius() * scale_)
                 << "\" fill=\"none\" stroke=\"#999\"/>\n";
        } else {
            out_ << "<polygon points=\"";
            for (Point v : d.vertices()) {
                Point p = map(v);
                out_ << num(p.x) << ',' << num(p.y) << ' ';
            }
            out_ << "\" fill=\"none\" stroke=\"#999\"/>\n";
        }
    }
    ~Canvas() { out_ << "</svg>\n"; }

    Point map(Point p) const { return {0.5 * st_.size + scale_ * (p.x - c_.x), 0.5 * st_.size - scale_ * (p.y - c_.y)}; }

    void segment(const Segment& s, const char* colour, double width, const char* extra = "") {
        Point a = map(s.a), b = map(s.b);
        out_ << "<line x1=\"" << num(a.x) << "\" y1=\"" << num(a.y) << "\" x2=\"" << num(b.x) << "\" y2=\"" << num(b.y)
             << "\" stroke=\"" << colour << "\" stroke-width=\"" << num(width) << '"' << extra << "/>\n";
    }

    void dot(Point q, const char* colour, double r) {
        Point p = map(q);
        out_ << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y) << "\" r=\"" << num(r) << "\" fill=\"" << colour
             << "\"/>\n";
    }

    void glyph(const CropNode& n) {
        Point p = map(n.p);
        double r = 4.0;
        switch (n.kind) {
            case CropNode::Kind::V:
                out_ << "<rect x=\"" << num(p.x - r) << "\" y=\"" << num(p.y - r) << "\" width=\"" << num(2 * r)
                     << "\" height=\"" << num(2 * r) << "\" fill=\"none\" stroke=\"black\"/>\n";
                break;
            case CropNode::Kind::T:
                out_ << "<polygon points=\"" << num(p.x) << ',' << num(p.y - r) << ' ' << num(p.x - r) << ','
                     << num(p.y + r) << ' ' << num(p.x + r) << ',' << num(p.y + r)
                     << "\" fill=\"none\" stroke=\"black\"/>\n";
                break;
            case CropNode::Kind::I:
                out_ << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y) << "\" r=\"" << num(r)
                     << "\" fill=\"none\" stroke=\"black\"/>\n";
                break;
        }
    }

private:
    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }

    std::ostream& out_;
    SvgStyle st_;
    Point c_;
    double scale_ = 1.0;
};

}  // namespace

void render_field(std::ostream& out, const FieldSample& s, const SvgStyle& style) {
    Canvas c(out, s.domain, style);
    for (const auto& e : s.edges) c.segment(e.seg, "black", style.stroke);
}

void render_web(std::ostream& out, const PolygonalWeb& w, const std::vector<CropGraph>& crops, const SvgStyle& style) {
    Canvas c(out, w.family.base(), style);
    constexpr std::size_t kColours = sizeof kPalette / sizeof kPalette[0];
    for (const auto& s : w.strokes) {
        if (s.start.x == s.end.x && s.start.y == s.end.y) continue;
        c.segment({s.start, s.end}, kPalette[static_cast<std::size_t>(s.root) % kColours], style.stroke,
                  s.kind == StrokeKind::forced ? " stroke-dasharray=\"4 2\"" : "");
    }
    for (const auto& m : w.markers.markers()) c.dot(m.x, "black", 3.0);
    for (const auto& g : crops) {
        for (const auto& e : g.edges) c.segment(e, "#000", 0.6 * style.stroke, " stroke-opacity=\"0.5\"");
        for (const auto& n : g.nodes) c.glyph(n);
    }
}

}  // namespace pmf
