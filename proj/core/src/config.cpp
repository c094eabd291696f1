#include "pmf/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pmf/random.hpp"

namespace pmf {

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

double to_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + s + "'");
    return v;
}

std::uint64_t to_count(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("not a non-negative integer: '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ConfigError("integer out of range: '" + s + "'");
    }
}

std::vector<double> numbers(const std::vector<std::string>& w, std::size_t from) {
    std::vector<double> v;
    for (std::size_t i = from; i < w.size(); ++i) v.push_back(to_double(w[i]));
    return v;
}

ConvexDomain parse_domain(const std::string& spec) {
    auto w = words(spec);
    if (w.empty()) throw ConfigError("empty domain");
    auto v = numbers(w, 1);
    if (w[0] == "disc") {
        if (v.size() != 3) throw ConfigError("domain disc expects CX CY R");
        if (!(v[2] > 0.0)) throw ConfigError("disc radius must be positive");
        return ConvexDomain::disc({v[0], v[1]}, v[2]);
    }
    if (w[0] == "square") {
        if (v.size() != 3) throw ConfigError("domain square expects X Y SIDE");
        if (!(v[2] > 0.0)) throw ConfigError("square side must be positive");
        return ConvexDomain::square({v[0], v[1]}, v[2]);
    }
    if (w[0] == "polygon") {
        if (v.size() < 6 || v.size() % 2) throw ConfigError("domain polygon expects at least three X Y pairs");
        std::vector<Point> pts;
        for (std::size_t i = 0; i < v.size(); i += 2) pts.push_back({v[i], v[i + 1]});
        try {
            return ConvexDomain::polygon(pts);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("unknown domain kind '" + w[0] + "' (disc, square, polygon)");
}

ActivityMeasure parse_activity(const std::string& spec) {
    auto w = words(spec);
    if (w.empty()) throw ConfigError("empty activity");
    auto v = numbers(w, 1);
    if (w[0] == "homogeneous") {
        if (v.size() != 1) throw ConfigError("activity homogeneous expects LAMBDA");
        if (v[0] < 0.0) throw ConfigError("lambda must be non-negative");
        return ActivityMeasure::homogeneous(v[0]);
    }
    if (w[0] == "anisotropic") {
        if (v.size() != 2) throw ConfigError("activity anisotropic expects LAMBDA A");
        if (v[0] < 0.0) throw ConfigError("lambda must be non-negative");
        if (std::abs(v[1]) > 1.0) throw ConfigError("anisotropy must satisfy |a| <= 1");
        return ActivityMeasure::anisotropic(v[0], v[1]);
    }
    throw ConfigError("unknown activity kind '" + w[0] + "' (homogeneous, anisotropic)");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Re-prints the numbers of a value; the leading word is a keyword unless
// `all_numbers` is set.
std::string normalise(const std::string& spec, bool all_numbers = false) {
    auto w = words(spec);
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += i == 0 && !all_numbers ? w[i] : fmt(to_double(w[i]));
    }
    return out;
}

}  // namespace

WindowFamily RunConfig::family() const {
    if (concentric) return WindowFamily::concentric_disc(domain);
    if (origin) return WindowFamily::homothety(domain, *origin);
    return WindowFamily::homothety(domain, domain.shape() == ConvexDomain::Shape::disc ? domain.center()
                                                                                        : domain.bounding_disc().first);
}

std::string RunConfig::canonical() const {
    std::string s;
    s += "domain = " + normalise(domain_spec) + "\n";
    s += "family = " + normalise(family_spec) + "\n";
    s += "activity = " + normalise(activity_spec) + "\n";
    for (const auto& m : marker_specs) s += "marker = " + normalise(m, true) + "\n";
    s += std::string("stop_rule = ") + to_string(stop_rule) + "\n";
    s += "replicas = " + std::to_string(replicas) + "\n";
    s += "web_replicas = " + std::to_string(web_replicas) + "\n";
    s += "eps_x = " + fmt(phi.eps_x) + "\n";
    s += "eps_phi = " + fmt(phi.eps_phi) + "\n";
    s += std::string("method = ") + to_string(phi.method) + "\n";
    s += "placements = " + std::to_string(phi.placements) + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    return s;
}

std::string RunConfig::hash() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig cfg;
    std::vector<EdgeMarker> markers;
    std::string line;
    int lineno = 0;
    int marker_line = 0;
    int family_line = 0;
    auto fail = [&](int at, const std::string& msg) {
        throw ConfigError(source + ":" + std::to_string(at) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.empty()) fail(lineno, "missing value for '" + key + "'");
        try {
            if (key == "domain") {
                cfg.domain = parse_domain(value);
                cfg.domain_spec = value;
            } else if (key == "family") {
                auto w = words(value);
                if (w[0] == "homothety" && (w.size() == 1 || w.size() == 3)) {
                    cfg.concentric = false;
                    cfg.origin.reset();
                    if (w.size() == 3) cfg.origin = Point{to_double(w[1]), to_double(w[2])};
                } else if (w[0] == "concentric" && w.size() == 1) {
                    cfg.concentric = true;
                } else {
                    throw ConfigError("family expects 'homothety [OX OY]' or 'concentric'");
                }
                cfg.family_spec = value;
                family_line = lineno;
            } else if (key == "activity") {
                cfg.activity = parse_activity(value);
                cfg.activity_spec = value;
            } else if (key == "marker") {
                auto v = numbers(words(value), 0);
                if (v.size() != 3) throw ConfigError("marker expects PHI X Y");
                markers.push_back({Line::through(Point{v[1], v[2]}, v[0]), Point{v[1], v[2]}});
                cfg.marker_specs.push_back(value);
                marker_line = lineno;
            } else if (key == "stop_rule") {
                if (value == "tangency") {
                    cfg.stop_rule = StopRule::tangency;
                } else if (value == "immediate") {
                    cfg.stop_rule = StopRule::immediate;
                } else {
                    throw ConfigError("stop_rule expects 'tangency' or 'immediate'");
                }
            } else if (key == "replicas") {
                cfg.replicas = to_count(value);
            } else if (key == "web_replicas") {
                cfg.web_replicas = to_count(value);
            } else if (key == "eps_x" || key == "eps_phi") {
                double v = to_double(value);
                if (!(v > 0.0)) throw ConfigError(key + " must be positive");
                (key == "eps_x" ? cfg.phi.eps_x : cfg.phi.eps_phi) = v;
            } else if (key == "method") {
                if (value == "palm") {
                    cfg.phi.method = PhiMethod::palm;
                } else if (value == "window") {
                    cfg.phi.method = PhiMethod::window;
                } else {
                    throw ConfigError("method expects 'palm' or 'window'");
                }
            } else if (key == "placements") {
                cfg.phi.placements = to_count(value);
            } else if (key == "seed") {
                cfg.seed = to_count(value);
            } else if (key == "threads") {
                cfg.phi.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, to_count(value)));
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            fail(lineno, e.what());
        }
    }

    if (cfg.concentric && cfg.domain.shape() != ConvexDomain::Shape::disc)
        fail(family_line, "the concentric family needs a disc domain");
    if (cfg.origin && !cfg.domain.contains(*cfg.origin)) fail(family_line, "family origin outside the domain");
    try {
        cfg.markers = MarkerConfig(markers);
    } catch (const std::exception& e) {
        fail(marker_line, e.what());
    }
    for (std::size_t i = 0; i < markers.size(); ++i)
        if (cfg.domain.boundary_distance(markers[i].x) >= 0.0)
            fail(marker_line, "marker " + std::to_string(i) + " is not inside the domain");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    return parse_config(in, path);
}

}  // namespace pmf
