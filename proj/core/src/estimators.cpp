#include "pmf/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <thread>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "pmf/crop_engine.hpp"
#include "pmf/field_sampler.hpp"
#include "pmf/random.hpp"

namespace pmf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs fn(i) for i in [0, n). Each index owns its output slot, so results do
// not depend on the thread count.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += threads) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Moments {
    std::size_t n = 0;
    double sum = 0.0;
    double sq = 0.0;

    void add(double v) { ++n; sum += v; sq += v * v; }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        double m = mean();
        return std::max(0.0, (sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    }
    double se() const { return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

void check_markers(const MarkerConfig& mc) {
    if (mc.singular())
        throw std::invalid_argument("singular marker configuration: a marker lies on a foreign marker line");
}

// Marker params on each distinct line, as the range an edge must cover.
std::vector<std::optional<Chord>> marker_cover(const MarkerConfig& mc) {
    const auto& lines = mc.distinct_lines();
    std::vector<std::optional<Chord>> cover(lines.size());
    for (std::size_t j = 0; j < mc.size(); ++j) {
        int li = mc.line_index(j);
        double u = lines[li].param(mc[j].x);
        if (!cover[li]) {
            cover[li] = Chord{u, u};
        } else {
            cover[li]->u0 = std::min(cover[li]->u0, u);
            cover[li]->u1 = std::max(cover[li]->u1, u);
        }
    }
    return cover;
}

double poisson_pmf(double mean, std::size_t n) {
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return boost::math::pdf(boost::math::poisson_distribution<double>(mean), static_cast<double>(n));
}

struct StratifiedResult {
    double estimate = 0.0;  // of the sum over all strata, unnormalised
    double se = 0.0;
    double truncation = 0.0;
    std::size_t evaluations = 0;
    std::size_t failures = 0;
    /// Probability of the draws left out: refused by the sweep cap or
    /// beyond the line cap.
    double overflow = 0.0;
};

using StratumEval = std::function<double(std::vector<Line>&, std::size_t& work)>;

// E f(N lines) for N ~ Poisson(mu) and iid lines hitting `dom`, stratified
// by N: the stratum weights are exact and each stratum is estimated from its
// own draws. After a pilot, the remaining budget of evaluations is allocated
// in proportion to p sd / sqrt(cost), with cost the mean sweep work of the
// stratum, which keeps the allocation deterministic. Strata stop once their
// share falls below `tol` of the running total or at `max_lines` lines.
StratifiedResult stratified_poisson(const ActivityMeasure& act, const ConvexDomain& dom, std::size_t max_lines,
                                    std::size_t n, std::uint64_t seed, std::string_view tag, double tol,
                                    unsigned threads, const StratumEval& eval) {
    const double mu = act.hit_mass(dom);
    struct Stratum {
        std::size_t lines = 0;
        double p = 0.0;
        Moments m;
        double work = 0.0;  // total over all draws
        std::size_t overflow = 0;
    };
    std::vector<Stratum> strata;
    StratifiedResult res;

    auto draw = [&](Stratum& s, std::size_t count) {
        const std::size_t offset = s.m.n;
        std::vector<double> vals(count);
        std::vector<std::size_t> fails(count, 0), work(count, 0);
        std::vector<char> over(count, 0);
        parallel_for(count, threads, [&](std::size_t i) {
            Rng rng(derive_seed(seed, tag, hash_combine(s.lines, offset + i)));
            for (int attempt = 0;; ++attempt) {
                std::vector<Line> ls;
                for (std::size_t q = 0; q < s.lines; ++q) ls.push_back(act.sample_hitting_line(dom, rng));
                try {
                    vals[i] = eval(ls, work[i]);
                    return;
                } catch (const EnumerationCapError&) {
                    over[i] = 1;
                    return;
                } catch (const GeometryError&) {
                    if (attempt >= FieldSampler::kMaxResamples) throw;
                    ++fails[i];
                }
            }
        });
        for (std::size_t i = 0; i < count; ++i) {
            s.work += static_cast<double>(work[i]);
            if (over[i]) {
                ++s.overflow;
                continue;
            }
            s.m.add(vals[i]);
            res.failures += fails[i];
        }
        res.evaluations += count;
    };
    auto cost = [](const Stratum& s) {
        return 1.0 + s.work / static_cast<double>(std::max<std::size_t>(s.m.n + s.overflow, 1));
    };

    // no random lines: a single deterministic value
    strata.push_back({0, poisson_pmf(mu, 0), {}, 0.0, 0});
    draw(strata[0], 1);
    if (mu == 0.0) {
        res.estimate = strata[0].m.mean();
        return res;
    }

    // fewer pilot draws once a stratum gets expensive
    constexpr std::size_t kPilot = 32, kShortPilot = 8;
    constexpr double kExpensive = 2e5;
    const std::size_t min_strata = static_cast<std::size_t>(std::ceil(2.0 * mu)) + 2;
    double total = strata[0].p * strata[0].m.mean();
    for (std::size_t k = 1;; ++k) {
        if (k > max_lines) {
            // the Poisson tail beyond the cap is left out; extrapolate it geometrically
            const auto& a = strata[strata.size() - 2];
            const auto& b = strata.back();
            double ca = a.p * a.m.mean(), cb = b.p * b.m.mean();
            double r = ca > 0.0 ? cb / ca : 1.0;
            res.truncation = r < 1.0 ? cb * r / (1.0 - r) : cb * static_cast<double>(k);
            break;
        }
        Stratum s{k, poisson_pmf(mu, k), {}, 0.0, 0};
        draw(s, cost(strata.back()) > kExpensive ? kShortPilot : kPilot);
        double c = s.p * s.m.mean();
        double prev = strata.back().p * strata.back().m.mean();
        total += c;
        strata.push_back(s);
        if (k >= min_strata && c < tol * total) {
            double r = prev > 0.0 ? c / prev : 0.0;
            res.truncation = r < 1.0 ? c * r / (1.0 - r) : c;
            break;
        }
    }

    if (n > res.evaluations) {
        const double budget = static_cast<double>(n - res.evaluations);
        double wsum = 0.0;
        for (const auto& s : strata) wsum += s.p * std::sqrt(s.m.variance() / cost(s));
        if (wsum > 0.0) {
            for (auto& s : strata) {
                if (s.lines == 0) continue;
                auto extra = static_cast<std::size_t>(std::floor(budget * s.p * std::sqrt(s.m.variance() / cost(s)) / wsum));
                if (extra > 0) draw(s, extra);
            }
        }
    }

    double var = 0.0, tail = 1.0;
    for (const auto& s : strata) {
        tail -= s.p;
        if (s.overflow) res.overflow += s.p * static_cast<double>(s.overflow) / static_cast<double>(s.overflow + s.m.n);
        res.estimate += s.p * s.m.mean();
        if (s.m.n > 1) var += s.p * s.p * s.m.variance() / static_cast<double>(s.m.n);
    }
    res.se = std::sqrt(var);
    res.overflow += std::max(0.0, tail);
    return res;
}

EstimateReport phi_palm(const MarkerConfig& mc, const ActivityMeasure& act, std::size_t n, std::uint64_t seed,
                        const PhiOptions& opt) {
    EstimateReport rep;
    rep.method = "palm";
    rep.seed = seed;
    const ConvexDomain dom = marker_hull(mc, opt.margin);
    const auto cover = marker_cover(mc);
    const std::size_t fixed = mc.distinct_lines().size();
    if (fixed >= opt.line_cap) throw std::invalid_argument("more marker lines than the line cap");
    const double Z = std::exp(act.intersection_measure(dom));
    auto r = stratified_poisson(act, dom, opt.line_cap - fixed, n, seed, "palm", opt.stratum_tol, opt.threads,
                                [&](std::vector<Line>& ls, std::size_t& work) {
                                    ls.insert(ls.begin(), mc.distinct_lines().begin(), mc.distinct_lines().end());
                                    return marked_partition_sum(ls, cover, dom, act, opt.line_cap, &work);
                                });
    rep.estimate = r.estimate / Z;
    rep.se = r.se / Z;
    rep.truncation = r.truncation / Z;
    rep.n = r.evaluations;
    rep.failures = r.failures;
    return rep;
}

struct WindowTarget {
    Line line;
    std::vector<Point> points;  // points[0] anchors the window
};

struct Placement {
    double theta = 0.0;
    Point pivot;
    Point shift;

    Point apply(Point p) const {
        Point d = p - pivot;
        double c = std::cos(theta), s = std::sin(theta);
        return Point{c * d.x - s * d.y, s * d.x + c * d.y} + pivot + shift;
    }
};

bool window_hit(const FieldSample& s, const WindowTarget& w, double eps_x, double eps_phi) {
    for (const auto& e : s.edges) {
        if (angle_gap(e.line.phi, w.line.phi) > eps_phi) continue;
        if (distance_to_segment(w.points[0], e.seg) > eps_x) continue;
        bool all = true;
        for (std::size_t j = 1; j < w.points.size() && all; ++j) {
            double slack = eps_x + distance(w.points[j], w.points[0]) * std::sin(eps_phi);
            all = distance_to_segment(w.points[j], e.seg) <= slack;
        }
        if (all) return true;
    }
    return false;
}

void check_windows(const std::vector<WindowTarget>& ws, double eps_x, double eps_phi) {
    for (std::size_t i = 0; i < ws.size(); ++i)
        for (std::size_t j = i + 1; j < ws.size(); ++j) {
            if (angle_gap(ws[i].line.phi, ws[j].line.phi) > 2.0 * eps_phi) continue;
            double d = distance(ws[i].points[0], ws[j].points[0]);
            if (std::abs(ws[i].line.offset(ws[j].points[0])) <= 2.0 * eps_x + d * std::sin(2.0 * eps_phi))
                throw std::invalid_argument("marker windows overlap; decrease eps_x or eps_phi");
        }
}

EstimateReport phi_window(const MarkerConfig& mc, const ActivityMeasure& act, const WindowFamily& f, std::size_t n,
                          std::uint64_t seed, const PhiOptions& opt) {
    EstimateReport rep;
    rep.method = "window";
    rep.seed = seed;
    rep.eps_x = opt.eps_x;
    rep.eps_phi = opt.eps_phi;

    std::vector<WindowTarget> targets;
    for (const auto& l : mc.distinct_lines()) targets.push_back({l, {}});
    for (std::size_t j = 0; j < mc.size(); ++j) targets[mc.line_index(j)].points.push_back(mc[j].x);
    check_windows(targets, opt.eps_x, opt.eps_phi);

    double norm = 1.0;
    for (const auto& w : targets) norm *= window_mass(act, w.line, w.points[0], opt.eps_x, opt.eps_phi);

    const bool rotate = act.kind() == ActivityMeasure::Kind::homogeneous;
    const bool translate = act.translation_invariant();
    const std::size_t R = translate ? std::max<std::size_t>(opt.placements, 1) : 1;
    const bool move = translate && opt.placements > 0;
    Point pivot{};
    for (const auto& m : mc.markers()) pivot += m.x;
    pivot = (1.0 / static_cast<double>(mc.size())) * pivot;
    const ConvexDomain& dom = f.base();
    const double inset = opt.eps_x + opt.margin;

    FieldSampler sampler(act, f);
    std::vector<double> vals(n);
    std::vector<int> fails(n, 0);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        FieldSample s = sampler.sample(derive_seed(seed, "field", i));
        fails[i] = s.degenerate_resamples;
        Rng rng(derive_seed(seed, "placement", i));
        std::size_t hits = 0;
        std::vector<WindowTarget> moved = targets;
        for (std::size_t r = 0; r < R; ++r) {
            if (move) {
                Placement g;
                g.pivot = pivot;
                for (int tries = 0;; ++tries) {
                    if (tries >= ActivityMeasure::kMaxRejections)
                        throw SamplingError("no placement keeps the marker windows inside the domain");
                    g.theta = rotate ? rng.uniform(0.0, 2.0 * kPi) : 0.0;
                    g.shift = dom.sample_uniform(rng) - pivot;
                    bool inside = true;
                    for (const auto& m : mc.markers()) inside = inside && dom.boundary_distance(g.apply(m.x)) <= -inset;
                    if (inside) break;
                }
                for (std::size_t t = 0; t < targets.size(); ++t) {
                    for (std::size_t q = 0; q < targets[t].points.size(); ++q)
                        moved[t].points[q] = g.apply(targets[t].points[q]);
                    moved[t].line = Line::through(moved[t].points[0], targets[t].line.phi - g.theta);
                }
            }
            bool all = true;
            for (const auto& w : moved) all = all && window_hit(s, w, opt.eps_x, opt.eps_phi);
            hits += all ? 1 : 0;
        }
        vals[i] = static_cast<double>(hits) / static_cast<double>(R) / norm;
    });
    Moments m;
    for (double v : vals) m.add(v);
    for (int v : fails) rep.failures += static_cast<std::size_t>(v);
    rep.estimate = m.mean();
    rep.se = m.se();
    rep.n = n;
    return rep;
}

}  // namespace

const char* to_string(PhiMethod m) { return m == PhiMethod::palm ? "palm" : "window"; }

double window_mass(const ActivityMeasure& act, const Line& l, Point x, double eps_x, double eps_phi) {
    if (act.is_zero()) return 0.0;
    if (act.kind() == ActivityMeasure::Kind::homogeneous) return act.lambda() * 2.0 * eps_phi * 2.0 * eps_x;
    auto outer = [&](double phi) {
        if (act.translation_invariant()) return 2.0 * eps_x * act.density(Line(phi, 0.0));
        double r0 = dot(x, Point{std::sin(phi), std::cos(phi)});
        return integrate_adaptive([&](double rho) { return act.density(Line(phi, rho)); }, r0 - eps_x, r0 + eps_x,
                                  1e-8);
    };
    return integrate_adaptive(outer, l.phi - eps_phi, l.phi + eps_phi, 1e-8);
}

ConvexDomain marker_hull(const MarkerConfig& mc, double margin) {
    namespace bg = boost::geometry;
    using BPoint = bg::model::d2::point_xy<double>;
    using BPoly = bg::model::polygon<BPoint>;
    if (mc.empty()) throw std::invalid_argument("marker hull of an empty configuration");
    if (!(margin > 0.0)) throw std::invalid_argument("marker hull margin must be positive");
    constexpr int kSides = 24;
    // circumscribed polygon so each marker sits at least `margin` inside
    const double r = margin / std::cos(kPi / kSides);
    bg::model::multi_point<BPoint> pts;
    for (const auto& m : mc.markers())
        for (int i = 0; i < kSides; ++i) {
            double a = 2.0 * kPi * i / kSides;
            bg::append(pts, BPoint(m.x.x + r * std::cos(a), m.x.y + r * std::sin(a)));
        }
    BPoly hull;
    bg::convex_hull(pts, hull);
    // boost emits a closed clockwise ring
    std::vector<Point> v;
    for (const auto& p : hull.outer()) v.push_back({p.x(), p.y()});
    if (v.size() > 1 && distance(v.front(), v.back()) == 0.0) v.pop_back();
    std::reverse(v.begin(), v.end());
    // drop nearly colinear vertices so the polygon is strictly convex
    std::vector<Point> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point a = v[(i + v.size() - 1) % v.size()], b = v[i], c = v[(i + 1) % v.size()];
        if (cross(b - a, c - b) > 1e-12) out.push_back(b);
    }
    return ConvexDomain::polygon(out);
}

EstimateReport estimate_phi(const MarkerConfig& mc, const ActivityMeasure& act, const WindowFamily& f,
                            std::size_t n, std::uint64_t seed, const PhiOptions& opt) {
    check_markers(mc);
    auto t0 = Clock::now();
    EstimateReport rep;
    if (mc.empty()) {
        rep.method = to_string(opt.method);
        rep.estimate = 1.0;
        rep.n = n;
        rep.seed = seed;
    } else if (opt.method == PhiMethod::palm) {
        for (const auto& m : mc.markers())
            if (!f.base().contains(m.x)) throw std::invalid_argument("marker outside the domain");
        rep = phi_palm(mc, act, n, seed, opt);
        rep.eps_x = opt.eps_x;
        rep.eps_phi = opt.eps_phi;
    } else {
        if (n < 2) throw std::invalid_argument("window estimate needs at least two replicas");
        rep = phi_window(mc, act, f, n, seed, opt);
    }
    rep.seconds = seconds_since(t0);
    return rep;
}

EstimateReport estimate_crop_expectation(const MarkerConfig& mc, const ActivityMeasure& act, const WindowFamily& f,
                                         StopRule rule, std::size_t n, std::uint64_t seed, unsigned threads) {
    auto t0 = Clock::now();
    EstimateReport rep;
    rep.method = std::string("crop-") + to_string(rule);
    rep.seed = seed;
    std::vector<double> vals(n);
    std::vector<char> overflow(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        try {
            PolygonalWeb w = sample_web(act, f, mc, rule, derive_seed(seed, "web", i));
            vals[i] = static_cast<double>(crop_graph_sum(w));
        } catch (const SamplingError&) {
            overflow[i] = 1;  // web too large to record
        } catch (const CropCapError&) {
            overflow[i] = 1;
        }
    });
    Moments m;
    for (std::size_t i = 0; i < n; ++i) {
        if (overflow[i]) {
            ++rep.overflow;
        } else {
            m.add(vals[i]);
        }
    }
    rep.estimate = m.mean();
    rep.se = m.se();
    rep.n = m.n;
    rep.seconds = seconds_since(t0);
    return rep;
}

DualityReport verify_duality(const MarkerConfig& mc, const ActivityMeasure& act, const WindowFamily& f,
                             StopRule rule, std::size_t n_field, std::size_t n_web, std::uint64_t seed,
                             const PhiOptions& opt, double max_se) {
    DualityReport d;
    d.phi = estimate_phi(mc, act, f, n_field, derive_seed(seed, "phi", 0), opt);
    d.crop = estimate_crop_expectation(mc, act, f, rule, n_web, derive_seed(seed, "crop", 0), opt.threads);
    if (opt.method == PhiMethod::window && !mc.empty()) {
        PhiOptions half = opt;
        half.eps_x *= 0.5;
        half.eps_phi *= 0.5;
        d.phi_half = estimate_phi(mc, act, f, n_field, derive_seed(seed, "phi", 1), half);
        d.eps_slope = (d.phi.estimate - d.phi_half->estimate) / (opt.eps_x - half.eps_x);
    }
    d.difference = d.phi.estimate - d.crop.estimate;
    d.combined_se = std::hypot(d.phi.se, d.crop.se);
    d.pass = std::abs(d.difference) <= 3.0 * d.combined_se + 1e-12 && d.combined_se <= max_se;
    return d;
}

PartitionReport verify_partition(const ActivityMeasure& act, const ConvexDomain& dom, std::size_t n,
                                 std::uint64_t seed, std::size_t cap, unsigned threads, double tol) {
    auto t0 = Clock::now();
    PartitionReport rep;
    rep.sum.method = "partition";
    rep.sum.seed = seed;
    const double logZ = act.intersection_measure(dom);
    rep.target = std::exp(logZ);
    auto r = stratified_poisson(act, dom, cap, n, seed, "partition", tol, threads, [&](std::vector<Line>& ls, std::size_t& work) {
        return exact_partition_sum(ls, dom, act, cap, &work);
    });
    rep.sum.estimate = r.estimate;
    rep.sum.se = r.se;
    rep.sum.n = r.evaluations;
    rep.sum.failures = r.failures;
    rep.sum.truncation = r.truncation;
    rep.overflow_fraction = r.overflow;
    rep.difference = rep.sum.estimate - rep.target;
    rep.reliable = rep.overflow_fraction <= 0.01;
    rep.pass = rep.reliable && std::abs(rep.difference) <= 3.0 * rep.sum.se + 1e-12;
    rep.sum.seconds = seconds_since(t0);
    return rep;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS test on an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lam = (ne + 0.12 + 0.11 / ne) * d;
    // Kolmogorov tail series
    double p = 0.0;
    if (lam < 0.2) {
        p = 1.0;
    } else {
        for (int k = 1; k <= 200; ++k) {
            double term = 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
            p += term;
            if (std::abs(term) < 1e-12) break;
        }
        p = std::clamp(p, 0.0, 1.0);
    }
    return {d, p};
}

}  // namespace pmf
