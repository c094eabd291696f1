// Command-line front end: sampling, crop evaluation, estimation and
// verification runs driven by a configuration file.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pmf/arrangement.hpp"
#include "pmf/config.hpp"
#include "pmf/crop_engine.hpp"
#include "pmf/edge_marker_process.hpp"
#include "pmf/estimators.hpp"
#include "pmf/field_sampler.hpp"
#include "pmf/random.hpp"
#include "pmf/serialize.hpp"
#include "pmf/svg.hpp"
#include "pmf/web_sampler.hpp"

#ifndef PMF_VERSION
#define PMF_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace pmf;

namespace {

const std::vector<std::pair<std::string, std::string>> kSubcommands = {
    {"sample-field", "draw fields in the window"},
    {"sample-web", "draw webs for the markers"},
    {"crop", "crop sums of a stored web"},
    {"count-marked", "marked configurations on the marker lines"},
    {"estimate-phi", "marker correlation of the field"},
    {"estimate-crop", "expected crop over webs"},
    {"verify-duality", "compare the correlation with the expected crop"},
    {"verify-partition", "partition sum against its closed form"},
    {"render", "svg of a stored web or field"},
};

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    std::string out = "out";
    std::optional<std::string> stop_rule;
    std::optional<double> eps_x;
    std::optional<double> eps_phi;
    std::string input;
    unsigned threads = 1;
};

struct Row {
    std::string subcommand;
    double estimate = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    std::string pass;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class Run {
public:
    Run(std::string sub, RunConfig cfg, Flags flags) : sub_(std::move(sub)), cfg_(std::move(cfg)), flags_(std::move(flags)) {
        cfg_.phi.threads = flags_.threads;
        fs::create_directories(flags_.out);
    }

    int execute() {
        write_manifest();
        if (sub_ == "sample-field") return sample_field();
        if (sub_ == "sample-web") return sample_web_cmd();
        if (sub_ == "crop") return crop();
        if (sub_ == "count-marked") return count();
        if (sub_ == "estimate-phi") return phi();
        if (sub_ == "estimate-crop") return crop_mean();
        if (sub_ == "verify-duality") return duality();
        if (sub_ == "verify-partition") return partition();
        if (sub_ == "render") return render();
        throw std::invalid_argument("unknown subcommand " + sub_);
    }

private:
    fs::path path(const std::string& name) const { return fs::path(flags_.out) / name; }

    void write_manifest() const {
        std::ofstream m(path("manifest.txt"));
        m << "pmf manifest\n";
        m << "version = " << PMF_VERSION << '\n';
        m << "subcommand = " << sub_ << '\n';
        m << "config_hash = " << cfg_.hash() << '\n';
        m << "seed = " << cfg_.seed << '\n';
        if (!flags_.input.empty()) m << "input = " << flags_.input << '\n';
        if (sub_ == "sample-field" || sub_ == "sample-web") m << "samples = " << sample_count() << '\n';
        m << "--- config\n" << cfg_.canonical();
    }

    void report(const std::vector<Row>& rows) const {
        std::ofstream csv(path("report.csv"));
        csv << "subcommand,k,lambda,estimate,se,n,eps_x,eps_phi,pass,seed,config_hash\n";
        for (const auto& r : rows) {
            csv << r.subcommand << ',' << cfg_.markers.size() << ',' << num(cfg_.activity.lambda()) << ','
                << num(r.estimate) << ',' << num(r.se) << ',' << r.n << ',' << num(cfg_.phi.eps_x) << ','
                << num(cfg_.phi.eps_phi) << ',' << r.pass << ',' << cfg_.seed << ',' << cfg_.hash() << '\n';
            std::cout << r.subcommand << ": estimate " << num(r.estimate) << " se " << num(r.se) << " n " << r.n
                      << (r.pass.empty() ? "" : (r.pass == "1" ? " PASS" : " FAIL")) << '\n';
        }
    }

    static std::string index_name(std::size_t i, const char* ext) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "sample_%04zu%s", i, ext);
        return buf;
    }

    std::size_t sample_count() const { return flags_.replicas.value_or(1); }

    int sample_field() {
        FieldSampler sampler(cfg_.activity, cfg_.family());
        double sum = 0.0, sq = 0.0;
        const std::size_t n = sample_count();
        for (std::size_t i = 0; i < n; ++i) {
            FieldSample s = sampler.sample(derive_seed(cfg_.seed, "field", i));
            std::ofstream out(path(index_name(i, ".field.txt")));
            write_field(out, s);
            double e = static_cast<double>(s.edges.size());
            sum += e;
            sq += e * e;
        }
        report({stats_row("sample-field", sum, sq, n)});
        return 0;
    }

    int sample_web_cmd() {
        double sum = 0.0, sq = 0.0;
        const std::size_t n = sample_count();
        for (std::size_t i = 0; i < n; ++i) {
            PolygonalWeb w = sample_web(cfg_.activity, cfg_.family(), cfg_.markers, cfg_.stop_rule,
                                        derive_seed(cfg_.seed, "web", i));
            std::ofstream out(path(index_name(i, ".web.txt")));
            write_web(out, w);
            double m = static_cast<double>(w.terminal_count());
            sum += m;
            sq += m * m;
        }
        report({stats_row("sample-web", sum, sq, n)});
        return 0;
    }

    static Row stats_row(const std::string& name, double sum, double sq, std::size_t n) {
        Row r{name};
        r.n = n;
        r.estimate = sum / static_cast<double>(n);
        if (n > 1) {
            double var = std::max(0.0, (sq - n * r.estimate * r.estimate) / static_cast<double>(n - 1));
            r.se = std::sqrt(var / static_cast<double>(n));
        }
        return r;
    }

    PolygonalWeb load_web() const {
        std::ifstream in(flags_.input);
        if (!in) throw std::runtime_error(flags_.input + ": cannot open");
        try {
            return read_web(in);
        } catch (const FormatError& e) {
            throw std::runtime_error(flags_.input + ": " + e.what());
        }
    }

    int crop() {
        if (flags_.input.empty()) throw std::invalid_argument("crop needs --input WEB_FILE");
        PolygonalWeb w = load_web();
        std::int64_t subset = crop_subset_sum(w);
        std::int64_t graph = crop_graph_sum(w);
        std::int64_t em = signed_marker_terminal(cfg_.activity, w.family, w.markers, w.stop_rule, w.seed, &w);
        std::cout << "subset_sum " << subset << "\ngraph_sum " << graph << "\nmarker_process " << em << '\n';
        Row r{"crop"};
        r.estimate = static_cast<double>(graph);
        r.n = 1;
        r.pass = subset == graph && graph == em ? "1" : "0";
        report({r});
        return r.pass == "1" ? 0 : 1;
    }

    int count() {
        Row r{"count-marked"};
        r.estimate = static_cast<double>(count_marked(cfg_.markers, cfg_.domain));
        r.n = 1;
        report({r});
        return 0;
    }

    static Row from(const std::string& name, const EstimateReport& e) {
        Row r{name};
        r.estimate = e.estimate;
        r.se = e.se;
        r.n = e.n;
        return r;
    }

    int phi() {
        auto e = estimate_phi(cfg_.markers, cfg_.activity, cfg_.family(), cfg_.replicas, cfg_.seed, cfg_.phi);
        report({from("estimate-phi", e)});
        return 0;
    }

    int crop_mean() {
        auto e = estimate_crop_expectation(cfg_.markers, cfg_.activity, cfg_.family(), cfg_.stop_rule,
                                           cfg_.web_replicas, cfg_.seed, flags_.threads);
        report({from("estimate-crop", e)});
        return 0;
    }

    int duality() {
        auto d = verify_duality(cfg_.markers, cfg_.activity, cfg_.family(), cfg_.stop_rule, cfg_.replicas,
                                cfg_.web_replicas, cfg_.seed, cfg_.phi);
        std::vector<Row> rows{from("verify-duality/phi", d.phi), from("verify-duality/crop", d.crop)};
        if (d.phi_half) rows.push_back(from("verify-duality/phi-half", *d.phi_half));
        Row r{"verify-duality"};
        r.estimate = d.difference;
        r.se = d.combined_se;
        r.n = d.phi.n + d.crop.n;
        r.pass = d.pass ? "1" : "0";
        rows.push_back(r);
        if (d.eps_slope) std::cout << "eps slope " << num(*d.eps_slope) << '\n';
        report(rows);
        return 0;
    }

    int partition() {
        auto p = verify_partition(cfg_.activity, cfg_.domain, cfg_.replicas, cfg_.seed, kStratumLineCap,
                                  flags_.threads);
        Row r = from("verify-partition", p.sum);
        r.pass = p.pass ? "1" : "0";
        std::cout << "target " << num(p.target) << " overflow fraction " << num(p.overflow_fraction)
                  << (p.reliable ? "" : " (unreliable)") << '\n';
        report({r});
        return 0;
    }

    int render() {
        if (flags_.input.empty()) throw std::invalid_argument("render needs --input FILE");
        std::ifstream in(flags_.input);
        if (!in) throw std::runtime_error(flags_.input + ": cannot open");
        std::string head;
        std::getline(in, head);
        in.seekg(0);
        std::string stem = fs::path(flags_.input).filename().string();
        stem = stem.substr(0, stem.find('.'));
        std::ofstream svg(path(stem + ".svg"));
        Row r{"render"};
        r.n = 1;
        if (head.rfind("pmf-field", 0) == 0) {
            FieldSample s = read_field(in);
            render_field(svg, s);
            r.estimate = static_cast<double>(s.edges.size());
        } else {
            PolygonalWeb w = read_web(in);
            std::vector<CropGraph> crops;
            // overlay every contributing crop graph while the subsets stay few
            const std::size_t m = w.terminal_count();
            if (m <= 12) {
                for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
                    std::vector<int> Y;
                    for (std::size_t j = 0; j < m; ++j)
                        if (mask >> j & 1u) Y.push_back(static_cast<int>(j));
                    if (crop_indicator(w, Y)) crops.push_back(build_crop_graph(w, Y));
                }
            }
            render_web(svg, w, crops);
            r.estimate = static_cast<double>(m);
        }
        report({r});
        return 0;
    }

    std::string sub_;
    RunConfig cfg_;
    Flags flags_;
};

RunConfig configure(const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) cfg = load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.replicas) {
        cfg.replicas = *f.replicas;
        cfg.web_replicas = *f.replicas;
    }
    if (f.stop_rule) cfg.stop_rule = *f.stop_rule == "immediate" ? StopRule::immediate : StopRule::tangency;
    if (f.eps_x) cfg.phi.eps_x = *f.eps_x;
    if (f.eps_phi) cfg.phi.eps_phi = *f.eps_phi;
    return cfg;
}

// Re-runs a manifest: the embedded configuration already carries every
// override, so only the subcommand, input and sample count are read from the header.
int replay(const std::string& manifest, Flags flags) {
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error(manifest + ": cannot open");
    std::string line, sub;
    std::map<std::string, std::string> head;
    while (std::getline(in, line) && line != "--- config") {
        auto eq = line.find(" = ");
        if (eq != std::string::npos) head[line.substr(0, eq)] = line.substr(eq + 3);
    }
    std::stringstream rest;
    rest << in.rdbuf();
    RunConfig cfg = parse_config(rest, manifest);
    if (!head.count("subcommand")) throw std::runtime_error(manifest + ": no subcommand");
    if (head.count("input")) flags.input = head["input"];
    if (head.count("samples")) flags.replicas = std::stoul(head["samples"]);
    return Run(head["subcommand"], cfg, flags).execute();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consistent polygonal Markov fields and their dual webs"};
    app.require_subcommand(1);
    Flags flags;
    std::string manifest;
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : kSubcommands) subs.push_back(app.add_subcommand(name, help));
    auto* rep = app.add_subcommand("replay", "re-run a manifest");
    rep->add_option("manifest", manifest, "manifest.txt of an earlier run")->required()->check(CLI::ExistingFile);
    subs.push_back(rep);
    for (auto* s : subs) {
        s->add_option("--config", flags.config, "run configuration file")->check(CLI::ExistingFile);
        s->add_option("--seed", flags.seed, "master seed");
        s->add_option("--replicas", flags.replicas, "replica count");
        s->add_option("--out", flags.out, "output directory")->capture_default_str();
        s->add_option("--stop-rule", flags.stop_rule, "separation rule")
            ->check(CLI::IsMember({"tangency", "immediate"}));
        s->add_option("--eps-x", flags.eps_x, "marker window half-width")->check(CLI::PositiveNumber);
        s->add_option("--eps-phi", flags.eps_phi, "marker window half-angle")->check(CLI::PositiveNumber);
        s->add_option("--input", flags.input, "stored web or field (crop, render)");
        s->add_option("--threads", flags.threads, "worker threads")->capture_default_str();
    }
    CLI11_PARSE(app, argc, argv);
    try {
        auto* chosen = app.get_subcommands().front();
        if (chosen == rep) return replay(manifest, flags);
        return Run(chosen->get_name(), configure(flags), flags).execute();
    } catch (const std::exception& e) {
        std::cerr << "pmf: " << e.what() << '\n';
        return 2;
    }
}
