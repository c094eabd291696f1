#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "pmf/arrangement.hpp"
#include "pmf/crop_engine.hpp"
#include "pmf/field_sampler.hpp"
#include "pmf/web_sampler.hpp"

using namespace pmf;

namespace {

WindowFamily unit_disc() { return WindowFamily::homothety(ConvexDomain::disc({0, 0}, 1.0), {0, 0}); }

MarkerConfig three_markers() {
    Point a{-0.15, -0.1}, b{0.15, -0.1}, c{0.0, 0.16};
    return MarkerConfig({{Line::through(a, 0.3), a}, {Line::through(b, 2.0), b}, {Line::through(c, 1.2), c}});
}

void BM_SampleField(benchmark::State& state) {
    FieldSampler fs(ActivityMeasure::homogeneous(static_cast<double>(state.range(0))), unit_disc());
    std::uint64_t seed = 0;
    std::size_t edges = 0;
    for (auto _ : state) {
        auto s = fs.sample(seed++);
        edges += s.edges.size();
        benchmark::DoNotOptimize(s);
    }
    state.counters["edges"] = benchmark::Counter(static_cast<double>(edges), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_SampleField)->Arg(1)->Arg(4)->Arg(16);

void BM_SampleWeb(benchmark::State& state) {
    auto act = ActivityMeasure::homogeneous(static_cast<double>(state.range(0)));
    auto f = unit_disc();
    auto mc = three_markers();
    std::uint64_t seed = 0;
    for (auto _ : state) {
        try {
            benchmark::DoNotOptimize(sample_web(act, f, mc, StopRule::tangency, seed++));
        } catch (const SamplingError&) {
        }
    }
}
BENCHMARK(BM_SampleWeb)->Arg(1)->Arg(2);

void BM_CropGraphSum(benchmark::State& state) {
    auto act = ActivityMeasure::homogeneous(1.0);
    auto f = unit_disc();
    auto mc = three_markers();
    std::vector<PolygonalWeb> webs;
    for (std::uint64_t s = 0; webs.size() < 64; ++s) {
        try {
            webs.push_back(sample_web(act, f, mc, StopRule::tangency, s));
        } catch (const SamplingError&) {
        }
    }
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(crop_graph_sum(webs[i++ % webs.size()]));
}
BENCHMARK(BM_CropGraphSum);

void BM_EnumerateAdmissible(benchmark::State& state) {
    Rng rng(3);
    std::vector<Line> lines;
    for (int i = 0; i < state.range(0); ++i) lines.emplace_back(rng.uniform(0, kPi), rng.uniform(-0.4, 0.4));
    auto dom = ConvexDomain::disc({0, 0}, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_admissible(lines, dom));
}
BENCHMARK(BM_EnumerateAdmissible)->DenseRange(2, 4);

}  // namespace

BENCHMARK_MAIN();
