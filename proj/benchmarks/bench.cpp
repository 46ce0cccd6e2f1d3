#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "actrec/features.hpp"
#include "actrec/forest.hpp"
#include "actrec/fusion.hpp"
#include "actrec/ingest.hpp"
#include "actrec/quantize.hpp"
#include "actrec/rng.hpp"
#include "actrec/synth.hpp"

namespace {

using namespace actrec;

Dataset random_dataset(int rows, int features, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data(features);
    std::vector<double> x(static_cast<std::size_t>(features));
    for (int r = 0; r < rows; ++r) {
        for (double& v : x) v = rng.next_double();
        data.add(x, static_cast<int>(rng.next_below(kNumLabels)));
    }
    return data;
}

// Shared small city so feature benchmarks run against realistic statistics.
struct CityFixture {
    SynthResult city;
    std::shared_ptr<const Quantizer> quantizer;
    std::unique_ptr<PopulationStats> stats;
    std::vector<ActivityDay> days;
    UserProfile profile;
    StopPoint stop;

    CityFixture() {
        SynthConfig config;
        config.num_users = 20;
        config.num_days = 6;
        config.seed = 99;
        city = generate_city(config, Projection(103.8198, 1.3521));
        days = group_into_days(city.stops, city.calendar);
        GridQuantizer grid;
        grid.cell_width = 400.0;
        grid.cell_height = 400.0;
        quantizer = std::make_shared<const Quantizer>(Quantizer::grid(grid));
        stats = std::make_unique<PopulationStats>(days, city.pois, quantizer, city.calendar,
                                                  FeatureConfig{});
        profile = city.profiles.front();
        for (const StopPoint& s : city.stops) {
            if (s.user_id == profile.user_id) {
                stop = s;
                break;
            }
        }
    }
};

const CityFixture& fixture() {
    static CityFixture f;
    return f;
}

void BM_TreeFit(benchmark::State& state) {
    const Dataset data = random_dataset(static_cast<int>(state.range(0)), kFeatureDim, 1);
    std::vector<int> rows(static_cast<std::size_t>(data.size()));
    for (int i = 0; i < data.size(); ++i) rows[static_cast<std::size_t>(i)] = i;
    for (auto _ : state) {
        Rng rng(7);
        DecisionTree tree;
        tree.fit(data, rows, TreeConfig{}, rng);
        benchmark::DoNotOptimize(tree);
    }
}
BENCHMARK(BM_TreeFit)->Arg(200)->Arg(1000);

void BM_ForestFit(benchmark::State& state) {
    const Dataset data = random_dataset(500, kFeatureDim, 2);
    ForestConfig config;
    config.n_trees = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Forest forest;
        forest.fit(data, config, 11);
        benchmark::DoNotOptimize(forest);
    }
}
BENCHMARK(BM_ForestFit)->Arg(10)->Arg(50);

void BM_ForestPredict(benchmark::State& state) {
    const Dataset data = random_dataset(500, kFeatureDim, 3);
    ForestConfig config;
    config.n_trees = 100;
    Forest forest;
    forest.fit(data, config, 13);
    Rng rng(17);
    std::vector<double> x(kFeatureDim);
    for (double& v : x) v = rng.next_double();
    for (auto _ : state) {
        benchmark::DoNotOptimize(forest.predict_scores(x));
    }
}
BENCHMARK(BM_ForestPredict);

void BM_PopulationStatsBuild(benchmark::State& state) {
    const CityFixture& f = fixture();
    for (auto _ : state) {
        PopulationStats stats(f.days, f.city.pois, f.quantizer, f.city.calendar, FeatureConfig{});
        benchmark::DoNotOptimize(stats);
    }
}
BENCHMARK(BM_PopulationStatsBuild);

void BM_AssembleFeatures(benchmark::State& state) {
    const CityFixture& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.stats->assemble(f.stop, f.profile, ActivityLabel::Home));
    }
}
BENCHMARK(BM_AssembleFeatures);

void BM_FitVoronoi(benchmark::State& state) {
    Rng rng(23);
    std::vector<PlanePoint> points(2000);
    for (PlanePoint& p : points) {
        p.x = rng.uniform(-5000.0, 5000.0);
        p.y = rng.uniform(-5000.0, 5000.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_voronoi(points, static_cast<int>(state.range(0)), 5));
    }
}
BENCHMARK(BM_FitVoronoi)->Arg(50)->Arg(200);

void BM_TimeSlots(benchmark::State& state) {
    const StudyCalendar calendar("2013-03-11", 30);
    const std::int64_t start = calendar.start_epoch_seconds() + 8 * 3600;
    const std::int64_t end = start + 9 * 3600;
    for (auto _ : state) {
        benchmark::DoNotOptimize(time_slots(start, end, 10, calendar));
    }
}
BENCHMARK(BM_TimeSlots);

}  // namespace

BENCHMARK_MAIN();
