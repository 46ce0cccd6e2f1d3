#include <doctest/doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "actrec/domain.hpp"
#include "actrec/quantize.hpp"

using namespace actrec;

TEST_CASE("grid cells use floor arithmetic, valid for negative coordinates") {
    GridQuantizer g{0.0, 0.0, 100.0, 100.0};
    CHECK(g.cell(0.0, 0.0) == std::pair<int, int>{0, 0});
    CHECK(g.cell(99.999, 0.0) == std::pair<int, int>{0, 0});
    CHECK(g.cell(100.0, 0.0) == std::pair<int, int>{1, 0});
    CHECK(g.cell(-0.001, 0.0) == std::pair<int, int>{-1, 0});
    CHECK(g.cell(-100.0, -1.0) == std::pair<int, int>{-1, -1});
    CHECK(g.cell(-100.001, 0.0) == std::pair<int, int>{-2, 0});

    GridQuantizer offset{50.0, -50.0, 100.0, 200.0};
    CHECK(offset.cell(50.0, -50.0) == std::pair<int, int>{0, 0});
    CHECK(offset.cell(49.999, -50.0) == std::pair<int, int>{-1, 0});
    CHECK(offset.cell(149.0, 150.0) == std::pair<int, int>{0, 1});
}

TEST_CASE("grid cell ids pack and unpack losslessly") {
    for (int ix : {-100000, -1, 0, 1, 7, 100000}) {
        for (int iy : {-100000, -3, 0, 2, 100000}) {
            const auto [ux, uy] = unpack_grid_cell(pack_grid_cell(ix, iy));
            CHECK(ux == ix);
            CHECK(uy == iy);
        }
    }
    CHECK(pack_grid_cell(1, 2) != pack_grid_cell(2, 1));
}

TEST_CASE("voronoi assignment picks the nearest centroid, lowest index on ties") {
    VoronoiQuantizer v;
    v.centroids = {{0.0, 0.0}, {100.0, 0.0}, {50.0, 80.0}};
    CHECK(v.cell(10.0, 0.0) == 0);
    CHECK(v.cell(90.0, 0.0) == 1);
    CHECK(v.cell(50.0, 75.0) == 2);
    // equidistant between centroids 0 and 1
    CHECK(v.cell(50.0, 0.0) == 0);

    VoronoiQuantizer dup;
    dup.centroids = {{5.0, 5.0}, {5.0, 5.0}};
    CHECK(dup.cell(5.0, 5.0) == 0);
}

TEST_CASE("fit_voronoi is deterministic and validates its inputs") {
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> coord(-1000.0, 1000.0);
    std::vector<PlanePoint> points;
    for (int i = 0; i < 500; ++i) points.push_back({coord(gen), coord(gen)});

    const VoronoiQuantizer a = fit_voronoi(points, 20, 99);
    const VoronoiQuantizer b = fit_voronoi(points, 20, 99);
    REQUIRE(a.centroids.size() == 20);
    REQUIRE(b.centroids.size() == 20);
    for (std::size_t i = 0; i < a.centroids.size(); ++i) {
        CHECK(a.centroids[i].x == b.centroids[i].x);
        CHECK(a.centroids[i].y == b.centroids[i].y);
    }

    const VoronoiQuantizer c = fit_voronoi(points, 20, 100);
    bool any_different = false;
    for (std::size_t i = 0; i < a.centroids.size(); ++i) {
        if (a.centroids[i].x != c.centroids[i].x) any_different = true;
    }
    CHECK(any_different);

    CHECK_THROWS_AS(fit_voronoi({}, 3, 1), DataError);
    CHECK_THROWS_AS(fit_voronoi(points, 0, 1), DataError);
    std::vector<PlanePoint> two = {{0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(fit_voronoi(two, 3, 1), DataError);
    CHECK(fit_voronoi(two, 2, 1).centroids.size() == 2);
}

TEST_CASE("fit_voronoi centroids describe the data") {
    // three tight clusters, k = 3: every centroid must sit inside one cluster
    std::vector<PlanePoint> points;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> jitter(-10.0, 10.0);
    const PlanePoint centers[] = {{0.0, 0.0}, {1000.0, 0.0}, {0.0, 1000.0}};
    for (const PlanePoint& c : centers) {
        for (int i = 0; i < 50; ++i) points.push_back({c.x + jitter(gen), c.y + jitter(gen)});
    }
    const VoronoiQuantizer v = fit_voronoi(points, 3, 1);
    std::set<int> matched;
    for (const PlanePoint& centroid : v.centroids) {
        for (int c = 0; c < 3; ++c) {
            if (euclidean_distance(centroid.x, centroid.y, centers[c].x, centers[c].y) < 20.0) {
                matched.insert(c);
            }
        }
    }
    CHECK(matched.size() == 3);
}

TEST_CASE("radius index agrees with a naive scan") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> coord(-5000.0, 5000.0);
    std::vector<PlanePoint> points;
    for (int i = 0; i < 400; ++i) points.push_back({coord(gen), coord(gen)});

    const double radius = 300.0;
    RadiusIndex index(points, radius);
    CHECK(index.radius() == radius);

    for (int q = 0; q < 200; ++q) {
        const double qx = coord(gen), qy = coord(gen);
        std::vector<int> naive;
        for (int i = 0; i < static_cast<int>(points.size()); ++i) {
            if (euclidean_distance(qx, qy, points[i].x, points[i].y) <= radius) {
                naive.push_back(i);
            }
        }
        CHECK(index.query(qx, qy) == naive);
    }
    // query centred on a stored point always finds it
    const std::vector<int> members = index.query(points[0].x, points[0].y);
    CHECK(std::count(members.begin(), members.end(), 0) == 1);
}

TEST_CASE("circular_neighborhood uses a closed ball") {
    CircularQuantizer c{100.0};
    std::vector<PlanePoint> population = {{0.0, 0.0}, {100.0, 0.0}, {100.001, 0.0}, {0.0, -100.0}};
    const auto hits = circular_neighborhood(c, 0.0, 0.0, population);
    CHECK(hits == std::vector<int>{0, 1, 3});
}

TEST_CASE("quantizer handle dispatches by kind") {
    const Quantizer grid = Quantizer::grid({0.0, 0.0, 100.0, 100.0});
    CHECK(grid.kind() == QuantizerKind::Grid);
    CHECK(grid.is_fixed());
    CHECK(grid.cell_of(250.0, -50.0) == pack_grid_cell(2, -1));

    VoronoiQuantizer v;
    v.centroids = {{0.0, 0.0}, {100.0, 0.0}};
    const Quantizer voronoi = Quantizer::voronoi(v);
    CHECK(voronoi.is_fixed());
    CHECK(voronoi.cell_of(90.0, 0.0) == 1);

    const Quantizer circular = Quantizer::circular({250.0});
    CHECK_FALSE(circular.is_fixed());
    CHECK(circular.circular_params().radius == 250.0);
    CHECK_THROWS_AS(circular.cell_of(0.0, 0.0), InternalError);
}

TEST_CASE("quantizer kind names round-trip") {
    for (QuantizerKind k : {QuantizerKind::Grid, QuantizerKind::Voronoi, QuantizerKind::Circular}) {
        CHECK(quantizer_kind_from_name(quantizer_kind_name(k)) == k);
    }
    CHECK_FALSE(quantizer_kind_from_name("hexagonal").has_value());
}

TEST_CASE("time_slots worked example: 8:53 to 9:08 in 10 minute slots") {
    StudyCalendar calendar("2013-03-11", 7);
    const std::int64_t base = calendar.start_epoch_seconds();
    const auto slots =
        time_slots(base + 8 * 3600 + 53 * 60, base + 9 * 3600 + 8 * 60, 10, calendar);
    REQUIRE(slots.size() == 3);
    // 8:50, 9:00, 9:10
    CHECK(slots[0] == TimeSlot{0, 53});
    CHECK(slots[1] == TimeSlot{0, 54});
    CHECK(slots[2] == TimeSlot{0, 55});
}

TEST_CASE("time_slots snaps sub-slot intervals to the nearest boundary") {
    StudyCalendar calendar("2013-03-11", 7);
    const std::int64_t base = calendar.start_epoch_seconds();

    // 8:00 to 8:00:59 stays inside the 8:00 slot
    const auto brief = time_slots(base + 8 * 3600, base + 8 * 3600 + 59, 10, calendar);
    REQUIRE(brief.size() == 1);
    CHECK(brief[0] == TimeSlot{0, 48});

    // ties snap toward the earlier slot on both endpoints:
    // 23:55 day 0 to 0:05 day 1 covers {23:50@0, 0:00@1}
    const auto overnight =
        time_slots(base + 23 * 3600 + 55 * 60, base + 24 * 3600 + 5 * 60, 10, calendar);
    REQUIRE(overnight.size() == 2);
    CHECK(overnight[0] == TimeSlot{0, 143});
    CHECK(overnight[1] == TimeSlot{1, 0});
}

TEST_CASE("time_slots spans day boundaries and validates inputs") {
    StudyCalendar calendar("2013-03-11", 7);
    const std::int64_t base = calendar.start_epoch_seconds();

    // 23:30 to 00:30 next day, hourly slots
    const auto overnight = time_slots(base + 23 * 3600 + 1800, base + 24 * 3600 + 1800, 60, calendar);
    REQUIRE(overnight.size() == 2);
    CHECK(overnight[0] == TimeSlot{0, 23});
    CHECK(overnight[1] == TimeSlot{1, 0});

    // boundary-aligned interval covers exactly its two boundaries
    const auto aligned = time_slots(base + 3600, base + 7200, 60, calendar);
    REQUIRE(aligned.size() == 2);
    CHECK(aligned[0] == TimeSlot{0, 1});
    CHECK(aligned[1] == TimeSlot{0, 2});

    CHECK_THROWS_AS(time_slots(base + 100, base + 100, 60, calendar), DataError);
    CHECK_THROWS_AS(time_slots(base + 200, base + 100, 60, calendar), DataError);
    CHECK_THROWS_AS(time_slots(base, base + 100, 7, calendar), DataError);  // 7 does not divide 1440
}

TEST_CASE("time_slots count matches the nearest-boundary arithmetic") {
    StudyCalendar calendar("2013-03-11", 30);
    const std::int64_t base = calendar.start_epoch_seconds();
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<std::int64_t> offset(0, 29 * 86400);
    std::uniform_int_distribution<std::int64_t> len(1, 86400);
    for (int trial = 0; trial < 500; ++trial) {
        const std::int64_t t0 = base + offset(gen);
        const std::int64_t t1 = std::min(t0 + len(gen), base + 30 * 86400 - 1);
        if (t1 <= t0) continue;
        const int width = 10;
        const auto slots = time_slots(t0, t1, width, calendar);
        const std::int64_t w = width * 60;
        const auto ceil_div = [](std::int64_t a, std::int64_t b) { return (a + b - 1) / b; };
        const std::int64_t first = ceil_div(t0 - base - w / 2, w);
        const std::int64_t last = ceil_div(t1 - base + w / 2, w) - 1;
        CHECK(static_cast<std::int64_t>(slots.size()) == last - first + 1);
        for (std::size_t i = 1; i < slots.size(); ++i) CHECK(slots[i - 1] < slots[i]);
    }
}
