// Shared builders for unit and acceptance tests: an in-memory random dataset
// generator (independent of the synthetic city), a cleaned city wrapper, and
// the cleaning fixture with one violation per rule.
#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "actrec/domain.hpp"
#include "actrec/ingest.hpp"
#include "actrec/quantize.hpp"
#include "actrec/synth.hpp"

namespace fixtures {

using namespace actrec;

inline Projection test_projection() { return Projection(103.8198, 1.3521); }

inline StopPoint make_stop(const std::string& user, double x, double y, std::int64_t t_start,
                           std::int64_t t_end, std::optional<ActivityLabel> label,
                           const Projection& projection) {
    StopPoint stop;
    stop.user_id = user;
    stop.x = x;
    stop.y = y;
    projection.to_lonlat(x, y, stop.lon, stop.lat);
    stop.t_start = t_start;
    stop.t_end = t_end;
    stop.label = label;
    return stop;
}

// Unstructured random dataset for oracle comparisons: arbitrary positions,
// labels, and time windows, including unlabelled stops and unmapped POIs.
struct RandomDataset {
    StudyCalendar calendar;
    std::vector<ActivityDay> days;
    std::vector<PoiRecord> pois;
    std::map<std::string, UserProfile> profiles;
};

inline RandomDataset make_random_dataset(std::uint64_t seed, int num_users = 5,
                                         int num_days = 5, int max_stops_per_day = 6,
                                         int num_pois = 30) {
    std::mt19937_64 rng(seed);
    const Projection projection = test_projection();
    RandomDataset data;
    data.calendar = StudyCalendar("2013-03-11", num_days);

    std::uniform_real_distribution<double> coord(-2000.0, 2000.0);
    std::uniform_int_distribution<int> label_pick(0, kNumLabels - 1);
    std::uniform_int_distribution<int> percent(0, 99);

    for (int u = 0; u < num_users; ++u) {
        const std::string user = "user" + std::to_string(u);
        UserProfile profile;
        profile.user_id = user;
        profile.gender = (percent(rng) < 50) ? Gender::Female : Gender::Male;
        profile.age = 18 + percent(rng) % 60;
        profile.home_x = coord(rng);
        profile.home_y = coord(rng);
        projection.to_lonlat(profile.home_x, profile.home_y, profile.home_lon, profile.home_lat);
        if (percent(rng) < 60) {
            profile.work_x = coord(rng);
            profile.work_y = coord(rng);
            double lon = 0.0, lat = 0.0;
            projection.to_lonlat(*profile.work_x, *profile.work_y, lon, lat);
            profile.work_lon = lon;
            profile.work_lat = lat;
        }
        data.profiles[user] = profile;

        for (int d = 0; d < num_days; ++d) {
            const int n = 1 + percent(rng) % max_stops_per_day;
            ActivityDay day;
            day.user_id = user;
            day.day_index = d;
            const std::int64_t base = data.calendar.start_epoch_seconds() + d * 86400;
            std::int64_t t = base + percent(rng) % 120 * 60;
            for (int s = 0; s < n && t < base + 85000; ++s) {
                const std::int64_t duration = 600 + percent(rng) % 180 * 60;
                const std::int64_t t_end = std::min<std::int64_t>(t + duration, base + 86399);
                std::optional<ActivityLabel> label;
                if (percent(rng) < 90) label = label_from_index(label_pick(rng));
                day.stops.push_back(
                    make_stop(user, coord(rng), coord(rng), t, t_end, label, projection));
                t = t_end + 300 + percent(rng) % 60 * 60;
            }
            if (!day.stops.empty()) data.days.push_back(day);
        }
    }

    const char* categories[] = {"restaurant", "office", "park", "unknown_cat"};
    const std::optional<ActivityLabel> mapped[] = {
        ActivityLabel::MealEatingBreak, ActivityLabel::Work, ActivityLabel::Recreation,
        std::nullopt};
    for (int i = 0; i < num_pois; ++i) {
        PoiRecord poi;
        poi.x = coord(rng);
        poi.y = coord(rng);
        projection.to_lonlat(poi.x, poi.y, poi.lon, poi.lat);
        const int c = percent(rng) % 4;
        poi.raw_category = categories[c];
        poi.mapped_label = mapped[c];
        data.pois.push_back(poi);
    }
    return data;
}

inline std::shared_ptr<const Quantizer> make_grid_quantizer(double cell = 400.0) {
    GridQuantizer g;
    g.origin_x = 0.0;
    g.origin_y = 0.0;
    g.cell_width = cell;
    g.cell_height = cell;
    return std::make_shared<const Quantizer>(Quantizer::grid(g));
}

inline std::shared_ptr<const Quantizer> make_voronoi_quantizer(const RandomDataset& data, int k,
                                                               std::uint64_t seed) {
    std::vector<PlanePoint> pts;
    for (const ActivityDay& day : data.days) {
        for (const StopPoint& stop : day.stops) pts.push_back({stop.x, stop.y});
    }
    return std::make_shared<const Quantizer>(Quantizer::voronoi(fit_voronoi(pts, k, seed)));
}

inline std::shared_ptr<const Quantizer> make_circular_quantizer(double radius = 300.0) {
    return std::make_shared<const Quantizer>(Quantizer::circular(CircularQuantizer{radius}));
}

// Synthetic city, cleaned, with profiles keyed by user.
struct City {
    SynthResult synth;
    Projection projection;
    std::map<std::string, UserProfile> profiles;
    std::vector<ActivityDay> days;
    CleaningReport cleaning;
};

inline CleaningParams test_cleaning_params(double bound = 60000.0) {
    CleaningParams params;
    params.study_bounds = {-bound, -bound, bound, bound};
    return params;
}

inline City make_city(int num_users, int num_days, std::uint64_t seed) {
    City city;
    city.projection = test_projection();
    SynthConfig config;
    config.num_users = num_users;
    config.num_days = num_days;
    config.seed = seed;
    city.synth = generate_city(config, city.projection);
    for (const UserProfile& p : city.synth.profiles) city.profiles[p.user_id] = p;
    CleanResult cleaned = clean(group_into_days(city.synth.stops, city.synth.calendar),
                                city.profiles, test_cleaning_params());
    city.days = std::move(cleaned.days);
    city.cleaning = cleaned.report;
    return city;
}

// One user-day per cleaning rule. Day layout (hours are offsets into the day):
//   u1/day0  valid                                  3 points kept
//   u2/day1  first stop labelled Work               day discarded (home bounding)
//   u3/day2  first home stop 80 m from home         day discarded (home too far)
//   u4/day3  shopping stop 5 m from home            day discarded (activity near home)
//   u5/day4  middle stop with swapped times         point discarded, day survives
//   u6/day5  middle stop lasting 25 h               point discarded, day survives
//   u7/day6  middle stop outside the study bounds   point discarded, day survives
//   u8/day7  user without a profile                 day discarded (no profile)
struct CleaningFixture {
    StudyCalendar calendar;
    std::vector<StopPoint> stops;
    std::map<std::string, UserProfile> profiles;
    CleaningParams params;
    CleaningReport expected;
};

inline CleaningFixture make_cleaning_fixture() {
    CleaningFixture fx;
    fx.calendar = StudyCalendar("2013-03-11", 14);
    fx.params = test_cleaning_params(10000.0);
    const Projection proj = test_projection();

    const auto add_profile = [&](const std::string& user, double hx, double hy) {
        UserProfile p;
        p.user_id = user;
        p.gender = Gender::Female;
        p.age = 30;
        p.home_x = hx;
        p.home_y = hy;
        proj.to_lonlat(hx, hy, p.home_lon, p.home_lat);
        fx.profiles[user] = p;
    };
    const auto at = [&](int day, int hour) {
        return fx.calendar.start_epoch_seconds() + day * 86400 + hour * 3600;
    };
    const auto add = [&](const std::string& user, int day, int h0, int h1, double x, double y,
                         std::optional<ActivityLabel> label) {
        fx.stops.push_back(make_stop(user, x, y, at(day, h0), at(day, h1), label, proj));
    };
    const auto home = ActivityLabel::Home;
    const auto shop = ActivityLabel::Shopping;

    add_profile("u1", 100.0, 100.0);
    add("u1", 0, 0, 7, 100.0, 100.0, home);
    add("u1", 0, 8, 17, 1100.0, 100.0, ActivityLabel::Work);
    add("u1", 0, 18, 23, 100.0, 100.0, home);

    add_profile("u2", 200.0, 200.0);
    add("u2", 1, 0, 7, 1200.0, 200.0, ActivityLabel::Work);
    add("u2", 1, 8, 17, 1300.0, 200.0, shop);
    add("u2", 1, 18, 23, 200.0, 200.0, home);

    add_profile("u3", 300.0, 300.0);
    add("u3", 2, 0, 7, 380.0, 300.0, home);
    add("u3", 2, 8, 17, 1300.0, 300.0, shop);
    add("u3", 2, 18, 23, 300.0, 300.0, home);

    add_profile("u4", 400.0, 400.0);
    add("u4", 3, 0, 7, 400.0, 400.0, home);
    add("u4", 3, 8, 17, 405.0, 400.0, shop);
    add("u4", 3, 18, 23, 400.0, 400.0, home);

    add_profile("u5", 500.0, 500.0);
    add("u5", 4, 0, 7, 500.0, 500.0, home);
    fx.stops.push_back(make_stop("u5", 1500.0, 500.0, at(4, 17), at(4, 8), shop, proj));
    add("u5", 4, 18, 23, 500.0, 500.0, home);

    add_profile("u6", 600.0, 600.0);
    add("u6", 5, 0, 7, 600.0, 600.0, home);
    add("u6", 5, 8, 8 + 25, 1600.0, 600.0, shop);
    add("u6", 5, 18, 23, 600.0, 600.0, home);

    add_profile("u7", 700.0, 700.0);
    add("u7", 6, 0, 7, 700.0, 700.0, home);
    add("u7", 6, 8, 17, 20000.0, 700.0, shop);
    add("u7", 6, 18, 23, 700.0, 700.0, home);

    add("u8", 7, 0, 7, 800.0, 800.0, home);
    add("u8", 7, 18, 23, 800.0, 800.0, home);

    CleaningReport& e = fx.expected;
    e.input_points = 23;
    e.input_days = 8;
    e.input_users = 8;
    e.days_no_profile = 1;
    e.points_no_profile = 2;
    e.days_not_home_bounded = 1;
    e.points_not_home_bounded = 3;
    e.days_home_too_far = 1;
    e.points_home_too_far = 3;
    e.days_activity_near_home = 1;
    e.points_activity_near_home = 3;
    e.points_swapped_time = 1;
    e.points_over_duration = 1;
    e.points_out_of_bounds = 1;
    e.kept_days = 4;
    e.kept_users = 4;
    e.kept_points = 9;
    return fx;
}

}  // namespace fixtures
