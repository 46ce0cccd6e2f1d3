#include "actrec/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "actrec/errors.hpp"
#include "actrec/rng.hpp"

namespace actrec {

namespace {

enum class VenueType : int {
    Home = 0,
    WorkSite,
    School,
    TransitHub,
    Mall,
    Park,
    Clinic,
    FriendHome,
    FoodCourt,
};

constexpr int kNumVenueTypes = 9;

const char* venue_type_name(VenueType v) {
    switch (v) {
        case VenueType::Home: return "home";
        case VenueType::WorkSite: return "work_site";
        case VenueType::School: return "school";
        case VenueType::TransitHub: return "transit_hub";
        case VenueType::Mall: return "mall";
        case VenueType::Park: return "park";
        case VenueType::Clinic: return "clinic";
        case VenueType::FriendHome: return "friend_home";
        case VenueType::FoodCourt: return "food_court";
    }
    throw InternalError("unknown venue type");
}

// discretionary venue order used by all weight vectors
constexpr int kNumDiscTypes = 5;
constexpr VenueType kDiscVenue[kNumDiscTypes] = {VenueType::Mall, VenueType::Park,
                                                 VenueType::Clinic, VenueType::FriendHome,
                                                 VenueType::FoodCourt};

enum class Role { Student, Employed, NonWorker };

struct SynthUser {
    std::string id;
    Gender gender = Gender::Female;
    int band = 0;
    int age = 0;
    Role role = Role::NonWorker;
    int active_from = 0;
    int home_venue = -1;
    int work_venue = -1;
    int school_venue = -1;
};

struct Venue {
    VenueType type;
    double x = 0.0;
    double y = 0.0;
};

// P(label | venue type, gender, age band); the only source of labels, so the
// emitted truth tables and the sampler can never disagree.
LabelVector emission_table(VenueType v, Gender g, int band) {
    LabelVector e{};
    auto set = [&](ActivityLabel l, double p) { e[label_index(l)] = p; };
    switch (v) {
        case VenueType::Home:
            set(ActivityLabel::Home, 1.0);
            break;
        case VenueType::WorkSite:
            if (band >= 2) {
                set(ActivityLabel::Work, 0.84);
                set(ActivityLabel::WorkRelatedBusiness, 0.12);
                set(ActivityLabel::MealEatingBreak, 0.04);
            } else {
                set(ActivityLabel::Work, 0.80);
                set(ActivityLabel::WorkRelatedBusiness, 0.14);
                set(ActivityLabel::MealEatingBreak, 0.06);
            }
            break;
        case VenueType::School:
            set(ActivityLabel::Education, 0.88);
            set(ActivityLabel::Social, 0.07);
            set(ActivityLabel::MealEatingBreak, 0.05);
            break;
        case VenueType::TransitHub:
            if (g == Gender::Male) {
                set(ActivityLabel::ChangeModeTransfer, 0.80);
                set(ActivityLabel::PickUpDropOff, 0.20);
            } else {
                set(ActivityLabel::ChangeModeTransfer, 0.68);
                set(ActivityLabel::PickUpDropOff, 0.32);
            }
            break;
        case VenueType::Mall:
            if (g == Gender::Female) {
                set(ActivityLabel::Shopping, 0.58);
                set(ActivityLabel::MealEatingBreak, 0.18);
                set(ActivityLabel::Entertainment, 0.12);
                set(ActivityLabel::PersonalErrand, 0.12);
            } else {
                set(ActivityLabel::Shopping, 0.44);
                set(ActivityLabel::MealEatingBreak, 0.24);
                set(ActivityLabel::Entertainment, 0.20);
                set(ActivityLabel::PersonalErrand, 0.12);
            }
            break;
        case VenueType::Park:
            if (band <= 1) {
                set(ActivityLabel::Recreation, 0.40);
                set(ActivityLabel::SportsExercise, 0.45);
                set(ActivityLabel::Social, 0.15);
            } else {
                set(ActivityLabel::Recreation, 0.55);
                set(ActivityLabel::SportsExercise, 0.27);
                set(ActivityLabel::Social, 0.18);
            }
            break;
        case VenueType::Clinic:
            if (band == 3) {
                set(ActivityLabel::MedicalDental, 0.90);
                set(ActivityLabel::PersonalErrand, 0.10);
            } else {
                set(ActivityLabel::MedicalDental, 0.85);
                set(ActivityLabel::PersonalErrand, 0.15);
            }
            break;
        case VenueType::FriendHome:
            set(ActivityLabel::OthersHome, 0.52);
            set(ActivityLabel::Social, 0.36);
            set(ActivityLabel::AccompanySomeone, 0.12);
            break;
        case VenueType::FoodCourt:
            set(ActivityLabel::MealEatingBreak, 0.72);
            set(ActivityLabel::Social, 0.16);
            set(ActivityLabel::Shopping, 0.12);
            break;
    }
    return e;
}

struct GroupSchedule {
    double p_stay_work = 0.0;
    double p_transit_work = 0.0;
    double p_lunch = 0.0;
    std::array<double, 3> evening_disc{};  // P(0, 1, 2 evening stops)
    double p_stay_leisure = 0.0;
    double p_transit_leisure = 0.0;
    std::array<double, 3> leisure_disc{};  // P(1, 2, 3 outing stops)
    std::array<double, kNumDiscTypes> disc_work{};
    std::array<double, kNumDiscTypes> disc_leisure{};
};

GroupSchedule group_schedule(Gender g, int band) {
    GroupSchedule s;
    s.p_stay_work = 0.06;
    s.p_transit_work = band <= 1 ? 0.70 : 0.55;
    s.p_lunch = band == 0 ? 0.50 : 0.65;
    s.evening_disc = {0.55, 0.35, 0.10};
    s.p_stay_leisure = band == 3 ? 0.22 : 0.12;
    s.p_transit_leisure = 0.40;
    s.leisure_disc = {0.40, 0.42, 0.18};
    switch (band) {  // mall, park, clinic, friend home, food court
        case 0:
            s.disc_work = {0.30, 0.18, 0.04, 0.26, 0.22};
            s.disc_leisure = {0.30, 0.22, 0.04, 0.26, 0.18};
            break;
        case 1:
            s.disc_work = {0.32, 0.16, 0.06, 0.22, 0.24};
            s.disc_leisure = {0.32, 0.20, 0.06, 0.22, 0.20};
            break;
        case 2:
            s.disc_work = {0.30, 0.18, 0.10, 0.20, 0.22};
            s.disc_leisure = {0.30, 0.22, 0.10, 0.20, 0.18};
            break;
        default:
            s.disc_work = {0.24, 0.24, 0.16, 0.20, 0.16};
            s.disc_leisure = {0.24, 0.26, 0.16, 0.20, 0.14};
            break;
    }
    if (g == Gender::Female) {
        s.disc_work[0] += 0.02;
        s.disc_work[1] -= 0.02;
        s.disc_leisure[0] += 0.02;
        s.disc_leisure[1] -= 0.02;
    }
    return s;
}

int uniform_int(Rng& rng, int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
}

constexpr double kSuperCellMetres = 1200.0;
constexpr double kVenueJitterMetres = 250.0;
constexpr double kStopJitterMetres = 40.0;
constexpr double kPoiJitterMetres = 30.0;
constexpr int kDayEndMinute = 1439;  // 23:59, clear of the next-day boundary

struct City {
    std::vector<Venue> venues;
    std::vector<SynthUser> users;
    // pools: [first, last) venue index ranges per shared type
    std::array<std::pair<int, int>, kNumVenueTypes> pools{};
};

int pool_pick(Rng& rng, const City& city, VenueType type) {
    const auto [first, last] = city.pools[static_cast<int>(type)];
    return first + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(last - first)));
}

// A visit before labels and jitter are applied.
struct Visit {
    int venue = -1;
    int start_minute = 0;
    int end_minute = 0;
};

// One user-day. Time ranges are chosen so the worst case ends before 23:59;
// no clamping happens, keeping the emitted visit-count expectations exact.
std::vector<Visit> sample_day_visits(Rng& rng, const City& city, const SynthUser& user,
                                     bool workday) {
    const GroupSchedule sched = group_schedule(user.gender, user.band);
    std::vector<Visit> visits;

    const double p_stay = workday ? sched.p_stay_work : sched.p_stay_leisure;
    if (rng.bernoulli(p_stay)) {
        visits.push_back({user.home_venue, 0, kDayEndMinute});
        return visits;
    }

    const double p_transit = workday ? sched.p_transit_work : sched.p_transit_leisure;
    const int departure = workday ? uniform_int(rng, 390, 510) : uniform_int(rng, 480, 660);
    visits.push_back({user.home_venue, 0, departure});
    int cursor = departure;

    auto maybe_transit = [&] {
        if (!rng.bernoulli(p_transit)) return;
        const int gap = uniform_int(rng, 5, 15);
        const int duration = uniform_int(rng, 10, 25);
        visits.push_back({pool_pick(rng, city, VenueType::TransitHub), cursor + gap,
                          cursor + gap + duration});
        cursor += gap + duration;
    };

    maybe_transit();

    if (workday) {
        const int desk = user.role == Role::Student ? user.school_venue : user.work_venue;
        const int start = cursor + uniform_int(rng, 10, 40);
        const bool lunch = rng.bernoulli(sched.p_lunch);
        const int work_end = uniform_int(rng, 1020, 1110);
        if (lunch) {
            const int first_block = uniform_int(rng, 180, 240);
            visits.push_back({desk, start, start + first_block});
            const int lunch_start = start + first_block + uniform_int(rng, 3, 10);
            const int lunch_end = lunch_start + uniform_int(rng, 30, 60);
            visits.push_back({pool_pick(rng, city, VenueType::FoodCourt), lunch_start, lunch_end});
            visits.push_back({desk, lunch_end + uniform_int(rng, 3, 10), work_end});
        } else {
            visits.push_back({desk, start, work_end});
        }
        cursor = work_end;
        maybe_transit();
        const int stops = rng.weighted_index(
            {sched.evening_disc[0], sched.evening_disc[1], sched.evening_disc[2]});
        for (int i = 0; i < stops; ++i) {
            const int gap = uniform_int(rng, 5, 15);
            const int duration = uniform_int(rng, 30, 75);
            const int which = rng.weighted_index(
                {sched.disc_work[0], sched.disc_work[1], sched.disc_work[2], sched.disc_work[3],
                 sched.disc_work[4]});
            visits.push_back({pool_pick(rng, city, kDiscVenue[which]), cursor + gap,
                              cursor + gap + duration});
            cursor += gap + duration;
        }
        visits.push_back({user.home_venue, cursor + uniform_int(rng, 5, 15), kDayEndMinute});
    } else {
        const int stops = 1 + rng.weighted_index({sched.leisure_disc[0], sched.leisure_disc[1],
                                                  sched.leisure_disc[2]});
        for (int i = 0; i < stops; ++i) {
            const int gap = uniform_int(rng, 15, 45);
            const int duration = uniform_int(rng, 45, 150);
            const int which = rng.weighted_index(
                {sched.disc_leisure[0], sched.disc_leisure[1], sched.disc_leisure[2],
                 sched.disc_leisure[3], sched.disc_leisure[4]});
            visits.push_back({pool_pick(rng, city, kDiscVenue[which]), cursor + gap,
                              cursor + gap + duration});
            cursor += gap + duration;
        }
        maybe_transit();
        visits.push_back({user.home_venue, cursor + uniform_int(rng, 15, 45), kDayEndMinute});
    }
    return visits;
}

void jitter(Rng& rng, double max_radius, double& x, double& y) {
    const double r = rng.uniform(0.0, max_radius);
    const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    x += r * std::cos(theta);
    y += r * std::sin(theta);
}

// expected visits per venue type for one day of the given template
std::array<double, kNumVenueTypes> expected_visits(const SynthUser& user, bool workday) {
    const GroupSchedule sched = group_schedule(user.gender, user.band);
    std::array<double, kNumVenueTypes> e{};
    auto at = [&](VenueType v) -> double& { return e[static_cast<int>(v)]; };
    if (workday) {
        const double go = 1.0 - sched.p_stay_work;
        at(VenueType::Home) = sched.p_stay_work + go * 2.0;
        at(VenueType::TransitHub) = go * 2.0 * sched.p_transit_work;
        const VenueType desk =
            user.role == Role::Student ? VenueType::School : VenueType::WorkSite;
        at(desk) += go * (1.0 + sched.p_lunch);
        at(VenueType::FoodCourt) += go * sched.p_lunch;
        const double n = sched.evening_disc[1] + 2.0 * sched.evening_disc[2];
        for (int t = 0; t < kNumDiscTypes; ++t) {
            e[static_cast<int>(kDiscVenue[t])] += go * n * sched.disc_work[t];
        }
    } else {
        const double go = 1.0 - sched.p_stay_leisure;
        at(VenueType::Home) = sched.p_stay_leisure + go * 2.0;
        at(VenueType::TransitHub) = go * 2.0 * sched.p_transit_leisure;
        const double m = sched.leisure_disc[0] + 2.0 * sched.leisure_disc[1] +
                         3.0 * sched.leisure_disc[2];
        for (int t = 0; t < kNumDiscTypes; ++t) {
            e[static_cast<int>(kDiscVenue[t])] += go * m * sched.disc_leisure[t];
        }
    }
    return e;
}

struct PoiTemplate {
    const char* category;
    double probability;  // 1.0 -> always present
    const char* activity;  // nullptr -> deliberately unmapped
};

const std::vector<PoiTemplate>& poi_templates(VenueType v) {
    static const std::vector<PoiTemplate> none{};
    static const std::vector<PoiTemplate> work{{"office", 1.0, "Work"},
                                               {"conference_center", 0.4, "WorkRelatedBusiness"}};
    static const std::vector<PoiTemplate> school{{"school", 1.0, "Education"},
                                                 {"library", 0.5, "Education"}};
    static const std::vector<PoiTemplate> hub{{"mrt_station", 1.0, "ChangeModeTransfer"},
                                              {"bus_interchange", 0.5, "ChangeModeTransfer"},
                                              {"taxi_stand", 0.5, "PickUpDropOff"}};
    static const std::vector<PoiTemplate> mall{{"shopping_mall", 1.0, "Shopping"},
                                               {"restaurant", 0.7, "MealEatingBreak"},
                                               {"cinema", 0.5, "Entertainment"},
                                               {"atm", 0.6, nullptr}};
    static const std::vector<PoiTemplate> park{{"park", 1.0, "Recreation"},
                                               {"gym", 0.4, "SportsExercise"},
                                               {"playground", 0.4, "Recreation"}};
    static const std::vector<PoiTemplate> clinic{{"clinic", 1.0, "MedicalDental"},
                                                 {"pharmacy", 0.6, "PersonalErrand"}};
    static const std::vector<PoiTemplate> friend_home{{"residential_block", 1.0, nullptr}};
    static const std::vector<PoiTemplate> food{{"food_court", 1.0, "MealEatingBreak"},
                                               {"hawker_centre", 0.5, "MealEatingBreak"},
                                               {"juice_bar", 0.3, nullptr}};
    switch (v) {
        case VenueType::Home: return none;
        case VenueType::WorkSite: return work;
        case VenueType::School: return school;
        case VenueType::TransitHub: return hub;
        case VenueType::Mall: return mall;
        case VenueType::Park: return park;
        case VenueType::Clinic: return clinic;
        case VenueType::FriendHome: return friend_home;
        case VenueType::FoodCourt: return food;
    }
    throw InternalError("unknown venue type");
}

std::string band_range_name(int band) {
    switch (band) {
        case 0: return "<25";
        case 1: return "25-40";
        case 2: return "41-60";
        default: return ">60";
    }
}

std::string group_key(Gender g, int band) {
    return std::string(gender_name(g)) + "_" + band_range_name(band);
}

}  // namespace

SynthResult generate_city(const SynthConfig& config, const Projection& projection) {
    if (config.num_users < 1) throw DataError("synthetic city needs at least one user");
    if (config.num_days < 1) throw DataError("synthetic city needs at least one day");
    if (config.unseen_fraction < 0.0 || config.unseen_fraction >= 1.0) {
        throw DataError("unseen fraction must lie in [0, 1)");
    }

    SynthResult result;
    result.calendar = StudyCalendar(config.start_date, config.num_days);

    const Rng master(config.seed);
    Rng roster_rng = master.fork(1);
    Rng layout_rng = master.fork(2);
    Rng assign_rng = master.fork(3);

    // ---- roster ----------------------------------------------------------
    City city;
    const int id_width = static_cast<int>(std::to_string(config.num_users).size());
    int employed_count = 0;
    for (int i = 0; i < config.num_users; ++i) {
        SynthUser u;
        std::string digits = std::to_string(i + 1);
        u.id = "u" + std::string(static_cast<std::size_t>(id_width) - digits.size(), '0') + digits;
        u.gender = roster_rng.bernoulli(0.5) ? Gender::Male : Gender::Female;
        u.band = roster_rng.weighted_index({0.20, 0.35, 0.30, 0.15});
        switch (u.band) {
            case 0: u.age = uniform_int(roster_rng, 18, 24); break;
            case 1: u.age = uniform_int(roster_rng, 25, 40); break;
            case 2: u.age = uniform_int(roster_rng, 41, 60); break;
            default: u.age = uniform_int(roster_rng, 61, 80); break;
        }
        if (u.band == 0) {
            u.role = Role::Student;
        } else if (u.band == 3) {
            u.role = Role::NonWorker;
        } else {
            u.role = roster_rng.bernoulli(0.85) ? Role::Employed : Role::NonWorker;
        }
        if (u.role == Role::Employed) ++employed_count;
        if (config.num_days > 1 && roster_rng.bernoulli(config.unseen_fraction)) {
            u.active_from = 1 + static_cast<int>(
                                    roster_rng.next_below(static_cast<std::uint64_t>(config.num_days - 1)));
        }
        city.users.push_back(std::move(u));
    }

    // ---- venue layout ----------------------------------------------------
    auto add_pool = [&](VenueType type, int count) {
        const int first = static_cast<int>(city.venues.size());
        for (int i = 0; i < count; ++i) city.venues.push_back({type, 0.0, 0.0});
        city.pools[static_cast<int>(type)] = {first, first + count};
    };
    add_pool(VenueType::Home, config.num_users);
    add_pool(VenueType::WorkSite, std::max(1, (employed_count + 2) / 3));
    add_pool(VenueType::School, std::max(2, config.num_users / 25));
    add_pool(VenueType::TransitHub, std::max(4, config.num_users / 8));
    add_pool(VenueType::Mall, std::max(4, config.num_users / 12));
    add_pool(VenueType::Park, std::max(3, config.num_users / 15));
    add_pool(VenueType::Clinic, std::max(2, config.num_users / 20));
    add_pool(VenueType::FriendHome, std::max(4, config.num_users / 10));
    add_pool(VenueType::FoodCourt, std::max(3, config.num_users / 12));

    // one super-grid cell per venue keeps any two venues >= 700 m apart
    const int total_venues = static_cast<int>(city.venues.size());
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(total_venues))));
    std::vector<int> cells(static_cast<std::size_t>(side) * side);
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
    for (int i = static_cast<int>(cells.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(layout_rng.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(j)]);
    }
    const double centre = (side - 1) / 2.0;
    for (int v = 0; v < total_venues; ++v) {
        const int cell = cells[static_cast<std::size_t>(v)];
        city.venues[static_cast<std::size_t>(v)].x =
            (cell % side - centre) * kSuperCellMetres +
            layout_rng.uniform(-kVenueJitterMetres, kVenueJitterMetres);
        city.venues[static_cast<std::size_t>(v)].y =
            (cell / side - centre) * kSuperCellMetres +
            layout_rng.uniform(-kVenueJitterMetres, kVenueJitterMetres);
    }

    // ---- assignments and profiles ---------------------------------------
    for (int i = 0; i < config.num_users; ++i) {
        SynthUser& u = city.users[static_cast<std::size_t>(i)];
        u.home_venue = city.pools[static_cast<int>(VenueType::Home)].first + i;
        if (u.role == Role::Employed) u.work_venue = pool_pick(assign_rng, city, VenueType::WorkSite);
        if (u.role == Role::Student) u.school_venue = pool_pick(assign_rng, city, VenueType::School);

        UserProfile p;
        p.user_id = u.id;
        p.gender = u.gender;
        p.age = u.age;
        const Venue& home = city.venues[static_cast<std::size_t>(u.home_venue)];
        p.home_x = home.x;
        p.home_y = home.y;
        projection.to_lonlat(home.x, home.y, p.home_lon, p.home_lat);
        if (u.work_venue >= 0) {
            const Venue& work = city.venues[static_cast<std::size_t>(u.work_venue)];
            p.work_x = work.x;
            p.work_y = work.y;
            double lon = 0.0, lat = 0.0;
            projection.to_lonlat(work.x, work.y, lon, lat);
            p.work_lon = lon;
            p.work_lat = lat;
        }
        result.profiles.push_back(std::move(p));
    }

    // ---- POIs ------------------------------------------------------------
    Rng poi_rng = master.fork(4);
    for (const Venue& venue : city.venues) {
        for (const PoiTemplate& t : poi_templates(venue.type)) {
            if (t.probability < 1.0 && !poi_rng.bernoulli(t.probability)) continue;
            PoiRecord poi;
            poi.x = venue.x;
            poi.y = venue.y;
            jitter(poi_rng, kPoiJitterMetres, poi.x, poi.y);
            projection.to_lonlat(poi.x, poi.y, poi.lon, poi.lat);
            poi.raw_category = t.category;
            if (t.activity != nullptr) {
                poi.mapped_label = label_from_name(t.activity);
                if (!poi.mapped_label) throw InternalError("bad label in poi template");
                result.poi_mapping[t.category] = t.activity;
            }
            result.pois.push_back(std::move(poi));
        }
    }

    // ---- schedules -------------------------------------------------------
    const std::int64_t day_seconds = 86400;
    for (int i = 0; i < config.num_users; ++i) {
        const SynthUser& u = city.users[static_cast<std::size_t>(i)];
        Rng user_rng = master.fork(1000 + static_cast<std::uint64_t>(i));
        for (int d = u.active_from; d < config.num_days; ++d) {
            Rng day_rng = user_rng.fork(static_cast<std::uint64_t>(d));
            const bool weekday = result.calendar.day_type(d) == DayType::Weekday;
            const bool workday = weekday && u.role != Role::NonWorker;
            for (const Visit& visit : sample_day_visits(day_rng, city, u, workday)) {
                const Venue& venue = city.venues[static_cast<std::size_t>(visit.venue)];
                StopPoint stop;
                stop.user_id = u.id;
                stop.x = venue.x;
                stop.y = venue.y;
                jitter(day_rng, kStopJitterMetres, stop.x, stop.y);
                projection.to_lonlat(stop.x, stop.y, stop.lon, stop.lat);
                stop.t_start = result.calendar.start_epoch_seconds() + d * day_seconds +
                               static_cast<std::int64_t>(visit.start_minute) * 60;
                stop.t_end = result.calendar.start_epoch_seconds() + d * day_seconds +
                             static_cast<std::int64_t>(visit.end_minute) * 60;
                const LabelVector emission = emission_table(venue.type, u.gender, u.band);
                stop.label = label_from_index(
                    day_rng.weighted_index({emission.begin(), emission.end()}));
                result.stops.push_back(std::move(stop));
            }
        }
    }

    // ---- roster-conditional expectations and the truth document ----------
    // mass[(venue, gender, band)] = expected number of stops of that key
    std::map<std::string, std::array<std::array<double, kNumVenueTypes>, 2>> group_mass;
    std::array<int, 2> day_type_counts{};  // study-wide, for reference only
    for (int d = 0; d < config.num_days; ++d) {
        ++day_type_counts[result.calendar.day_type(d) == DayType::Weekday ? 0 : 1];
    }

    std::map<std::string, nlohmann::ordered_json> group_info;
    for (const SynthUser& u : city.users) {
        const std::string key = group_key(u.gender, u.band);
        auto& info = group_info[key];
        if (info.is_null()) {
            info["gender"] = std::string(gender_name(u.gender));
            info["age_band"] = band_range_name(u.band);
            info["users"] = 0;
            info["employed_users"] = 0;
            info["active_user_days"] = 0;
        }
        info["users"] = info["users"].get<int>() + 1;
        if (u.role == Role::Employed) {
            info["employed_users"] = info["employed_users"].get<int>() + 1;
        }
        info["active_user_days"] =
            info["active_user_days"].get<int>() + (config.num_days - u.active_from);

        auto& mass = group_mass[key];
        for (int d = u.active_from; d < config.num_days; ++d) {
            const bool weekday = result.calendar.day_type(d) == DayType::Weekday;
            const bool workday = weekday && u.role != Role::NonWorker;
            const std::array<double, kNumVenueTypes> e = expected_visits(u, workday);
            for (int v = 0; v < kNumVenueTypes; ++v) mass[weekday ? 0 : 1][v] += e[v];
        }
    }

    double total_mass = 0.0;
    double bayes_numerator = 0.0;
    std::array<double, kNumLabels> marginal_numerator{};
    nlohmann::ordered_json mass_json = nlohmann::ordered_json::object();
    for (const auto& [key, mass] : group_mass) {
        const auto sep = key.find('_');
        const Gender g = key.substr(0, sep) == "male" ? Gender::Male : Gender::Female;
        int band = 0;
        for (; band < 3; ++band) {
            if (band_range_name(band) == key.substr(sep + 1)) break;
        }
        nlohmann::ordered_json per_venue = nlohmann::ordered_json::object();
        for (int v = 0; v < kNumVenueTypes; ++v) {
            const double m = mass[0][v] + mass[1][v];
            if (m == 0.0) continue;
            per_venue[venue_type_name(static_cast<VenueType>(v))] = m;
            const LabelVector e = emission_table(static_cast<VenueType>(v), g, band);
            double best = 0.0;
            for (int l = 0; l < kNumLabels; ++l) {
                marginal_numerator[l] += m * e[l];
                best = std::max(best, e[l]);
            }
            bayes_numerator += m * best;
            total_mass += m;
        }
        mass_json[key] = per_venue;
    }

    nlohmann::ordered_json truth;
    truth["seed"] = config.seed;
    truth["num_users"] = config.num_users;
    truth["num_days"] = config.num_days;
    truth["start_date"] = config.start_date;
    truth["unseen_fraction"] = config.unseen_fraction;
    truth["weekday_count"] = day_type_counts[0];
    truth["weekend_count"] = day_type_counts[1];

    nlohmann::ordered_json groups = nlohmann::ordered_json::object();
    for (const auto& [key, info] : group_info) groups[key] = info;
    truth["groups"] = groups;

    nlohmann::ordered_json emissions = nlohmann::ordered_json::object();
    for (int v = 0; v < kNumVenueTypes; ++v) {
        nlohmann::ordered_json per_group = nlohmann::ordered_json::object();
        for (const auto& [key, info] : group_info) {
            const Gender g = info["gender"] == "male" ? Gender::Male : Gender::Female;
            int band = 0;
            for (; band < 3; ++band) {
                if (band_range_name(band) == info["age_band"]) break;
            }
            const LabelVector e = emission_table(static_cast<VenueType>(v), g, band);
            per_group[key] = std::vector<double>(e.begin(), e.end());
        }
        emissions[venue_type_name(static_cast<VenueType>(v))] = per_group;
    }
    truth["emissions"] = emissions;
    truth["expected_visit_mass"] = mass_json;
    truth["expected_stops"] = total_mass;
    {
        std::vector<double> marginal(kNumLabels);
        for (int l = 0; l < kNumLabels; ++l) marginal[l] = marginal_numerator[l] / total_mass;
        truth["label_marginal"] = marginal;
        nlohmann::ordered_json names = nlohmann::ordered_json::array();
        for (int l = 0; l < kNumLabels; ++l) names.push_back(std::string(label_name(label_from_index(l))));
        truth["label_names"] = names;
    }
    truth["bayes_rate"] = bayes_numerator / total_mass;
    result.truth_json = truth.dump(2);
    return result;
}

}  // namespace actrec
