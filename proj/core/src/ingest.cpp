#include "actrec/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <tuple>

#include "actrec/csv.hpp"
#include "actrec/errors.hpp"

#include <nlohmann/json.hpp>

namespace actrec {

namespace {

std::optional<double> parse_double(const std::string& text) {
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

std::optional<int> parse_int(const std::string& text) {
    if (text.empty()) return std::nullopt;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

void require_header(const CsvRow& row, const std::vector<std::string>& expected,
                    const std::string& path) {
    if (row.fields.size() < expected.size())
        throw DataError(path + ":" + std::to_string(row.line_number) + ": expected header '" +
                        join_csv(expected) + "'");
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (row.fields[i] != expected[i])
            throw DataError(path + ":" + std::to_string(row.line_number) + ": expected header '" +
                            join_csv(expected) + "', got '" + join_csv(row.fields) + "'");
}

}  // namespace

ParsedStops parse_stops(const std::string& path, const ParseOptions& options) {
    CsvReader reader(path);
    if (!reader.is_open()) throw DataError("cannot open stops file: " + path);

    ParsedStops out;
    CsvRow row;
    if (!reader.next(row)) {
        out.warnings.push_back(path + ": empty stops file");
        return out;
    }
    require_header(row, {"user_id", "lon", "lat", "t_start", "t_end", "label"}, path);

    auto skip = [&](int line, const std::string& why) {
        ++out.skipped_rows;
        out.warnings.push_back(path + ":" + std::to_string(line) + ": " + why + ", row skipped");
    };

    while (reader.next(row)) {
        ++out.total_rows;
        if (row.fields.size() != 6) {
            throw DataError(path + ":" + std::to_string(row.line_number) +
                            ": expected 6 columns, got " + std::to_string(row.fields.size()));
        }
        const auto lon = parse_double(row.fields[1]);
        const auto lat = parse_double(row.fields[2]);
        const auto t_start = parse_timestamp(row.fields[3]);
        const auto t_end = parse_timestamp(row.fields[4]);
        if (!lon || !lat) {
            skip(row.line_number, "bad coordinates");
            continue;
        }
        if (!t_start || !t_end) {
            skip(row.line_number, "bad timestamp");
            continue;
        }
        if (!options.calendar.contains_epoch(*t_start) || !options.calendar.contains_epoch(*t_end)) {
            skip(row.line_number, "timestamp outside study calendar");
            continue;
        }
        const std::string& label_text = row.fields[5];
        std::optional<ActivityLabel> label;
        if (label_text == kOtherLabelName) {
            ++out.other_dropped;
            continue;
        }
        if (!label_text.empty()) {
            label = label_from_name(label_text);
            if (!label) {
                skip(row.line_number, "unknown label '" + label_text + "'");
                continue;
            }
        }
        StopPoint p;
        p.user_id = row.fields[0];
        p.lon = *lon;
        p.lat = *lat;
        options.projection.to_plane(p.lon, p.lat, p.x, p.y);
        p.t_start = *t_start;
        p.t_end = *t_end;
        p.label = label;
        out.stops.push_back(std::move(p));
    }
    return out;
}

std::map<std::string, UserProfile> parse_profiles(const std::string& path,
                                                  const ParseOptions& options) {
    CsvReader reader(path);
    if (!reader.is_open()) throw DataError("cannot open profiles file: " + path);

    CsvRow row;
    if (!reader.next(row)) throw DataError(path + ": empty profiles file");
    require_header(row, {"user_id", "gender", "age", "home_lon", "home_lat"}, path);
    const bool has_work_cols = row.fields.size() == 7;
    if (!has_work_cols && row.fields.size() != 5)
        throw DataError(path + ":1: profiles header must have 5 or 7 columns");

    std::map<std::string, UserProfile> profiles;
    while (reader.next(row)) {
        const std::string where = path + ":" + std::to_string(row.line_number);
        if (row.fields.size() != (has_work_cols ? 7u : 5u))
            throw DataError(where + ": wrong column count");
        UserProfile profile;
        profile.user_id = row.fields[0];
        const auto gender = gender_from_name(row.fields[1]);
        const auto age = parse_int(row.fields[2]);
        const auto home_lon = parse_double(row.fields[3]);
        const auto home_lat = parse_double(row.fields[4]);
        if (!gender || !age || !home_lon || !home_lat)
            throw DataError(where + ": malformed profile row");
        profile.gender = *gender;
        profile.age = *age;
        profile.home_lon = *home_lon;
        profile.home_lat = *home_lat;
        options.projection.to_plane(profile.home_lon, profile.home_lat, profile.home_x,
                                    profile.home_y);
        if (has_work_cols && !row.fields[5].empty() && !row.fields[6].empty()) {
            const auto work_lon = parse_double(row.fields[5]);
            const auto work_lat = parse_double(row.fields[6]);
            if (!work_lon || !work_lat) throw DataError(where + ": malformed work coordinates");
            profile.work_lon = work_lon;
            profile.work_lat = work_lat;
            double wx, wy;
            options.projection.to_plane(*work_lon, *work_lat, wx, wy);
            profile.work_x = wx;
            profile.work_y = wy;
        }
        profiles[profile.user_id] = std::move(profile);
    }
    return profiles;
}

std::map<std::string, ActivityLabel> parse_poi_mapping(const std::string& mapping_path) {
    std::ifstream file(mapping_path);
    if (!file) throw DataError("cannot open POI mapping file: " + mapping_path);
    nlohmann::json doc;
    try {
        file >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(mapping_path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object()) throw DataError(mapping_path + ": mapping must be a JSON object");
    std::map<std::string, ActivityLabel> mapping;
    for (const auto& [category, value] : doc.items()) {
        if (!value.is_string())
            throw DataError(mapping_path + ": mapping values must be activity names");
        const auto label = label_from_name(value.get<std::string>());
        if (!label)
            throw DataError(mapping_path + ": unknown activity name '" +
                            value.get<std::string>() + "' for category '" + category + "'");
        mapping[category] = *label;
    }
    return mapping;
}

std::vector<PoiRecord> parse_pois(const std::string& poi_path, const std::string& mapping_path,
                                  const ParseOptions& options) {
    const auto mapping = parse_poi_mapping(mapping_path);

    CsvReader reader(poi_path);
    if (!reader.is_open()) throw DataError("cannot open POI file: " + poi_path);
    CsvRow row;
    if (!reader.next(row)) return {};
    require_header(row, {"lon", "lat", "raw_category"}, poi_path);

    std::vector<PoiRecord> pois;
    while (reader.next(row)) {
        const std::string where = poi_path + ":" + std::to_string(row.line_number);
        if (row.fields.size() != 3) throw DataError(where + ": expected 3 columns");
        const auto lon = parse_double(row.fields[0]);
        const auto lat = parse_double(row.fields[1]);
        if (!lon || !lat) throw DataError(where + ": bad coordinates");
        PoiRecord poi;
        poi.lon = *lon;
        poi.lat = *lat;
        options.projection.to_plane(poi.lon, poi.lat, poi.x, poi.y);
        poi.raw_category = row.fields[2];
        const auto it = mapping.find(poi.raw_category);
        if (it != mapping.end()) poi.mapped_label = it->second;
        pois.push_back(std::move(poi));
    }
    return pois;
}

std::vector<ActivityDay> group_into_days(const std::vector<StopPoint>& stops,
                                         const StudyCalendar& calendar) {
    std::map<std::pair<std::string, int>, std::vector<StopPoint>> grouped;
    for (const auto& stop : stops)
        grouped[{stop.user_id, calendar.day_index_of(stop.t_start)}].push_back(stop);

    std::vector<ActivityDay> days;
    days.reserve(grouped.size());
    for (auto& [key, day_stops] : grouped) {
        std::sort(day_stops.begin(), day_stops.end(),
                  [](const StopPoint& a, const StopPoint& b) {
                      return std::tie(a.t_start, a.t_end) < std::tie(b.t_start, b.t_end);
                  });
        days.push_back(ActivityDay{key.first, key.second, std::move(day_stops)});
    }
    return days;
}

namespace {

enum class DayRule { Ok, NotHomeBounded, HomeTooFar, ActivityNearHome };

DayRule check_day_rules(const std::vector<StopPoint>& stops, const UserProfile& profile,
                        const CleaningParams& params) {
    if (stops.empty()) return DayRule::NotHomeBounded;
    const StopPoint& first = stops.front();
    const StopPoint& last = stops.back();
    if (first.label != ActivityLabel::Home || last.label != ActivityLabel::Home)
        return DayRule::NotHomeBounded;
    if (euclidean_distance(first.x, first.y, profile.home_x, profile.home_y) >
            params.home_match_radius_m ||
        euclidean_distance(last.x, last.y, profile.home_x, profile.home_y) >
            params.home_match_radius_m)
        return DayRule::HomeTooFar;
    for (const auto& stop : stops) {
        if (stop.label && *stop.label != ActivityLabel::Home &&
            euclidean_distance(stop.x, stop.y, profile.home_x, profile.home_y) <
                params.near_home_min_m)
            return DayRule::ActivityNearHome;
    }
    return DayRule::Ok;
}

}  // namespace

CleanResult clean(const std::vector<ActivityDay>& days,
                  const std::map<std::string, UserProfile>& profiles,
                  const CleaningParams& params) {
    CleanResult result;
    CleaningReport& report = result.report;
    report.input_days = static_cast<std::int64_t>(days.size());

    std::set<std::string> input_users, kept_users;
    for (const auto& day : days) {
        report.input_points += static_cast<std::int64_t>(day.stops.size());
        input_users.insert(day.user_id);
    }
    report.input_users = static_cast<std::int64_t>(input_users.size());

    const double max_duration_s = params.max_duration_hours * 3600.0;

    for (const auto& day : days) {
        const auto n_points = static_cast<std::int64_t>(day.stops.size());
        const auto profile_it = profiles.find(day.user_id);
        if (profile_it == profiles.end()) {
            ++report.days_no_profile;
            report.points_no_profile += n_points;
            continue;
        }
        const UserProfile& profile = profile_it->second;

        auto discard_day = [&](DayRule rule, std::int64_t points) {
            switch (rule) {
                case DayRule::NotHomeBounded:
                    ++report.days_not_home_bounded;
                    report.points_not_home_bounded += points;
                    break;
                case DayRule::HomeTooFar:
                    ++report.days_home_too_far;
                    report.points_home_too_far += points;
                    break;
                case DayRule::ActivityNearHome:
                    ++report.days_activity_near_home;
                    report.points_activity_near_home += points;
                    break;
                default:
                    break;
            }
        };

        const DayRule first_pass = check_day_rules(day.stops, profile, params);
        if (first_pass != DayRule::Ok) {
            discard_day(first_pass, n_points);
            continue;
        }

        // point filters
        std::vector<StopPoint> kept;
        kept.reserve(day.stops.size());
        std::int64_t swapped = 0, over = 0, out_of_bounds = 0;
        for (const auto& stop : day.stops) {
            if (stop.t_end <= stop.t_start) {
                // zero-length stops count as time-invalid too; survivors must
                // satisfy t_start < t_end
                ++swapped;
            } else if (static_cast<double>(stop.t_end - stop.t_start) > max_duration_s) {
                ++over;
            } else if (!params.study_bounds.contains(stop.x, stop.y)) {
                ++out_of_bounds;
            } else {
                kept.push_back(stop);
            }
        }

        // re-check day rules on the surviving points so cleaning is idempotent
        const DayRule second_pass = check_day_rules(kept, profile, params);
        if (second_pass != DayRule::Ok) {
            discard_day(second_pass, static_cast<std::int64_t>(kept.size()));
            report.points_swapped_time += swapped;
            report.points_over_duration += over;
            report.points_out_of_bounds += out_of_bounds;
            continue;
        }

        report.points_swapped_time += swapped;
        report.points_over_duration += over;
        report.points_out_of_bounds += out_of_bounds;
        report.kept_points += static_cast<std::int64_t>(kept.size());
        ++report.kept_days;
        kept_users.insert(day.user_id);
        result.days.push_back(ActivityDay{day.user_id, day.day_index, std::move(kept)});
    }

    report.kept_users = static_cast<std::int64_t>(kept_users.size());
    return result;
}

std::string CleaningReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["input"] = {{"points", input_points}, {"days", input_days}, {"users", input_users}};
    doc["discarded_days"] = {{"no_profile", days_no_profile},
                             {"not_home_bounded", days_not_home_bounded},
                             {"home_too_far", days_home_too_far},
                             {"activity_near_home", days_activity_near_home}};
    doc["discarded_points"] = {{"no_profile", points_no_profile},
                               {"not_home_bounded", points_not_home_bounded},
                               {"home_too_far", points_home_too_far},
                               {"activity_near_home", points_activity_near_home},
                               {"swapped_time", points_swapped_time},
                               {"over_duration", points_over_duration},
                               {"out_of_bounds", points_out_of_bounds},
                               {"total", discarded_points()}};
    doc["kept"] = {{"days", kept_days}, {"users", kept_users}, {"points", kept_points}};
    doc["reconciles"] = reconciles();
    return doc.dump(2);
}

namespace {

void write_stop_rows(std::ofstream& file, const std::vector<StopPoint>& stops) {
    char buf[64];
    for (const auto& stop : stops) {
        std::snprintf(buf, sizeof(buf), "%.7f,%.7f", stop.lon, stop.lat);
        file << stop.user_id << ',' << buf << ',' << format_timestamp(stop.t_start) << ','
             << format_timestamp(stop.t_end) << ','
             << (stop.label ? std::string(label_name(*stop.label)) : std::string()) << '\n';
    }
}

}  // namespace

void write_stops_csv(const std::string& path, const std::vector<ActivityDay>& days) {
    std::ofstream file(path);
    if (!file) throw DataError("cannot write stops file: " + path);
    file << "user_id,lon,lat,t_start,t_end,label\n";
    for (const auto& day : days) write_stop_rows(file, day.stops);
}

void write_stops_csv(const std::string& path, const std::vector<StopPoint>& stops) {
    std::ofstream file(path);
    if (!file) throw DataError("cannot write stops file: " + path);
    file << "user_id,lon,lat,t_start,t_end,label\n";
    write_stop_rows(file, stops);
}

void write_profiles_csv(const std::string& path, const std::vector<UserProfile>& profiles) {
    std::ofstream file(path);
    if (!file) throw DataError("cannot write profiles file: " + path);
    file << "user_id,gender,age,home_lon,home_lat,work_lon,work_lat\n";
    char buf[64];
    for (const auto& p : profiles) {
        std::snprintf(buf, sizeof(buf), "%.7f,%.7f", p.home_lon, p.home_lat);
        file << p.user_id << ',' << gender_name(p.gender) << ',' << p.age << ',' << buf << ',';
        if (p.work_lon && p.work_lat) {
            std::snprintf(buf, sizeof(buf), "%.7f,%.7f", *p.work_lon, *p.work_lat);
            file << buf;
        } else {
            file << ',';
        }
        file << '\n';
    }
}

void write_pois_csv(const std::string& path, const std::vector<PoiRecord>& pois) {
    std::ofstream file(path);
    if (!file) throw DataError("cannot write POI file: " + path);
    file << "lon,lat,raw_category\n";
    char buf[64];
    for (const auto& poi : pois) {
        std::snprintf(buf, sizeof(buf), "%.7f,%.7f", poi.lon, poi.lat);
        file << buf << ',' << poi.raw_category << '\n';
    }
}

void write_poi_mapping_json(const std::string& path,
                            const std::map<std::string, std::string>& mapping) {
    std::ofstream file(path);
    if (!file) throw DataError("cannot write POI mapping file: " + path);
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [category, activity] : mapping) doc[category] = activity;
    file << doc.dump(2) << '\n';
}

}  // namespace actrec
