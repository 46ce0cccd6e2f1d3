#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actrec/domain.hpp"

namespace actrec {

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

// Raw stop rows keep the label text so "Other" can be recognised and dropped
// with its own report category before cleaning.
struct ParsedStops {
    std::vector<StopPoint> stops;
    std::int64_t total_rows = 0;      // data rows seen (header excluded)
    std::int64_t skipped_rows = 0;    // unparseable rows
    std::int64_t other_dropped = 0;   // rows labelled "Other"
    std::vector<std::string> warnings;
};

struct ParseOptions {
    Projection projection;
    StudyCalendar calendar;
};

// Schema: user_id,lon,lat,t_start,t_end,label with ISO-8601 timestamps.
// A missing or malformed header is a hard error; individual bad rows are
// skipped and reported. Swapped start/end times are NOT a parse error; they
// flow through to the cleaning stage.
ParsedStops parse_stops(const std::string& path, const ParseOptions& options);

// Schema: user_id,gender,age,home_lon,home_lat[,work_lon,work_lat].
std::map<std::string, UserProfile> parse_profiles(const std::string& path,
                                                  const ParseOptions& options);

// Schema: lon,lat,raw_category. Categories are mapped through the JSON
// mapping file {raw_category: canonical activity name}; unmapped categories
// keep a null label and are ignored by the feature statistics.
std::vector<PoiRecord> parse_pois(const std::string& poi_path, const std::string& mapping_path,
                                  const ParseOptions& options);

std::map<std::string, ActivityLabel> parse_poi_mapping(const std::string& mapping_path);

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

struct CleaningParams {
    double home_match_radius_m = 50.0;   // first/last home stop must lie this close to home
    double near_home_min_m = 10.0;       // non-home activity closer than this discards the day
    double max_duration_hours = 24.0;
    BoundingBox study_bounds;
};

// One user-day of time-sorted stops.
struct ActivityDay {
    std::string user_id;
    int day_index = 0;
    std::vector<StopPoint> stops;
};

struct CleaningReport {
    std::int64_t input_points = 0;
    std::int64_t input_days = 0;
    std::int64_t input_users = 0;

    // day-scoped discards (days, and the points inside them)
    std::int64_t days_no_profile = 0, points_no_profile = 0;
    std::int64_t days_not_home_bounded = 0, points_not_home_bounded = 0;
    std::int64_t days_home_too_far = 0, points_home_too_far = 0;
    std::int64_t days_activity_near_home = 0, points_activity_near_home = 0;

    // point-scoped discards
    std::int64_t points_swapped_time = 0;
    std::int64_t points_over_duration = 0;
    std::int64_t points_out_of_bounds = 0;

    std::int64_t kept_days = 0;
    std::int64_t kept_users = 0;
    std::int64_t kept_points = 0;

    std::int64_t discarded_points() const {
        return points_no_profile + points_not_home_bounded + points_home_too_far +
               points_activity_near_home + points_swapped_time + points_over_duration +
               points_out_of_bounds;
    }
    // invariant: discarded + kept == input
    bool reconciles() const { return discarded_points() + kept_points == input_points; }

    std::string to_json() const;
};

struct CleanResult {
    std::vector<ActivityDay> days;  // ordered by (user_id, day_index)
    CleaningReport report;
};

// Group stops into user-days (sorted by start time within the day).
std::vector<ActivityDay> group_into_days(const std::vector<StopPoint>& stops,
                                         const StudyCalendar& calendar);

// Apply the survey cleaning rules. Day-scoped rules run first on the parsed
// day, then point filters, then the day rules are re-checked against the
// surviving points so that cleaning is idempotent:
//   (a) the day must start and finish with a Home-labelled stop,
//   (b) those stops must lie within 50 m of the registered home,
//   (c) no non-home labelled stop may lie closer than 10 m to home,
//   (d) points with swapped start/end are dropped,
//   (e) points longer than 24 h are dropped,
//   (f) points outside the study bounds are dropped.
CleanResult clean(const std::vector<ActivityDay>& days,
                  const std::map<std::string, UserProfile>& profiles,
                  const CleaningParams& params);

// Convenience: write surviving stops back to the stops CSV schema.
void write_stops_csv(const std::string& path, const std::vector<ActivityDay>& days);
void write_stops_csv(const std::string& path, const std::vector<StopPoint>& stops);

// Counterparts of the parsers above, same schemas.
void write_profiles_csv(const std::string& path, const std::vector<UserProfile>& profiles);
void write_pois_csv(const std::string& path, const std::vector<PoiRecord>& pois);
void write_poi_mapping_json(const std::string& path,
                            const std::map<std::string, std::string>& mapping);

}  // namespace actrec
