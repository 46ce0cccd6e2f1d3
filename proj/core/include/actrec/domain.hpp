#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actrec/errors.hpp"

namespace actrec {

// ---------------------------------------------------------------------------
// Activity vocabulary
// ---------------------------------------------------------------------------

// The sixteen activity categories recognised by the engine. The integer value
// of each enumerator is its stable index; serialization and score vectors rely
// on this ordering.
enum class ActivityLabel : std::uint8_t {
    Home = 0,
    Work,
    ChangeModeTransfer,
    PickUpDropOff,
    Shopping,
    Social,
    WorkRelatedBusiness,
    Education,
    Recreation,
    MedicalDental,
    MealEatingBreak,
    Entertainment,
    SportsExercise,
    PersonalErrand,
    AccompanySomeone,
    OthersHome,
};

inline constexpr int kNumLabels = 16;

constexpr int label_index(ActivityLabel l) { return static_cast<int>(l); }
ActivityLabel label_from_index(int index);  // throws InternalError out of range

std::string_view label_name(ActivityLabel l);
// Recognises canonical label names only; "Other" and unknown strings map to nullopt.
std::optional<ActivityLabel> label_from_name(std::string_view name);

// "Other" exists in raw survey data but never enters training or prediction.
inline constexpr std::string_view kOtherLabelName = "Other";

// Four conceptually exclusive super-classes used for collapsed reporting.
enum class CoarseLabel : std::uint8_t {
    Home = 0,
    Work,
    Transportation,
    MaintenanceDiscretionary,
};

inline constexpr int kNumCoarseLabels = 4;

// Home->Home; Work/WorkRelatedBusiness/Education->Work;
// ChangeModeTransfer/PickUpDropOff->Transportation; everything else->Maintenance.
CoarseLabel collapse_to_4(ActivityLabel l);
std::string_view coarse_label_name(CoarseLabel l);

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

enum class DayType : std::uint8_t { Weekday = 0, Weekend = 1 };

// One fixed-width interval within a specific study day.
struct TimeSlot {
    int day_index = 0;   // days since study start
    int slot_index = 0;  // 0 .. 1440/slot_width - 1

    friend auto operator<=>(const TimeSlot&, const TimeSlot&) = default;
};

// Civil-date calendar anchored at the study start (midnight, local study time).
// All timestamps in the engine are seconds since 1970-01-01 00:00 in that same
// naive local time; no time zone conversions happen anywhere.
class StudyCalendar {
public:
    StudyCalendar() = default;
    // start_date "YYYY-MM-DD"; the study covers [start, start + num_days).
    StudyCalendar(const std::string& start_date, int num_days);

    std::int64_t start_epoch_seconds() const { return start_epoch_; }
    int num_days() const { return num_days_; }

    bool contains_epoch(std::int64_t t) const {
        return t >= start_epoch_ && t < start_epoch_ + static_cast<std::int64_t>(num_days_) * 86400;
    }

    int day_index_of(std::int64_t epoch_seconds) const;

    // throws DataError when day_index lies outside the study range
    DayType day_type(int day_index) const;
    DayType day_type(const TimeSlot& slot) const { return day_type(slot.day_index); }

    std::string date_of(int day_index) const;  // "YYYY-MM-DD"

private:
    std::int64_t start_epoch_ = 0;
    int start_weekday_ = 0;  // 0 = Monday .. 6 = Sunday
    int num_days_ = 0;
};

// Naive local-time ISO-8601 parsing, seconds resolution.
// Accepts "YYYY-MM-DDTHH:MM:SS" (or with a space separator).
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t epoch_seconds);

std::optional<std::int64_t> parse_date(std::string_view text);  // midnight of "YYYY-MM-DD"

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

// Local equirectangular projection about a study-area reference point.
// Good to well under a metre over a city-sized extent near the equator.
class Projection {
public:
    Projection() = default;
    Projection(double ref_lon, double ref_lat);

    void to_plane(double lon, double lat, double& x, double& y) const;
    void to_lonlat(double x, double y, double& lon, double& lat) const;

private:
    double ref_lon_ = 0.0;
    double ref_lat_ = 0.0;
    double cos_ref_lat_ = 1.0;
};

struct BoundingBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    bool contains(double x, double y) const {
        return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
    }
};

double euclidean_distance(double x1, double y1, double x2, double y2);

// ---------------------------------------------------------------------------
// Core value types
// ---------------------------------------------------------------------------

// A raw stop observation. Coordinates are metres in the study plane; lon/lat
// are retained for provenance. The label is present for validated data and
// may still violate time ordering before cleaning.
struct StopPoint {
    std::string user_id;
    double x = 0.0, y = 0.0;
    double lon = 0.0, lat = 0.0;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    std::optional<ActivityLabel> label;

    double duration_hours() const { return static_cast<double>(t_end - t_start) / 3600.0; }
};

// A quantized stop: the stop plus its spatial cell and time-slot set.
struct ActivityPoint {
    StopPoint origin;
    std::int64_t cell_id = 0;
    std::vector<TimeSlot> slots;  // strictly increasing, non-empty
    std::optional<ActivityLabel> label;
};

enum class Gender : std::uint8_t { Female = 0, Male = 1 };

std::string_view gender_name(Gender g);
std::optional<Gender> gender_from_name(std::string_view name);

// Age band boundaries; band i covers [breaks[i-1], breaks[i+0]). Default
// breakpoints {25, 41, 61} give bands <25, 25-40, 41-60, >60.
class AgeBanding {
public:
    AgeBanding() : breaks_{25, 41, 61} {}
    explicit AgeBanding(std::vector<int> breaks);

    int band_of(int age) const;
    int num_bands() const { return static_cast<int>(breaks_.size()) + 1; }
    std::string band_name(int band) const;
    const std::vector<int>& breaks() const { return breaks_; }

private:
    std::vector<int> breaks_;  // strictly increasing
};

struct UserProfile {
    std::string user_id;
    Gender gender = Gender::Female;
    int age = 0;
    double home_x = 0.0, home_y = 0.0;
    double home_lon = 0.0, home_lat = 0.0;
    std::optional<double> work_x, work_y;
    std::optional<double> work_lon, work_lat;

    bool has_work() const { return work_x.has_value() && work_y.has_value(); }
};

struct PoiRecord {
    double x = 0.0, y = 0.0;
    double lon = 0.0, lat = 0.0;
    std::string raw_category;
    std::optional<ActivityLabel> mapped_label;  // none for unmapped categories
};

using LabelVector = std::array<double, kNumLabels>;

}  // namespace actrec
