#include "actrec/domain.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace actrec {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Home",
    "Work",
    "ChangeModeTransfer",
    "PickUpDropOff",
    "Shopping",
    "Social",
    "WorkRelatedBusiness",
    "Education",
    "Recreation",
    "MedicalDental",
    "MealEatingBreak",
    "Entertainment",
    "SportsExercise",
    "PersonalErrand",
    "AccompanySomeone",
    "OthersHome",
};

constexpr double kEarthRadiusMetres = 6371000.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool valid_date(int y, int m, int d) {
    if (y < 1900 || y > 2200 || m < 1 || m > 12 || d < 1) return false;
    static const int dim[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int days = dim[m - 1];
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) days = 29;
    return d <= days;
}

}  // namespace

ActivityLabel label_from_index(int index) {
    if (index < 0 || index >= kNumLabels)
        throw InternalError("activity label index out of range: " + std::to_string(index));
    return static_cast<ActivityLabel>(index);
}

std::string_view label_name(ActivityLabel l) { return kLabelNames[label_index(l)]; }

std::optional<ActivityLabel> label_from_name(std::string_view name) {
    for (int i = 0; i < kNumLabels; ++i)
        if (kLabelNames[i] == name) return static_cast<ActivityLabel>(i);
    return std::nullopt;
}

CoarseLabel collapse_to_4(ActivityLabel l) {
    switch (l) {
        case ActivityLabel::Home:
            return CoarseLabel::Home;
        case ActivityLabel::Work:
        case ActivityLabel::WorkRelatedBusiness:
        case ActivityLabel::Education:
            return CoarseLabel::Work;
        case ActivityLabel::ChangeModeTransfer:
        case ActivityLabel::PickUpDropOff:
            return CoarseLabel::Transportation;
        default:
            return CoarseLabel::MaintenanceDiscretionary;
    }
}

std::string_view coarse_label_name(CoarseLabel l) {
    switch (l) {
        case CoarseLabel::Home: return "Home";
        case CoarseLabel::Work: return "Work";
        case CoarseLabel::Transportation: return "Transportation";
        default: return "MaintenanceDiscretionary";
    }
}

StudyCalendar::StudyCalendar(const std::string& start_date, int num_days) : num_days_(num_days) {
    const auto epoch = parse_date(start_date);
    if (!epoch) throw DataError("invalid study start date: " + start_date);
    if (num_days <= 0) throw DataError("study must span at least one day");
    start_epoch_ = *epoch;
    // 1970-01-01 was a Thursday; weekday 0 = Monday
    start_weekday_ = static_cast<int>(((start_epoch_ / 86400) % 7 + 7 + 3) % 7);
}

int StudyCalendar::day_index_of(std::int64_t epoch_seconds) const {
    const std::int64_t diff = epoch_seconds - start_epoch_;
    std::int64_t days = diff / 86400;
    if (diff < 0 && diff % 86400 != 0) --days;  // floor, not truncation
    return static_cast<int>(days);
}

DayType StudyCalendar::day_type(int day_index) const {
    if (day_index < 0 || day_index >= num_days_)
        throw DataError("day index " + std::to_string(day_index) + " outside study calendar [0, " +
                        std::to_string(num_days_) + ")");
    const int weekday = (start_weekday_ + day_index) % 7;
    return weekday >= 5 ? DayType::Weekend : DayType::Weekday;
}

std::string StudyCalendar::date_of(int day_index) const {
    int y, m, d;
    civil_from_days(start_epoch_ / 86400 + day_index, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    int y, mo, d, h, mi, s;
    char sep;
    char tail;
    const std::string str(text);
    const int n = std::sscanf(str.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c", &y, &mo, &d, &sep, &h,
                              &mi, &s, &tail);
    if (n != 7 || (sep != 'T' && sep != ' ')) return std::nullopt;
    if (!valid_date(y, mo, d) || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
        return std::nullopt;
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lld", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::optional<std::int64_t> parse_date(std::string_view text) {
    int y, m, d;
    const std::string str(text);
    if (std::sscanf(str.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3) return std::nullopt;
    if (!valid_date(y, m, d)) return std::nullopt;
    return days_from_civil(y, m, d) * 86400;
}

Projection::Projection(double ref_lon, double ref_lat)
    : ref_lon_(ref_lon), ref_lat_(ref_lat), cos_ref_lat_(std::cos(ref_lat * kDegToRad)) {}

void Projection::to_plane(double lon, double lat, double& x, double& y) const {
    x = kEarthRadiusMetres * (lon - ref_lon_) * kDegToRad * cos_ref_lat_;
    y = kEarthRadiusMetres * (lat - ref_lat_) * kDegToRad;
}

void Projection::to_lonlat(double x, double y, double& lon, double& lat) const {
    lon = ref_lon_ + x / (kEarthRadiusMetres * cos_ref_lat_) / kDegToRad;
    lat = ref_lat_ + y / kEarthRadiusMetres / kDegToRad;
}

double euclidean_distance(double x1, double y1, double x2, double y2) {
    return std::hypot(x1 - x2, y1 - y2);
}

std::string_view gender_name(Gender g) { return g == Gender::Female ? "female" : "male"; }

std::optional<Gender> gender_from_name(std::string_view name) {
    std::string lower;
    lower.reserve(name.size());
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "female" || lower == "f") return Gender::Female;
    if (lower == "male" || lower == "m") return Gender::Male;
    return std::nullopt;
}

AgeBanding::AgeBanding(std::vector<int> breaks) : breaks_(std::move(breaks)) {
    if (breaks_.empty()) throw DataError("age banding needs at least one breakpoint");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
        if (breaks_[i] <= breaks_[i - 1]) throw DataError("age breakpoints must be strictly increasing");
}

int AgeBanding::band_of(int age) const {
    int band = 0;
    while (band < static_cast<int>(breaks_.size()) && age >= breaks_[band]) ++band;
    return band;
}

std::string AgeBanding::band_name(int band) const {
    if (band <= 0) return "<" + std::to_string(breaks_.front());
    if (band >= static_cast<int>(breaks_.size())) return ">=" + std::to_string(breaks_.back());
    return std::to_string(breaks_[band - 1]) + "-" + std::to_string(breaks_[band] - 1);
}

}  // namespace actrec
