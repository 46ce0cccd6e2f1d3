#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actrec/domain.hpp"
#include "actrec/ingest.hpp"
#include "actrec/quantize.hpp"

namespace actrec {

// feature vector layout: six L-blocks plus core distances (2) and duration (1)
inline constexpr int kFeatureDim = 6 * kNumLabels + 3;

// block offsets within the assembled vector
inline constexpr int kTemporalOffset = 0 * kNumLabels;
inline constexpr int kSpatialOffset = 1 * kNumLabels;
inline constexpr int kContextualOffset = 2 * kNumLabels;
inline constexpr int kTransitionOffset = 3 * kNumLabels;
inline constexpr int kHistoricalConfOffset = 4 * kNumLabels;
inline constexpr int kContextualConfOffset = 5 * kNumLabels;
inline constexpr int kCoreDistanceOffset = 6 * kNumLabels;
inline constexpr int kDurationOffset = 6 * kNumLabels + 2;

// distance activation: 1 at distance 0, 1/2 at normalized distance 1
inline double distance_confidence(double d) { return 1.0 / (1.0 + d * d); }

// empirical label distribution of a count row; identically zero when empty
LabelVector normalize_or_zero(const std::array<std::int64_t, kNumLabels>& counts);

// ---------------------------------------------------------------------------
// Count tables
// ---------------------------------------------------------------------------

enum class BinKind : std::uint8_t { SpatialCell = 0, TimeSlotSet = 1, ContextualCell = 2 };

// Per-bin label counts; probabilities are row normalizations computed on
// demand, so only counts are ever stored or serialized.
class FrequencyTable {
public:
    using CountRow = std::array<std::int64_t, kNumLabels>;

    explicit FrequencyTable(BinKind kind) : kind_(kind) {}

    BinKind kind() const { return kind_; }
    void add(std::int64_t bin, ActivityLabel label, std::int64_t count = 1);

    // Pr(a = l | bin); zero vector for unseen bins
    LabelVector probabilities(std::int64_t bin) const;
    // counts summed across bins, then normalized (the time-slot-set bin is a
    // union of per-slot bins weighted by slot overlap)
    LabelVector probabilities_for_bins(const std::vector<std::int64_t>& bins) const;

    const std::map<std::int64_t, CountRow>& rows() const { return rows_; }
    void set_row(std::int64_t bin, const CountRow& row) { rows_[bin] = row; }

private:
    BinKind kind_;
    std::map<std::int64_t, CountRow> rows_;
};

// First-order activity transition counts, one matrix per day type. Rows of
// never-observed source activities fall back to the uniform distribution.
class TransitionMatrices {
public:
    void add(DayType day_type, ActivityLabel prev, ActivityLabel current, std::int64_t count = 1);

    // row sums to exactly 1; uniform 1/L when the source was never observed
    LabelVector row(DayType day_type, ActivityLabel prev) const;
    static LabelVector uniform_row();

    std::int64_t count(DayType day_type, ActivityLabel prev, ActivityLabel current) const;
    void set_count(DayType day_type, ActivityLabel prev, ActivityLabel current, std::int64_t n);

private:
    std::int64_t counts_[2][kNumLabels][kNumLabels] = {};
};

// canonical temporal bin: slots on different days align when they share
// time-of-day and day type
std::int64_t temporal_bin_key(DayType day_type, int slot_index);

// canonical key set (deduplicated, ascending) for a stop's slot set; slots
// outside the study calendar have no day type and are skipped
std::vector<std::int64_t> temporal_keys(const std::vector<TimeSlot>& slots,
                                        const StudyCalendar& calendar);

ActivityPoint make_activity_point(const StopPoint& stop, const Quantizer& quantizer,
                                  const StudyCalendar& calendar, int slot_width_minutes);

// ---------------------------------------------------------------------------
// Per-user validated history (transition context)
// ---------------------------------------------------------------------------

// Timeline of validated stops per user, used to find the previous activity
// for the transition feature. The previous activity must have ended no more
// than 24 hours before the query start, otherwise there is none.
class UserHistory {
public:
    void add(const std::string& user_id, std::int64_t t_end, ActivityLabel label);
    void add_days(const std::vector<ActivityDay>& days);

    std::optional<ActivityLabel> previous_label(const std::string& user_id,
                                                std::int64_t t_query) const;
    bool seen(const std::string& user_id) const { return timelines_.count(user_id) > 0; }

private:
    // per user, sorted by end time (ties keep insertion order)
    std::map<std::string, std::vector<std::pair<std::int64_t, ActivityLabel>>> timelines_;
};

// ---------------------------------------------------------------------------
// Population statistics / feature assembly
// ---------------------------------------------------------------------------

struct FeatureConfig {
    int slot_width_minutes = 60;
    double study_diameter_km = 50.0;  // sentinel for a missing work location
};

// All empirical statistics of one user population, plus assembly of the
// 6L+3 feature vector for arbitrary query stops. Immutable once built;
// queries are pure and safe to run in parallel.
class PopulationStats {
public:
    PopulationStats(const std::vector<ActivityDay>& days, const std::vector<PoiRecord>& pois,
                    std::shared_ptr<const Quantizer> quantizer, const StudyCalendar& calendar,
                    const FeatureConfig& config);

    // deserialization path: stored tables are used as-is, derived indexes are
    // rebuilt from the stored points
    PopulationStats(std::vector<ActivityPoint> points, FrequencyTable spatial,
                    FrequencyTable temporal, FrequencyTable contextual,
                    TransitionMatrices transitions, const std::vector<PoiRecord>& pois,
                    std::shared_ptr<const Quantizer> quantizer, const StudyCalendar& calendar,
                    const FeatureConfig& config);

    LabelVector spatial_frequency(double x, double y) const;
    LabelVector temporal_frequency(const std::vector<TimeSlot>& slots) const;
    LabelVector contextual_frequency(double x, double y) const;
    LabelVector historical_confidence(double x, double y) const;
    LabelVector contextual_confidence(double x, double y) const;
    LabelVector transition_feature(std::optional<ActivityLabel> prev, DayType day_type) const;
    std::array<double, 2> core_distances(const StopPoint& stop, const UserProfile& profile) const;

    // full 6L+3 vector; prev_label is the user's previous validated activity
    // within 24 hours, if any
    std::vector<double> assemble(const StopPoint& stop, const UserProfile& profile,
                                 std::optional<ActivityLabel> prev_label) const;

    const std::vector<ActivityPoint>& points() const { return points_; }
    const FrequencyTable& spatial_table() const { return spatial_; }
    const FrequencyTable& temporal_table() const { return temporal_; }
    const FrequencyTable& contextual_table() const { return contextual_; }
    const TransitionMatrices& transitions() const { return transitions_; }
    const Quantizer& quantizer() const { return *quantizer_; }
    const StudyCalendar& calendar() const { return calendar_; }
    const FeatureConfig& config() const { return config_; }
    std::optional<PlanePoint> work_centroid(const std::string& user_id) const;

private:
    void build_derived(const std::vector<PoiRecord>& pois);
    void confidence_for_members(double x, double y, const std::vector<int>& members,
                                const std::vector<PlanePoint>& coords,
                                const std::vector<int>& member_labels, double normalizer,
                                LabelVector& out) const;

    std::vector<ActivityPoint> points_;
    FrequencyTable spatial_{BinKind::SpatialCell};
    FrequencyTable temporal_{BinKind::TimeSlotSet};
    FrequencyTable contextual_{BinKind::ContextualCell};
    TransitionMatrices transitions_;

    std::shared_ptr<const Quantizer> quantizer_;
    StudyCalendar calendar_;
    FeatureConfig config_;

    // derived, never serialized
    std::vector<PlanePoint> point_coords_;
    std::vector<int> point_labels_;
    std::vector<PlanePoint> poi_coords_;   // mapped POIs only
    std::vector<int> poi_labels_;
    std::map<std::int64_t, std::vector<int>> cell_points_;  // fixed quantizers
    std::map<std::int64_t, std::vector<int>> cell_pois_;
    std::map<std::int64_t, double> cell_point_normalizer_;  // max pairwise distance
    std::map<std::int64_t, double> cell_poi_normalizer_;
    std::unique_ptr<RadiusIndex> point_radius_index_;  // circular quantizer
    std::unique_ptr<RadiusIndex> poi_radius_index_;
    std::map<std::string, PlanePoint> work_centroids_;  // from Work-labelled points
};

}  // namespace actrec
