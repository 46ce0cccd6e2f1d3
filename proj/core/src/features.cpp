#include "actrec/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "actrec/errors.hpp"

namespace actrec {

LabelVector normalize_or_zero(const std::array<std::int64_t, kNumLabels>& counts) {
    LabelVector out{};
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    if (total <= 0) return out;
    for (int l = 0; l < kNumLabels; ++l) {
        out[l] = static_cast<double>(counts[l]) / static_cast<double>(total);
    }
    return out;
}

// ---------------------------------------------------------------------------
// FrequencyTable
// ---------------------------------------------------------------------------

void FrequencyTable::add(std::int64_t bin, ActivityLabel label, std::int64_t count) {
    if (count == 0) return;
    rows_[bin][label_index(label)] += count;
}

LabelVector FrequencyTable::probabilities(std::int64_t bin) const {
    auto it = rows_.find(bin);
    if (it == rows_.end()) return LabelVector{};
    return normalize_or_zero(it->second);
}

LabelVector FrequencyTable::probabilities_for_bins(const std::vector<std::int64_t>& bins) const {
    CountRow sum{};
    for (std::int64_t bin : bins) {
        auto it = rows_.find(bin);
        if (it == rows_.end()) continue;
        for (int l = 0; l < kNumLabels; ++l) sum[l] += it->second[l];
    }
    return normalize_or_zero(sum);
}

// ---------------------------------------------------------------------------
// TransitionMatrices
// ---------------------------------------------------------------------------

void TransitionMatrices::add(DayType day_type, ActivityLabel prev, ActivityLabel current,
                             std::int64_t count) {
    counts_[static_cast<int>(day_type)][label_index(prev)][label_index(current)] += count;
}

LabelVector TransitionMatrices::row(DayType day_type, ActivityLabel prev) const {
    const auto& raw = counts_[static_cast<int>(day_type)][label_index(prev)];
    std::int64_t total = 0;
    for (int l = 0; l < kNumLabels; ++l) total += raw[l];
    if (total == 0) return uniform_row();
    LabelVector out{};
    for (int l = 0; l < kNumLabels; ++l) {
        out[l] = static_cast<double>(raw[l]) / static_cast<double>(total);
    }
    return out;
}

LabelVector TransitionMatrices::uniform_row() {
    LabelVector out{};
    out.fill(1.0 / kNumLabels);
    return out;
}

std::int64_t TransitionMatrices::count(DayType day_type, ActivityLabel prev,
                                       ActivityLabel current) const {
    return counts_[static_cast<int>(day_type)][label_index(prev)][label_index(current)];
}

void TransitionMatrices::set_count(DayType day_type, ActivityLabel prev, ActivityLabel current,
                                   std::int64_t n) {
    counts_[static_cast<int>(day_type)][label_index(prev)][label_index(current)] = n;
}

// ---------------------------------------------------------------------------
// Temporal bins
// ---------------------------------------------------------------------------

std::int64_t temporal_bin_key(DayType day_type, int slot_index) {
    return (static_cast<std::int64_t>(day_type) << 32) | static_cast<std::uint32_t>(slot_index);
}

std::vector<std::int64_t> temporal_keys(const std::vector<TimeSlot>& slots,
                                        const StudyCalendar& calendar) {
    std::set<std::int64_t> keys;
    for (const TimeSlot& s : slots) {
        // boundary slots can spill one slot past the study calendar, where no
        // day type exists; they carry no canonical bin
        if (s.day_index < 0 || s.day_index >= calendar.num_days()) continue;
        keys.insert(temporal_bin_key(calendar.day_type(s.day_index), s.slot_index));
    }
    return {keys.begin(), keys.end()};
}

ActivityPoint make_activity_point(const StopPoint& stop, const Quantizer& quantizer,
                                  const StudyCalendar& calendar, int slot_width_minutes) {
    ActivityPoint p;
    p.origin = stop;
    p.cell_id = quantizer.is_fixed() ? quantizer.cell_of(stop.x, stop.y) : 0;
    p.slots = time_slots(stop.t_start, stop.t_end, slot_width_minutes, calendar);
    p.label = stop.label;
    return p;
}

// ---------------------------------------------------------------------------
// UserHistory
// ---------------------------------------------------------------------------

void UserHistory::add(const std::string& user_id, std::int64_t t_end, ActivityLabel label) {
    auto& timeline = timelines_[user_id];
    std::pair<std::int64_t, ActivityLabel> entry{t_end, label};
    if (timeline.empty() || timeline.back().first <= t_end) {
        timeline.push_back(entry);
        return;
    }
    auto pos = std::upper_bound(
        timeline.begin(), timeline.end(), entry,
        [](const auto& a, const auto& b) { return a.first < b.first; });
    timeline.insert(pos, entry);
}

void UserHistory::add_days(const std::vector<ActivityDay>& days) {
    for (const ActivityDay& day : days) {
        for (const StopPoint& stop : day.stops) {
            if (stop.label) add(day.user_id, stop.t_end, *stop.label);
        }
    }
}

std::optional<ActivityLabel> UserHistory::previous_label(const std::string& user_id,
                                                         std::int64_t t_query) const {
    auto it = timelines_.find(user_id);
    if (it == timelines_.end()) return std::nullopt;
    const auto& timeline = it->second;
    auto pos = std::upper_bound(
        timeline.begin(), timeline.end(), t_query,
        [](std::int64_t t, const auto& e) { return t < e.first; });
    if (pos == timeline.begin()) return std::nullopt;
    --pos;
    if (t_query - pos->first > 24 * 3600) return std::nullopt;
    return pos->second;
}

// ---------------------------------------------------------------------------
// PopulationStats
// ---------------------------------------------------------------------------

namespace {

double max_pairwise_distance(const std::vector<int>& members,
                             const std::vector<PlanePoint>& coords) {
    double best = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const PlanePoint& a = coords[members[i]];
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            const PlanePoint& b = coords[members[j]];
            best = std::max(best, euclidean_distance(a.x, a.y, b.x, b.y));
        }
    }
    return best;
}

void write_block(std::vector<double>& features, int offset, const LabelVector& block) {
    for (int l = 0; l < kNumLabels; ++l) features[offset + l] = block[l];
}

LabelVector histogram_distribution(const std::vector<int>& members,
                                   const std::vector<int>& member_labels) {
    std::array<std::int64_t, kNumLabels> counts{};
    for (int idx : members) ++counts[member_labels[idx]];
    return normalize_or_zero(counts);
}

}  // namespace

PopulationStats::PopulationStats(const std::vector<ActivityDay>& days,
                                 const std::vector<PoiRecord>& pois,
                                 std::shared_ptr<const Quantizer> quantizer,
                                 const StudyCalendar& calendar, const FeatureConfig& config)
    : quantizer_(std::move(quantizer)), calendar_(calendar), config_(config) {
    if (!quantizer_) throw InternalError("PopulationStats requires a quantizer");

    UserHistory history;
    history.add_days(days);

    for (const ActivityDay& day : days) {
        for (const StopPoint& stop : day.stops) {
            if (!stop.label) continue;
            ActivityPoint point =
                make_activity_point(stop, *quantizer_, calendar_, config_.slot_width_minutes);
            if (quantizer_->is_fixed()) spatial_.add(point.cell_id, *stop.label);
            for (std::int64_t key : temporal_keys(point.slots, calendar_)) {
                temporal_.add(key, *stop.label);
            }
            DayType dt = calendar_.day_type(calendar_.day_index_of(stop.t_start));
            if (auto prev = history.previous_label(day.user_id, stop.t_start)) {
                transitions_.add(dt, *prev, *stop.label);
            }
            points_.push_back(std::move(point));
        }
    }

    if (quantizer_->is_fixed()) {
        for (const PoiRecord& poi : pois) {
            if (poi.mapped_label) {
                contextual_.add(quantizer_->cell_of(poi.x, poi.y), *poi.mapped_label);
            }
        }
    }

    build_derived(pois);
}

PopulationStats::PopulationStats(std::vector<ActivityPoint> points, FrequencyTable spatial,
                                 FrequencyTable temporal, FrequencyTable contextual,
                                 TransitionMatrices transitions,
                                 const std::vector<PoiRecord>& pois,
                                 std::shared_ptr<const Quantizer> quantizer,
                                 const StudyCalendar& calendar, const FeatureConfig& config)
    : points_(std::move(points)),
      spatial_(std::move(spatial)),
      temporal_(std::move(temporal)),
      contextual_(std::move(contextual)),
      transitions_(std::move(transitions)),
      quantizer_(std::move(quantizer)),
      calendar_(calendar),
      config_(config) {
    if (!quantizer_) throw InternalError("PopulationStats requires a quantizer");
    build_derived(pois);
}

void PopulationStats::build_derived(const std::vector<PoiRecord>& pois) {
    point_coords_.reserve(points_.size());
    point_labels_.reserve(points_.size());
    std::map<std::string, std::pair<PlanePoint, int>> work_sums;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const ActivityPoint& p = points_[i];
        if (!p.label) throw InternalError("population points must be labelled");
        point_coords_.push_back({p.origin.x, p.origin.y});
        point_labels_.push_back(label_index(*p.label));
        if (quantizer_->is_fixed()) {
            cell_points_[p.cell_id].push_back(static_cast<int>(i));
        }
        if (*p.label == ActivityLabel::Work) {
            auto& [sum, n] = work_sums[p.origin.user_id];
            sum.x += p.origin.x;
            sum.y += p.origin.y;
            ++n;
        }
    }
    for (const auto& [user, sum] : work_sums) {
        work_centroids_[user] = {sum.first.x / sum.second, sum.first.y / sum.second};
    }

    for (const PoiRecord& poi : pois) {
        if (!poi.mapped_label) continue;
        if (quantizer_->is_fixed()) {
            cell_pois_[quantizer_->cell_of(poi.x, poi.y)].push_back(
                static_cast<int>(poi_coords_.size()));
        }
        poi_coords_.push_back({poi.x, poi.y});
        poi_labels_.push_back(label_index(*poi.mapped_label));
    }

    if (quantizer_->is_fixed()) {
        for (const auto& [cell, members] : cell_points_) {
            cell_point_normalizer_[cell] = max_pairwise_distance(members, point_coords_);
        }
        for (const auto& [cell, members] : cell_pois_) {
            cell_poi_normalizer_[cell] = max_pairwise_distance(members, poi_coords_);
        }
    } else {
        double radius = quantizer_->circular_params().radius;
        point_radius_index_ = std::make_unique<RadiusIndex>(point_coords_, radius);
        poi_radius_index_ = std::make_unique<RadiusIndex>(poi_coords_, radius);
    }
}

LabelVector PopulationStats::spatial_frequency(double x, double y) const {
    if (quantizer_->is_fixed()) {
        return spatial_.probabilities(quantizer_->cell_of(x, y));
    }
    return histogram_distribution(point_radius_index_->query(x, y), point_labels_);
}

LabelVector PopulationStats::temporal_frequency(const std::vector<TimeSlot>& slots) const {
    return temporal_.probabilities_for_bins(temporal_keys(slots, calendar_));
}

LabelVector PopulationStats::contextual_frequency(double x, double y) const {
    if (quantizer_->is_fixed()) {
        return contextual_.probabilities(quantizer_->cell_of(x, y));
    }
    return histogram_distribution(poi_radius_index_->query(x, y), poi_labels_);
}

void PopulationStats::confidence_for_members(double x, double y, const std::vector<int>& members,
                                             const std::vector<PlanePoint>& coords,
                                             const std::vector<int>& member_labels,
                                             double normalizer, LabelVector& out) const {
    std::array<double, kNumLabels> min_dist;
    min_dist.fill(std::numeric_limits<double>::infinity());
    for (int idx : members) {
        double d = euclidean_distance(x, y, coords[idx].x, coords[idx].y);
        min_dist[member_labels[idx]] = std::min(min_dist[member_labels[idx]], d);
    }
    for (int l = 0; l < kNumLabels; ++l) {
        if (!std::isfinite(min_dist[l])) {
            out[l] = 0.0;
        } else {
            double normalized = normalizer > 0.0 ? min_dist[l] / normalizer : 0.0;
            out[l] = distance_confidence(normalized);
        }
    }
}

LabelVector PopulationStats::historical_confidence(double x, double y) const {
    LabelVector out{};
    if (quantizer_->is_fixed()) {
        auto it = cell_points_.find(quantizer_->cell_of(x, y));
        if (it == cell_points_.end()) return out;
        confidence_for_members(x, y, it->second, point_coords_, point_labels_,
                               cell_point_normalizer_.at(it->first), out);
    } else {
        std::vector<int> members = point_radius_index_->query(x, y);
        confidence_for_members(x, y, members, point_coords_, point_labels_,
                               max_pairwise_distance(members, point_coords_), out);
    }
    return out;
}

LabelVector PopulationStats::contextual_confidence(double x, double y) const {
    LabelVector out{};
    if (quantizer_->is_fixed()) {
        auto it = cell_pois_.find(quantizer_->cell_of(x, y));
        if (it == cell_pois_.end()) return out;
        confidence_for_members(x, y, it->second, poi_coords_, poi_labels_,
                               cell_poi_normalizer_.at(it->first), out);
    } else {
        std::vector<int> members = poi_radius_index_->query(x, y);
        confidence_for_members(x, y, members, poi_coords_, poi_labels_,
                               max_pairwise_distance(members, poi_coords_), out);
    }
    return out;
}

LabelVector PopulationStats::transition_feature(std::optional<ActivityLabel> prev,
                                                DayType day_type) const {
    if (!prev) return TransitionMatrices::uniform_row();
    return transitions_.row(day_type, *prev);
}

std::array<double, 2> PopulationStats::core_distances(const StopPoint& stop,
                                                      const UserProfile& profile) const {
    double home_km =
        euclidean_distance(stop.x, stop.y, profile.home_x, profile.home_y) / 1000.0;
    double work_km = config_.study_diameter_km;
    if (profile.has_work()) {
        work_km = euclidean_distance(stop.x, stop.y, *profile.work_x, *profile.work_y) / 1000.0;
    } else if (auto it = work_centroids_.find(profile.user_id); it != work_centroids_.end()) {
        work_km = euclidean_distance(stop.x, stop.y, it->second.x, it->second.y) / 1000.0;
    }
    return {home_km, work_km};
}

std::optional<PlanePoint> PopulationStats::work_centroid(const std::string& user_id) const {
    auto it = work_centroids_.find(user_id);
    if (it == work_centroids_.end()) return std::nullopt;
    return it->second;
}

std::vector<double> PopulationStats::assemble(const StopPoint& stop, const UserProfile& profile,
                                              std::optional<ActivityLabel> prev_label) const {
    std::vector<double> features(kFeatureDim, 0.0);
    std::vector<TimeSlot> slots =
        time_slots(stop.t_start, stop.t_end, config_.slot_width_minutes, calendar_);
    DayType dt = calendar_.day_type(calendar_.day_index_of(stop.t_start));

    write_block(features, kTemporalOffset, temporal_frequency(slots));
    write_block(features, kSpatialOffset, spatial_frequency(stop.x, stop.y));
    write_block(features, kContextualOffset, contextual_frequency(stop.x, stop.y));
    write_block(features, kTransitionOffset, transition_feature(prev_label, dt));
    write_block(features, kHistoricalConfOffset, historical_confidence(stop.x, stop.y));
    write_block(features, kContextualConfOffset, contextual_confidence(stop.x, stop.y));

    std::array<double, 2> core = core_distances(stop, profile);
    features[kCoreDistanceOffset] = core[0];
    features[kCoreDistanceOffset + 1] = core[1];
    features[kDurationOffset] = stop.duration_hours();
    return features;
}

}  // namespace actrec
